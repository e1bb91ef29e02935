#ifndef AFFINE_FADDEEVA_HPP
#define AFFINE_FADDEEVA_HPP

#include <complex>

namespace affine {

/// Scaled complex error function w(z) = exp(-z^2) erfc(-iz).
/// Accurate to ~1e-13 on the closed upper half plane; the lower half plane is
/// reached through the reflection w(z) = 2 exp(-z^2) - conj(w(conj(z))).
std::complex<double> faddeeva_w(std::complex<double> z);

}  // namespace affine

#endif

#include "affine/faddeeva.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace affine {
namespace {

// Rational expansion on the upper half plane: map z to the unit disk through
// Z = (L+iz)/(L-iz) and evaluate a fixed polynomial whose coefficients come
// from a discrete Fourier transform of exp(-t^2)(L^2+t^2) on a tangent grid.
constexpr int kTerms = 48;

struct Coeffs {
  double L = 0;
  std::array<double, kTerms> a{};  // a[j] multiplies Z^j
};

Coeffs build_coeffs() {
  Coeffs c;
  const int N = kTerms;
  const int M = 2 * N;
  const int M2 = 2 * M;
  c.L = std::sqrt(N / std::numbers::sqrt2);

  // Sample values, index l = 0..M2-1 corresponds to k = l - M (k = -M is 0).
  std::vector<double> g(M2, 0.0);
  for (int k = -M + 1; k <= M - 1; ++k) {
    const double theta = k * std::numbers::pi / M;
    const double t = c.L * std::tan(0.5 * theta);
    g[k + M] = std::exp(-t * t) * (c.L * c.L + t * t);
  }

  // a[j] = Re( sum_l g[(l+M) mod M2] e^{-2 pi i j l / M2} ) / M2, j = 1..N.
  for (int j = 1; j <= N; ++j) {
    double re = 0.0;
    for (int l = 0; l < M2; ++l) {
      const double ang = -2.0 * std::numbers::pi * j * l / M2;
      re += g[(l + M) % M2] * std::cos(ang);
    }
    c.a[j - 1] = re / M2;
  }
  return c;
}

const Coeffs& coeffs() {
  static const Coeffs c = build_coeffs();
  return c;
}

std::complex<double> upper_half(std::complex<double> z) {
  const Coeffs& c = coeffs();
  const std::complex<double> iz(-z.imag(), z.real());
  const std::complex<double> den = c.L - iz;
  const std::complex<double> Z = (c.L + iz) / den;
  std::complex<double> p(0.0, 0.0);
  for (int j = kTerms - 1; j >= 0; --j) p = p * Z + c.a[j];
  constexpr double inv_sqrt_pi = 0.5641895835477562869;
  return 2.0 * p / (den * den) + inv_sqrt_pi / den;
}

}  // namespace

std::complex<double> faddeeva_w(std::complex<double> z) {
  if (z.imag() >= 0.0) return upper_half(z);
  const std::complex<double> wc = upper_half(std::conj(z));
  return 2.0 * std::exp(-z * z) - std::conj(wc);
}

}  // namespace affine

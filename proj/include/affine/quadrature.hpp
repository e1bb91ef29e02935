#ifndef AFFINE_QUADRATURE_HPP
#define AFFINE_QUADRATURE_HPP

#include <cmath>
#include <stdexcept>

namespace affine {

namespace detail {

template <class F>
double simpson_rec(const F& f, double a, double b, double fa, double fm,
                   double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0) throw std::runtime_error("integrate_adaptive: depth exhausted");
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson rule on [a,b].  Used for the few catalog moments that have
/// no closed form; construction-time only, never on a sampling hot path.
template <class F>
double integrate_adaptive(const F& f, double a, double b, double tol = 1e-11) {
  if (!(b > a)) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, 60);
}

}  // namespace affine

#endif

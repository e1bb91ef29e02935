#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "affine/jumps.hpp"
#include "affine/types.hpp"

using namespace affine;

namespace {

// Composite Simpson on [a, b]; n must be even.
Cplx simpson(const std::function<Cplx(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  Cplx acc = f(a) + f(b);
  for (int k = 1; k < n; ++k) acc += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
  return acc * (h / 3.0);
}

Vec v2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

CVec cu2(Cplx a, Cplx b) {
  CVec u(2);
  u << a, b;
  return u;
}

}  // namespace

TEST_CASE("exponential scalar law against quadrature") {
  const double mu = 0.7;
  const ScalarLaw law = ScalarLaw::exponential(mu);
  CHECK(law.mean() == doctest::Approx(mu));
  CHECK(law.cdf(1.3) == doctest::Approx(1.0 - std::exp(-1.3 / mu)).epsilon(1e-14));
  CHECK(law.partial_mean(1.0) ==
        doctest::Approx(mu - (mu + 1.0) * std::exp(-1.0 / mu)).epsilon(1e-13));

  const Cplx u(-0.4, 1.1);
  const Cplx oracle = simpson(
      [&](double x) { return std::exp(u * x) * std::exp(-x / mu) / mu; }, 0.0,
      60.0 * mu, 60000);
  CHECK(std::abs(law.transform(u) - oracle) < 1e-9);

  CHECK_THROWS_AS((void)law.transform(Cplx(1.0 / mu, 0.2)), DomainError);
  CHECK_THROWS_AS((void)law.transform(Cplx(2.0 / mu, 0.0)), DomainError);
  CHECK_NOTHROW((void)law.transform(Cplx(0.99 / mu, 5.0)));
}

TEST_CASE("half-normal scalar law against quadrature") {
  const double sg = 0.6;
  const ScalarLaw law = ScalarLaw::half_normal(sg);
  CHECK(law.mean() == doctest::Approx(sg * std::sqrt(2.0 / M_PI)).epsilon(1e-14));
  CHECK(law.cdf(0.9) == doctest::Approx(std::erf(0.9 / (sg * std::sqrt(2.0)))).epsilon(1e-13));
  CHECK(law.partial_mean(0.9) ==
        doctest::Approx(sg * std::sqrt(2.0 / M_PI) *
                        (1.0 - std::exp(-0.9 * 0.9 / (2.0 * sg * sg))))
            .epsilon(1e-13));

  const double norm = 2.0 / (sg * std::sqrt(2.0 * M_PI));
  for (Cplx u : {Cplx(-0.8, 0.9), Cplx(1.4, -2.0), Cplx(0.0, 3.0)}) {
    const Cplx oracle = simpson(
        [&](double x) {
          return std::exp(u * x) * norm * std::exp(-x * x / (2.0 * sg * sg));
        },
        0.0, 14.0 * sg, 70000);
    CAPTURE(u.real());
    CAPTURE(u.imag());
    CHECK(std::abs(law.transform(u) - oracle) < 1e-9);
  }
}

TEST_CASE("point mass distribution") {
  const Vec big = v2(1.2, -0.9);  // norm > 1
  const JumpDistribution d = JumpDistribution::dirac(big);
  const CVec u = cu2(Cplx(-0.5, 0.3), Cplx(0.0, -1.2));
  const Cplx expect = std::exp(u[0] * big[0] + u[1] * big[1]);
  CHECK(d.transform(u) == expect);  // same closed form, exact
  CHECK(d.mean() == big);
  CHECK(d.truncated_mean().isZero(0.0));

  const JumpDistribution inside = JumpDistribution::dirac(v2(0.3, 0.4));
  CHECK(inside.truncated_mean() == v2(0.3, 0.4));
  CHECK(inside.sample(RngStream{1, 2}, 0) == v2(0.3, 0.4));
}

TEST_CASE("exponential-coordinate distribution") {
  const double mu = 0.4;
  const JumpDistribution d = JumpDistribution::exp_coord(2, 0, mu);
  const CVec u = cu2(Cplx(-1.0, 0.7), Cplx(0.5, -0.2));
  CHECK(std::abs(d.transform(u) - 1.0 / (1.0 - u[0] * mu)) < 1e-15);
  CHECK(d.mean()[0] == doctest::Approx(mu));
  CHECK(d.mean()[1] == 0.0);
  CHECK(d.truncated_mean()[0] ==
        doctest::Approx(mu - (mu + 1.0) * std::exp(-1.0 / mu)).epsilon(1e-13));

  // sampled mean within 5 standard errors
  RngStream s{11, 3};
  const int n = 40000;
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    const Vec x = d.sample(s, (std::uint64_t)k * d.sample_stride());
    REQUIRE(x[0] >= 0.0);
    REQUIRE(x[1] == 0.0);
    acc += x[0];
  }
  CHECK(acc / n == doctest::Approx(mu).epsilon(5.0 / std::sqrt((double)n)));
}

TEST_CASE("product law: one random coordinate") {
  // (X, 0.2) with X exponential; the ball constraint couples the coordinates
  const double mu = 0.3, p2 = 0.2;
  const JumpDistribution d = JumpDistribution::product(
      {ScalarLaw::exponential(mu), ScalarLaw::dirac(p2)});
  const CVec u = cu2(Cplx(-0.6, 0.4), Cplx(0.3, 1.0));
  const Cplx expect = (1.0 / (1.0 - u[0] * mu)) * std::exp(u[1] * p2);
  CHECK(std::abs(d.transform(u) - expect) < 1e-15);

  const double c = std::sqrt(1.0 - p2 * p2);
  const ScalarLaw ex = ScalarLaw::exponential(mu);
  CHECK(d.truncated_mean()[0] == doctest::Approx(ex.partial_mean(c)).epsilon(1e-12));
  CHECK(d.truncated_mean()[1] == doctest::Approx(p2 * ex.cdf(c)).epsilon(1e-12));
}

TEST_CASE("product law: coupled truncation against 2d quadrature") {
  const double mu = 0.5, sg = 0.45;
  const JumpDistribution d = JumpDistribution::product(
      {ScalarLaw::exponential(mu), ScalarLaw::half_normal(sg)});

  // E[xi_t 1{|xi| <= 1}] by tensor Simpson over the quarter disk
  auto dens = [&](double x, double y) {
    const double fx = std::exp(-x / mu) / mu;
    const double fy = 2.0 / (sg * std::sqrt(2.0 * M_PI)) *
                      std::exp(-y * y / (2.0 * sg * sg));
    return fx * fy;
  };
  for (int t = 0; t < 2; ++t) {
    const int n = 1200;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double x = (double)i / n;
      const double wy = std::sqrt(std::max(0.0, 1.0 - x * x));
      double inner = 0.0;
      for (int j = 0; j <= n; ++j) {
        const double y = wy * j / n;
        const double w = (j == 0 || j == n) ? 1.0 : (j % 2 ? 4.0 : 2.0);
        inner += w * dens(x, y) * (t == 0 ? x : y);
      }
      inner *= wy / n / 3.0;
      const double wx = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      acc += wx * inner;
    }
    acc /= 3.0 * n;
    CAPTURE(t);
    CHECK(d.truncated_mean()[t] == doctest::Approx(acc).epsilon(2e-5));
  }
}

TEST_CASE("mixture law") {
  const JumpDistribution a = JumpDistribution::dirac(v2(0.3, 0.0));
  const JumpDistribution b = JumpDistribution::dirac(v2(2.0, 1.0));
  const JumpDistribution mix = JumpDistribution::mixture({0.3, 0.7}, {a, b});

  const CVec u = cu2(Cplx(-0.2, 0.5), Cplx(0.0, -0.4));
  CHECK(std::abs(mix.transform(u) - (0.3 * a.transform(u) + 0.7 * b.transform(u))) <
        1e-16);
  CHECK(mix.mean() == 0.3 * a.mean() + 0.7 * b.mean());
  // only the first component lies inside the unit ball
  CHECK(mix.truncated_mean() == 0.3 * v2(0.3, 0.0));

  RngStream s{77, 5};
  const int n = 30000;
  int hits_a = 0;
  for (int k = 0; k < n; ++k) {
    const Vec x = mix.sample(s, (std::uint64_t)k * mix.sample_stride());
    if (x[0] == 0.3) ++hits_a;
    else REQUIRE(x[0] == 2.0);
  }
  // 5 sigma band around the first weight
  CHECK((double)hits_a / n ==
        doctest::Approx(0.3).epsilon(5.0 * std::sqrt(0.3 * 0.7 / n) / 0.3));
}

TEST_CASE("lifting into a larger space") {
  const double mu = 0.4;
  const JumpDistribution base = JumpDistribution::exp_coord(2, 1, mu);
  const JumpDistribution lift = base.lifted(3, 1);
  CHECK(lift.dim() == 3);

  CVec u3(3);
  u3 << Cplx(0.4, 0.1), Cplx(-0.7, 0.2), Cplx(0.1, -0.9);
  const CVec proj = cu2(u3[1], u3[2]);
  CHECK(std::abs(lift.transform(u3) - base.transform(proj)) < 1e-15);

  CHECK(lift.mean()[0] == 0.0);
  CHECK(lift.mean()[1] == base.mean()[0]);
  CHECK(lift.mean()[2] == base.mean()[1]);
  // zero padding preserves the norm, so truncation carries over exactly
  CHECK(lift.truncated_mean()[2] == base.truncated_mean()[1]);

  const Vec x = lift.sample(RngStream{3, 9}, 0);
  CHECK(x[0] == 0.0);
  CHECK(x.size() == 3);
}

TEST_CASE("state-space support checks") {
  CHECK(JumpDistribution::dirac(v2(0.1, -5.0)).supported_in_state_space(1));
  CHECK_FALSE(JumpDistribution::dirac(v2(-0.1, 5.0)).supported_in_state_space(1));
  CHECK(JumpDistribution::dirac(v2(-0.1, 5.0)).supported_in_state_space(0));
  const JumpDistribution mix = JumpDistribution::mixture(
      {0.5, 0.5},
      {JumpDistribution::dirac(v2(0.1, 0.0)), JumpDistribution::dirac(v2(-0.1, 0.0))});
  CHECK_FALSE(mix.supported_in_state_space(1));
}

TEST_CASE("jump measure plumbing") {
  CHECK(JumpMeasureSpec::none().is_zero());
  CHECK_THROWS_AS(JumpMeasureSpec::of(-1.0, JumpDistribution::dirac(v2(1, 0))).check(2),
                  std::invalid_argument);
  JumpMeasureSpec jm = JumpMeasureSpec::of(2.0, JumpDistribution::dirac(v2(1, 0)));
  CHECK_NOTHROW(jm.check(2));
  CHECK_THROWS_AS(jm.check(3), std::invalid_argument);  // dimension mismatch
}

TEST_CASE("compensated transform integrand") {
  // point mass at (1, 0): the exponential factor is exact and h = xi
  const double lam = 3.0;
  const JumpMeasureSpec jm = JumpMeasureSpec::of(lam, JumpDistribution::dirac(v2(1, 0)));
  const Cplx iw(0.0, 1.7);
  const CVec u = cu2(iw, Cplx(0.0, 0.0));

  const Cplx plain = jump_integral_term(jm, u, {});
  CHECK(std::abs(plain - lam * (std::exp(iw) - 1.0)) < 1e-14);

  const Cplx comp0 = jump_integral_term(jm, u, {0});
  CHECK(std::abs(comp0 - lam * (std::exp(iw) - 1.0 - iw)) < 1e-14);

  // compensating only the second coordinate changes nothing (xi_2 = 0)
  const Cplx comp1 = jump_integral_term(jm, u, {1});
  CHECK(comp1 == plain);

  // zero measure contributes nothing
  CHECK(jump_integral_term(JumpMeasureSpec::none(), u, {0}) == Cplx(0.0, 0.0));
}

TEST_CASE("sampling is deterministic in (stream, counter)") {
  const JumpDistribution d = JumpDistribution::product(
      {ScalarLaw::exponential(0.5), ScalarLaw::half_normal(0.3)});
  RngStream s{123, 456};
  const Vec a = d.sample(s, 10);
  const Vec b = d.sample(s, 10);
  CHECK(a == b);
  CHECK(d.sample(s, 10 + d.sample_stride()) != a);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "affine/params.hpp"
#include "affine/types.hpp"
#include "affine/verify.hpp"

using namespace affine;

namespace {

AdmissibleParamSet cir() {
  AdmissibleParamSet p = AdmissibleParamSet::zero({1, 0});
  p.drivers[0].beta[0] = -0.5;
  p.drivers[0].alpha(0, 0) = 0.2;
  return p;
}

AdmissibleParamSet mixed() {
  AdmissibleParamSet p = AdmissibleParamSet::zero({1, 1});
  p.b << 0.1, 0.05;
  p.a << 0, 0, 0, 0.15;
  p.drivers[0].beta << -0.3, 0.1;
  p.drivers[0].alpha << 0.2, 0.05, 0.05, 0.3;
  Vec xi(2);
  xi << 0.2, -0.1;
  p.drivers[0].jumps = JumpMeasureSpec::of(0.5, JumpDistribution::dirac(xi));
  p.drivers[1].beta << 0.0, -0.25;
  p.m_jumps = JumpMeasureSpec::of(0.3, JumpDistribution::exp_coord(2, 0, 0.4));
  return p;
}

SimConfig fast_cfg() {
  SimConfig cfg;
  cfg.T = 0.5;
  cfg.mesh = 0x1p-7;
  cfg.level0 = 4;
  cfg.level_cap = 18;
  cfg.tau_tol = 1e-3;
  cfg.seed = 11;
  return cfg;
}

}  // namespace

TEST_CASE("binomial tail probabilities match hand values") {
  CHECK(binomial_tail_geq(5, 3, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(binomial_tail_geq(5, 0, 0.3) == 1.0);
  CHECK(binomial_tail_geq(3, 3, 0.25) ==
        doctest::Approx(0.015625).epsilon(1e-12));
  CHECK(binomial_tail_geq(4, 5, 0.9) == 0.0);

  CHECK(binomial_critical(100, 0.0027, 0.01) == 3);
  CHECK(binomial_critical(10, 0.5, 0.01) == 10);
}

TEST_CASE("mean dynamics are read off the transform derivatives") {
  const auto [B, c] = mean_dynamics(mixed());
  REQUIRE(B.rows() == 2);
  REQUIRE(B.cols() == 2);
  CHECK(B(0, 0) == doctest::Approx(-0.3).epsilon(1e-13));
  CHECK(B(0, 1) == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(B(1, 0) == doctest::Approx(0.1).epsilon(1e-13));
  CHECK(B(1, 1) == doctest::Approx(-0.25).epsilon(1e-13));
  CHECK(c[0] == doctest::Approx(0.22).epsilon(1e-13));
  CHECK(c[1] == doctest::Approx(0.05).epsilon(1e-13));
}

TEST_CASE("mean ODE solution agrees with closed forms") {
  SUBCASE("scalar affine drift") {
    AdmissibleParamSet p = cir();
    p.b = Vec::Constant(1, 0.3);
    const double t = 0.7, x = 2.0;
    const double exact =
        x * std::exp(-0.5 * t) - 0.3 / 0.5 * std::expm1(-0.5 * t);
    const Vec got = mean_ode_solution(p, Vec::Constant(1, x), t);
    CHECK(got[0] == doctest::Approx(exact).epsilon(1e-10));
  }

  SUBCASE("coupled system against the augmented exponential") {
    const auto [B, c] = mean_dynamics(mixed());
    Vec x(2);
    x << 0.7, -0.4;
    const double t = 0.9;
    Mat aug = Mat::Zero(3, 3);
    aug.topLeftCorner(2, 2) = B * t;
    aug.topRightCorner(2, 1) = c * t;
    const Mat E = aug.exp();
    const Vec exact = E.topLeftCorner(2, 2) * x + E.topRightCorner(2, 1);
    const Vec got = mean_ode_solution(mixed(), x, t);
    CHECK((got - exact).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("a process without dynamics is estimated exactly") {
  const AdmissibleParamSet p = AdmissibleParamSet::zero({1, 1});
  Vec x0(2);
  x0 << 0.8, -0.3;
  CVec u(2);
  u << Cplx(-0.5, 0.0), Cplx(0.0, 0.3);
  const std::vector<CVec> us{CVec::Zero(2), u};

  const auto est = mc_cf(p, x0, us, {0.4}, 8, fast_cfg());
  REQUIRE(est.size() == 2);
  CHECK(est[0].estimate == Cplx(1.0, 0.0));
  CHECK(est[0].std_error == 0.0);
  const Cplx exact = std::exp(pairing(x0, u));
  CHECK(std::abs(est[1].estimate - exact) <= 1e-14);
  CHECK(est[1].std_error == 0.0);
  CHECK(est[1].n == 8);
  CHECK(est[1].t == 0.4);
}

TEST_CASE("estimates are reproducible and tighten like root n") {
  const AdmissibleParamSet p = cir();
  const Vec x0 = Vec::Constant(1, 1.0);
  std::vector<CVec> us{CVec::Constant(1, Cplx(-1.0, 0.0))};

  const auto a = mc_cf(p, x0, us, {0.5}, 512, fast_cfg());
  const auto b = mc_cf(p, x0, us, {0.5}, 512, fast_cfg());
  REQUIRE(a.size() == 1);
  CHECK(a[0].estimate == b[0].estimate);
  CHECK(a[0].std_error == b[0].std_error);
  CHECK(a[0].std_error > 0.0);

  const auto wide = mc_cf(p, x0, us, {0.5}, 2048, fast_cfg());
  const double ratio = a[0].std_error / wide[0].std_error;
  CHECK(ratio > 1.6);
  CHECK(ratio < 2.6);
}

TEST_CASE("comparison report accepts the true law and rejects a wrong one") {
  const AdmissibleParamSet p = cir();
  const Vec x0 = Vec::Constant(1, 1.0);
  std::vector<CVec> us;
  for (double re : {-0.5, -1.0, -2.0})
    for (double im : {0.0, 0.8})
      us.push_back(CVec::Constant(1, Cplx(re, im)));

  const auto est = mc_cf(p, x0, us, {0.3, 0.6}, 2000, fast_cfg());
  REQUIRE(est.size() == us.size() * 2);

  const CompareReport ok = compare_cf(est, p, x0);
  CHECK(ok.pass);
  CHECK(ok.z_threshold == 3.0);
  CHECK(ok.p0 == doctest::Approx(0.0026998).epsilon(1e-3));
  CHECK((int)ok.points.size() == (int)est.size());
  CHECK(ok.critical >= 1);
  CHECK_FALSE(ok.to_string().empty());

  AdmissibleParamSet wrong = cir();
  wrong.drivers[0].beta[0] = -0.9;
  const CompareReport bad = compare_cf(est, wrong, x0);
  CHECK_FALSE(bad.pass);
  CHECK(bad.n_exceed >= bad.critical);
}

TEST_CASE("moment check accepts the simulated means") {
  const AdmissibleParamSet p = cir();
  const Vec x0 = Vec::Constant(1, 1.0);
  const MomentReport rep = moment_check(p, x0, {0.25, 0.5}, 1500, fast_cfg());
  CHECK(rep.pass);
  CHECK(rep.n_flagged == 0);
  REQUIRE(rep.entries.size() == 2);
  for (const auto& e : rep.entries) {
    CHECK(e.se > 0.0);
    CHECK(e.predicted ==
          doctest::Approx(std::exp(-0.5 * e.t)).epsilon(1e-10));
    CHECK(std::abs(e.z) <= 3.0);
  }
  CHECK_FALSE(rep.to_string().empty());
}

TEST_CASE("a capped level budget aborts the whole run") {
  AdmissibleParamSet p = AdmissibleParamSet::zero({2, 0});
  p.drivers[0].beta << -0.2, 0.1;
  Vec xi(2);
  xi << 0.0, 0.8;
  p.drivers[0].jumps = JumpMeasureSpec::of(3.0, JumpDistribution::dirac(xi));
  p.drivers[1].beta << 0.0, -0.3;
  REQUIRE(validate(p).ok());

  Vec x0(2);
  x0 << 1.0, 1.0;
  SimConfig cfg = fast_cfg();
  cfg.level0 = 1;
  cfg.level_cap = 2;  // far below what tau_tol needs
  cfg.tau_tol = 1e-6;
  std::vector<CVec> us{CVec::Constant(2, Cplx(-0.5, 0.0))};
  CHECK_THROWS_AS(mc_cf(p, x0, us, {0.4}, 8, cfg), SimulationError);
}

TEST_CASE("default transform grid covers the documented pattern") {
  const auto grid = default_u_grid(StateDim{1, 1});
  CHECK(grid.size() == 15);
  for (const CVec& u : grid) CHECK(in_frequency_set(StateDim{1, 1}, u));
  auto contains = [&](Cplx a, Cplx b) {
    return std::any_of(grid.begin(), grid.end(), [&](const CVec& u) {
      return std::abs(u[0] - a) + std::abs(u[1] - b) < 1e-12;
    });
  };
  CHECK(contains({-1.0, 0.0}, {0.0, 1.0}));
  CHECK(contains({-0.5, 0.0}, {0.0, -2.0}));
  CHECK(contains({-2.0, 0.0}, {0.0, 0.0}));
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (std::size_t j = i + 1; j < grid.size(); ++j)
      CHECK((grid[i] - grid[j]).cwiseAbs().maxCoeff() > 1e-12);

  CHECK(default_u_grid(StateDim{2, 0}).size() == 9);
  CHECK(default_u_grid(StateDim{3, 2}, 10).size() == 10);
}

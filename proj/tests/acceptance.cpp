// End-to-end acceptance runs: nine independent checks, one verdict line each.
// Exits nonzero if any check fails.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "affine/cli.hpp"
#include "affine/config.hpp"
#include "affine/params.hpp"
#include "affine/path.hpp"
#include "affine/reduction.hpp"
#include "affine/riccati.hpp"
#include "affine/rng.hpp"
#include "affine/timechange.hpp"
#include "affine/types.hpp"
#include "affine/verify.hpp"

using namespace affine;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void verdict(int index, const std::string& label, bool ok,
             const std::string& detail) {
  std::printf("[%s] %d. %s (%s)\n", ok ? "PASS" : "FAIL", index, label.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

AdmissibleParamSet cir() {
  AdmissibleParamSet p = AdmissibleParamSet::zero({1, 0});
  p.drivers[0].beta[0] = -0.5;
  p.drivers[0].alpha(0, 0) = 0.2;
  return p;
}

AdmissibleParamSet jump_cir() {
  AdmissibleParamSet p = cir();
  p.drivers[0].jumps =
      JumpMeasureSpec::of(1.0, JumpDistribution::exp_coord(1, 0, 0.3));
  return p;
}

// Volatility-driven two-coordinate set: the free coordinate has no internal
// drift, so its transform coordinate must stay frozen at its start value.
AdmissibleParamSet heston_like() {
  AdmissibleParamSet p = AdmissibleParamSet::zero({1, 1});
  p.drivers[0].beta << -0.3, 0.1;
  p.drivers[0].alpha << 0.2, 0.05, 0.05, 0.3;
  Vec xi(2);
  xi << 0.2, -0.1;
  p.drivers[0].jumps = JumpMeasureSpec::of(0.5, JumpDistribution::dirac(xi));
  return p;
}

AdmissibleParamSet absorbing() {
  AdmissibleParamSet p = AdmissibleParamSet::zero({1, 0});
  p.drivers[0].beta[0] = -4.0;
  p.drivers[0].jumps =
      JumpMeasureSpec::of(1.0, JumpDistribution::dirac(Vec::Constant(1, 0.3)));
  return p;
}

Cplx cir_psi(double beta, double alpha, Cplx u, double t) {
  const double e = std::exp(beta * t);
  return beta * u * e / (beta + 0.5 * alpha * u * (1.0 - e));
}

// 1. A pure-drift positive coordinate grows exactly exponentially.
void criterion_exponential_growth() {
  AdmissibleParamSet p = AdmissibleParamSet::zero({1, 0});
  p.drivers[0].beta[0] = 0.5;

  SimConfig cfg;
  cfg.T = 2.0;
  cfg.seed = 1;
  const Simulator sim(p, Vec::Constant(1, 1.0), cfg);
  const ProcessPath path = sim.run(0);

  double sup = 0.0;
  for (std::size_t j = 0; j < path.grid.size(); ++j)
    sup = std::max(sup,
                   std::abs(path.X(0, j) - std::exp(0.5 * path.grid[j])));
  verdict(1, "pure drift grows exponentially", sup <= 1e-3,
          "sup error " + fmt(sup));
}

// 2. Square-root diffusion transform against its closed form.
void criterion_cir_transform() {
  const AdmissibleParamSet p = cir();
  const Vec x0 = Vec::Constant(1, 1.0);
  std::vector<CVec> us;
  for (double re : {-2.0, -1.0, -0.5}) us.push_back(CVec::Constant(1, re));
  const std::vector<double> ts{0.25, 0.5, 1.0};

  SimConfig cfg;
  cfg.T = 1.0;
  cfg.seed = 42;
  const auto est = mc_cf(p, x0, us, ts, 100000, cfg);

  double max_z = 0.0, max_se = 0.0;
  bool ok = est.size() == 9;
  for (const CFEstimate& e : est) {
    const Cplx exact = std::exp(cir_psi(-0.5, 0.2, e.u0[0], e.t) * x0[0]);
    const double z = std::abs(e.estimate - exact) / e.std_error;
    max_z = std::max(max_z, z);
    max_se = std::max(max_se, e.std_error);
    ok = ok && z <= 3.0 && e.std_error <= 5e-3;
  }
  verdict(2, "square-root diffusion matches its closed-form transform", ok,
          "max z " + fmt(max_z) + ", max se " + fmt(max_se));
}

// 3. Jump diffusion against the numeric transform with the binomial gate.
void criterion_jump_cir() {
  const AdmissibleParamSet p = jump_cir();
  const Vec x0 = Vec::Constant(1, 1.0);
  const std::vector<CVec> us = default_u_grid(p.dim);
  const std::vector<double> ts{0.25, 0.5, 1.0};

  SimConfig cfg;
  cfg.T = 1.0;
  cfg.seed = 43;
  const auto est = mc_cf(p, x0, us, ts, 100000, cfg);
  const CompareReport rep = compare_cf(est, p, x0);
  verdict(3, "jump diffusion passes the transform comparison", rep.pass,
          std::to_string(rep.n_exceed) + " of " +
              std::to_string(rep.points.size()) + " beyond z=3, critical " +
              std::to_string(rep.critical));
}

// 4. Two-coordinate set: transform comparison plus an exactly frozen
// free-block transform coordinate.
void criterion_two_block() {
  const AdmissibleParamSet p = heston_like();
  Vec x0(2);
  x0 << 1.0, -0.3;
  const std::vector<CVec> us = default_u_grid(p.dim);
  const std::vector<double> ts{0.25, 0.5, 1.0};

  SimConfig cfg;
  cfg.T = 1.0;
  cfg.seed = 44;
  const auto est = mc_cf(p, x0, us, ts, 100000, cfg);
  const CompareReport rep = compare_cf(est, p, x0);

  double frozen_dev = 0.0;
  for (const CVec& u : us) {
    const RiccatiSolution sol = solve_riccati(p, u, 1.0, {}, ts);
    for (Eigen::Index j = 0; j < sol.psi.cols(); ++j)
      frozen_dev = std::max(frozen_dev, std::abs(sol.psi(1, j) - u[1]));
  }
  const bool ok = rep.pass && frozen_dev <= 1e-10;
  verdict(4, "volatility-driven pair passes and keeps its free transform", ok,
          std::to_string(rep.n_exceed) + " of " +
              std::to_string(rep.points.size()) + " beyond z=3; freeze dev " +
              fmt(frozen_dev));
}

namespace sandwich {

struct Instance {
  std::vector<SplitPath> splits;
  Vec x;
};

// Cross-jump-only pair of drivers: every jump lands on the other coordinate
// at a position halfway between the dyadic nodes of every level in play.
Instance make(int k) {
  RngStream s{901, (std::uint64_t)k};
  std::uint64_t ctr = 0;
  auto uni = [&] { return rng_uniform(s, ctr++); };

  const double mesh = 0.5, horizon = 8.0;
  const int cols = (int)(horizon / mesh) + 1;
  std::vector<std::vector<JumpEvent>> jumps(2);
  const int n_jumps = 1 + (int)(uni() * 5.0);
  std::vector<std::vector<double>> used(2);
  for (int q = 0; q < n_jumps; ++q) {
    const int drv = uni() < 0.5 ? 0 : 1;
    // odd multiple of 2^-12 below 0.6, never on a coarser dyadic node
    const double pos = (2.0 * std::floor(uni() * 1228.0) + 1.0) * 0x1p-12;
    if (std::find(used[drv].begin(), used[drv].end(), pos) != used[drv].end())
      continue;
    used[drv].push_back(pos);
    JumpEvent ev;
    ev.s = pos;
    ev.size = Vec::Zero(2);
    ev.size[1 - drv] = 0.1 + 0.4 * uni();
    jumps[drv].push_back(ev);
  }

  Instance inst;
  for (int drv = 0; drv < 2; ++drv) {
    std::sort(jumps[drv].begin(), jumps[drv].end(),
              [](const JumpEvent& a, const JumpEvent& b) { return a.s < b.s; });
    CadlagPath p =
        CadlagPath::from_data(mesh, Mat::Zero(2, cols), std::move(jumps[drv]));
    inst.splits.emplace_back(p, drv, StateDim{2, 0});
  }
  inst.x = Vec(2);
  inst.x << 0.8 + 0.7 * uni(), 0.8 + 0.7 * uni();
  return inst;
}

// Forward Euler at a fixed mesh, interpolated onto the record times.
Mat euler(const Instance& inst, double T, const std::vector<double>& rec) {
  const double h = 1e-5;
  Vec tau = Vec::Zero(2);
  Mat out(2, rec.size());
  std::size_t next = 0;
  double t = 0.0;
  auto field = [&](const Vec& v) {
    Vec f = inst.x;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        f[i] += inst.splits[j].notilde().value1(i, v[j]);
    return f;
  };
  while (next < rec.size()) {
    const Vec f = field(tau);
    while (next < rec.size() && rec[next] <= t + h + 1e-15) {
      out.col(next) = tau + (rec[next] - t) * f;
      ++next;
    }
    tau += h * f;
    t += h;
  }
  return out;
}

Mat at_times(const TimeChangeSolution& sol, const std::vector<double>& rec) {
  Mat out(2, rec.size());
  for (std::size_t j = 0; j < rec.size(); ++j) {
    const auto it = std::lower_bound(sol.grid.begin(), sol.grid.end(), rec[j]);
    if (it == sol.grid.end() || *it != rec[j])
      throw SimulationError("record time missing from the solve grid");
    out.col(j) = sol.tau.col(it - sol.grid.begin());
  }
  return out;
}

}  // namespace sandwich

// 5. Dyadic minorant/majorant sandwich around an independent Euler solve,
// monotone in the level, across 50 random cross-jump instances.
void criterion_sandwich() {
  const double T = 1.0, slack = 1e-9;
  std::vector<double> rec(513);
  for (int j = 0; j <= 512; ++j) rec[j] = T * j / 512.0;
  PasteSettings st;
  st.extra_times = rec;

  double worst = 0.0;
  long checked = 0;
  for (int k = 0; k < 50; ++k) {
    const sandwich::Instance inst = sandwich::make(k);
    const Mat ref = sandwich::euler(inst, T, rec);

    std::vector<Mat> up, dn;
    for (int M = 4; M <= 11; ++M) {
      up.push_back(sandwich::at_times(
          solve_pasted(inst.splits, inst.x, M, true, T, st), rec));
      dn.push_back(sandwich::at_times(
          solve_pasted(inst.splits, inst.x, M, false, T, st), rec));
    }
    for (std::size_t a = 0; a + 1 < up.size(); ++a) {
      worst = std::max(worst, (up[a] - up[a + 1]).maxCoeff());
      worst = std::max(worst, (up[a + 1] - ref).maxCoeff());
      worst = std::max(worst, (ref - dn[a + 1]).maxCoeff());
      worst = std::max(worst, (dn[a + 1] - dn[a]).maxCoeff());
      checked += 4 * (long)ref.size();
    }
  }
  verdict(5, "dyadic sandwich brackets the Euler oracle at every level",
          worst <= slack,
          "worst violation " + fmt(worst) + " over " +
              std::to_string(checked) + " comparisons");
}

// 6. A dominant downward drift absorbs the coordinate; the time change and
// the state stay frozen afterwards in every sample.
void criterion_absorption() {
  const AdmissibleParamSet p = absorbing();
  const LevyTriplet& tr = p.drivers[0];
  const double T = 20.0, mesh = 0x1p-10;
  const Vec x0 = Vec::Constant(1, 1.0);

  long absorbed = 0, frozen = 0;
  const long n = 1000;
  for (long k = 0; k < n; ++k) {
    CadlagPath z = generate_path(tr, 8.0, mesh, RngStream{777, (std::uint64_t)k});
    TimeChangeSolution tc;
    for (;;) {
      try {
        std::vector<SplitPath> splits;
        splits.emplace_back(z, 0, StateDim{1, 0});
        tc = solve_converged(splits, x0, 1e-4, 6, 22, T, PasteSettings{});
        break;
      } catch (const NeedExtension& e) {
        z = extend_path(z, std::max(2.0 * z.horizon(), 1.25 * e.required));
      }
    }
    if (!std::isfinite(tc.absorbed_at[0])) continue;
    ++absorbed;

    const ProcessPath pp = assemble({z}, tc, x0, StateDim{1, 0});
    bool flat = true;
    double tau_ref = std::numeric_limits<double>::quiet_NaN();
    double x_ref = 0.0;
    for (std::size_t j = 0; j < tc.grid.size(); ++j) {
      if (tc.grid[j] < tc.absorbed_at[0]) continue;
      if (std::isnan(tau_ref)) {
        tau_ref = tc.tau(0, j);
        x_ref = pp.X(0, j);
        continue;
      }
      flat = flat && tc.tau(0, j) == tau_ref && pp.X(0, j) == x_ref;
    }
    if (flat) ++frozen;
  }
  verdict(6, "driven-to-zero coordinates freeze for good",
          absorbed == n && frozen == n,
          std::to_string(absorbed) + "/" + std::to_string(n) + " absorbed, " +
              std::to_string(frozen) + " frozen");
}

// 7. The transform flow composes: psi(t+s, u) = psi(s, psi(t, u)).
void criterion_flow_property() {
  const std::vector<AdmissibleParamSet> sets{
      [] {
        AdmissibleParamSet p = AdmissibleParamSet::zero({1, 0});
        p.drivers[0].beta[0] = 0.5;
        return p;
      }(),
      cir(), jump_cir(), heston_like(), absorbing()};

  double worst = 0.0;
  bool ok = true;
  for (std::size_t si = 0; si < sets.size(); ++si) {
    const AdmissibleParamSet& p = sets[si];
    for (int k = 0; k < 100; ++k) {
      RngStream s{555 + (std::uint64_t)si, (std::uint64_t)k};
      const double t = 0.05 + 0.6 * rng_uniform(s, 0);
      const double dt = 0.05 + 0.6 * rng_uniform(s, 1);
      CVec u(p.d());
      for (int c = 0; c < p.dim.m; ++c)
        u[c] = Cplx(-2.0 * rng_uniform(s, 10 + 2 * c),
                    2.0 * rng_uniform(s, 11 + 2 * c) - 1.0);
      for (int c = p.dim.m; c < p.d(); ++c)
        u[c] = Cplx(0.0, 4.0 * rng_uniform(s, 10 + 2 * c) - 2.0);

      const RiccatiSolution a = solve_riccati(p, u, t);
      const RiccatiSolution b =
          solve_riccati(p, a.psi.col(a.psi.cols() - 1), dt);
      const RiccatiSolution c = solve_riccati(p, u, t + dt);
      const CVec via = b.psi.col(b.psi.cols() - 1);
      const CVec direct = c.psi.col(c.psi.cols() - 1);
      for (int q = 0; q < p.d(); ++q) {
        const double rel =
            std::abs(via[q] - direct[q]) / (1.0 + std::abs(direct[q]));
        worst = std::max(worst, rel);
        ok = ok && rel <= 1e-7;
      }
    }
  }
  verdict(7, "transform flow composes across restarts", ok,
          "worst relative gap " + fmt(worst) + ", budget 1e-07");
}

// 8. Frame transport round-trips on simulated paths, and the augmented
// set's first transform derivative reproduces the constant block.
void criterion_reduction_roundtrip() {
  AdmissibleParamSet drifted = heston_like();
  drifted.drivers[1].beta << 0.0, -0.25;
  const ReductionPlan plan = reduce_for_simulation(drifted);

  SimConfig cfg;
  cfg.T = 1.0;
  cfg.mesh = 0x1p-9;
  cfg.tau_tol = 1e-3;
  cfg.seed = 8;
  Vec x0(2);
  x0 << 1.0, -0.3;
  const Simulator sim(plan.reduced, plan.embed_x(x0), cfg);

  double sup = 0.0;
  for (int k = 0; k < 10; ++k) {
    const ProcessPath original = invert_frames(sim.run((std::uint64_t)k), plan);
    const ProcessPath there = forward_frames(original, plan.frame);
    ReductionPlan frames_only;
    frames_only.original = drifted;
    frames_only.reduced = plan.reduced;
    frames_only.added_aux = false;
    frames_only.frame = plan.frame;
    const ProcessPath back = invert_frames(there, frames_only);
    sup = std::max(sup, (back.X - original.X).cwiseAbs().maxCoeff());
  }

  AdmissibleParamSet constant = heston_like();
  constant.b << 0.1, 0.05;
  constant.a(1, 1) = 0.15;
  constant.m_jumps =
      JumpMeasureSpec::of(0.3, JumpDistribution::exp_coord(2, 0, 0.4));
  const AdmissibleParamSet lifted = augment(constant);
  double dev = 0.0;
  for (int k = 0; k < 100; ++k) {
    RngStream s{31, (std::uint64_t)k};
    CVec u(2);
    u[0] = Cplx(-2.0 * rng_uniform(s, 0), 2.0 * rng_uniform(s, 1) - 1.0);
    u[1] = Cplx(0.0, 4.0 * rng_uniform(s, 2) - 2.0);
    CVec uhat(3);
    uhat << Cplx(-rng_uniform(s, 3), rng_uniform(s, 4)), u[0], u[1];
    dev = std::max(dev, std::abs(eval_R(lifted, uhat)[0] - eval_F(constant, u)));
  }

  verdict(8, "reduction round-trips paths and transform derivatives",
          sup <= 1e-4 && dev <= 1e-12,
          "path sup " + fmt(sup) + ", derivative dev " + fmt(dev));
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 9. Repeated command line invocations reproduce their artifacts bytewise.
void criterion_cli_determinism() {
  const fs::path dir = fs::temp_directory_path() / "affine_acceptance";
  fs::create_directories(dir);
  const std::string cfg = (dir / "jump_cir.cfg").string();
  {
    std::ofstream out(cfg, std::ios::binary | std::ios::trunc);
    out << params_to_config_text(jump_cir());
  }

  auto invoke = [](const std::vector<std::string>& args) {
    std::vector<std::string> owned{"affine"};
    owned.insert(owned.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : owned) argv.push_back(a.c_str());
    return run((int)argv.size(), argv.data());
  };

  const std::string s1 = (dir / "sim1.txt").string();
  const std::string s2 = (dir / "sim2.txt").string();
  const std::vector<std::string> sim_args{
      "simulate", "--params", cfg,   "--x0",      "1",     "--T",
      "0.5",      "--mesh",   "0.00390625", "--level0",  "5",     "--level-cap",
      "18",       "--tau-tol", "0.001", "--samples", "3",     "--seed",
      "11"};
  auto with_out = [&](std::vector<std::string> a, const std::string& out) {
    a.push_back("--out");
    a.push_back(out);
    return a;
  };
  const int rs1 = invoke(with_out(sim_args, s1));
  const int rs2 = invoke(with_out(sim_args, s2));

  const std::string v1 = (dir / "ver1.txt").string();
  const std::string v2 = (dir / "ver2.txt").string();
  const std::vector<std::string> ver_args{
      "verify",   "--params", cfg,   "--x0",      "1",     "--T",
      "0.4",      "--mesh",   "0.00390625", "--level0",  "5",     "--level-cap",
      "18",       "--tau-tol", "0.001", "--samples", "400",   "--seed",
      "12"};
  const int rv1 = invoke(with_out(ver_args, v1));
  const int rv2 = invoke(with_out(ver_args, v2));

  const std::string sim_a = slurp(s1), sim_b = slurp(s2);
  const std::string ver_a = slurp(v1), ver_b = slurp(v2);
  const bool ok = rs1 == 0 && rs2 == 0 && rv1 == 0 && rv2 == 0 &&
                  !sim_a.empty() && sim_a == sim_b && !ver_a.empty() &&
                  ver_a == ver_b;
  verdict(9, "repeated invocations are byte-identical", ok,
          "simulate " + std::to_string(sim_a.size()) + "B, verify " +
              std::to_string(ver_a.size()) + "B");
}

}  // namespace

int main() {
  criterion_exponential_growth();
  criterion_cir_transform();
  criterion_jump_cir();
  criterion_two_block();
  criterion_sandwich();
  criterion_absorption();
  criterion_flow_property();
  criterion_reduction_roundtrip();
  criterion_cli_determinism();

  if (g_failures == 0) {
    std::printf("all 9 checks passed\n");
    return 0;
  }
  std::printf("%d check(s) failed\n", g_failures);
  return 1;
}

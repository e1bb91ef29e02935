#include "affine/timechange.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace affine {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kFieldFloor = 1e-250;

// One coordinate of the time change, advanced exactly against its own
// piecewise linear profile.  The field is x_eff + g0(tau) where x_eff grows
// by the consumed staircase bumps of the other drivers.
class DiagonalCursor {
 public:
  DiagonalCursor(const ScalarProfile* g0, double x, double t0, double tau0,
                 int driver)
      : g0_(g0), x_eff_(x), t_(t0), tau_(tau0), driver_(driver) {
    seg_ = g0_->segment_of(tau_);
    if (field_here() <= kFieldFloor) absorb(t_);
  }

  double tau() const { return tau_; }
  double t() const { return t_; }
  bool absorbed() const { return absorbed_; }
  double absorbed_at() const { return absorbed_ ? absorbed_at_ : kNaN; }

  void add_bump(double delta) {
    x_eff_ += delta;
    if (absorbed_ && field_here() > kFieldFloor) absorbed_ = false;
  }

  void snap_to(double r) {
    tau_ = r;
    seg_ = g0_->segment_of(r);
  }

  // Moves time forward by dt, sweeping profile segments with the exact
  // exponential arc on each.  The segment exit time is computed before any
  // expm1 so the in-segment update can never overflow.
  void advance(double dt) {
    const auto& knot = g0_->knot;
    const auto& slope = g0_->slope;
    const int nseg = (int)knot.size() - 1;
    while (dt > 0 && !absorbed_) {
      if (seg_ >= nseg) {
        if (field_here() <= kFieldFloor) {
          absorb(t_);
          break;
        }
        throw NeedExtension{driver_, g0_->horizon + field_here() * dt};
      }
      const double f0 = field_here();
      if (f0 <= kFieldFloor) {
        absorb(t_);
        break;
      }
      const double c = slope[seg_];
      const double dist = knot[seg_ + 1] - tau_;
      double t_exit;
      if (c == 0.0) {
        t_exit = dist / f0;
      } else {
        const double arg = c * dist / f0;
        t_exit = arg <= -1.0 ? kInf : std::log1p(arg) / c;
      }
      if (t_exit <= dt) {
        tau_ = knot[seg_ + 1];
        seg_ += 1;
        t_ += t_exit;
        dt -= t_exit;
        continue;
      }
      double tau_new;
      if (c == 0.0) {
        tau_new = tau_ + f0 * dt;
      } else {
        const double e = std::expm1(c * dt);
        if (e == -1.0) {
          // the exponential decay ran out of representable range; the field
          // zero at the segment asymptote is where tau effectively stops
          tau_ = tau_ - f0 / c;
          t_ += dt;
          absorb(t_);
          return;
        }
        tau_new = tau_ + (f0 / c) * e;
      }
      if (tau_new == tau_) {
        t_ += dt;
        // No representable progress over a full-length step means tau is
        // pinned against the field's zero for good.  A dt at roundoff scale
        // is different: it is the remainder of a split step (the per-segment
        // exit times of a paste target do not sum exactly), and progress
        // resumes on the next real step.
        constexpr double eps = std::numeric_limits<double>::epsilon();
        if (dt > 64 * eps * (t_ + 1.0)) absorb(t_);
        return;
      }
      tau_ = tau_new;
      t_ += dt;
      return;
    }
    if (absorbed_) t_ += dt;
  }

  // Time needed for tau to reach r, +inf when absorbed, unreachable, or
  // past the budget.  Does not modify the cursor.
  double time_to_reach(double r, double budget) const {
    if (r <= tau_) return 0.0;
    if (absorbed_) return kInf;
    const auto& knot = g0_->knot;
    const auto& slope = g0_->slope;
    const int nseg = (int)knot.size() - 1;
    double cur = tau_;
    double acc = 0.0;
    for (int s = seg_; s < nseg; ++s) {
      const double f0 = x_eff_ + g0_->right[s] + slope[s] * (cur - knot[s]);
      if (f0 <= kFieldFloor) return kInf;
      const double target = std::min(r, knot[s + 1]);
      const double dist = target - cur;
      double dt;
      if (slope[s] == 0.0) {
        dt = dist / f0;
      } else {
        const double arg = slope[s] * dist / f0;
        if (arg <= -1.0) return kInf;
        dt = std::log1p(arg) / slope[s];
      }
      acc += dt;
      if (!(acc <= budget)) return kInf;
      if (target == r) return acc;
      cur = knot[s + 1];
    }
    return kInf;  // r beyond the profile; callers keep events inside it
  }

 private:
  double field_here() const {
    if (seg_ >= (int)g0_->knot.size() - 1) return x_eff_ + g0_->right.back();
    return x_eff_ + g0_->right[seg_] + g0_->slope[seg_] * (tau_ - g0_->knot[seg_]);
  }

  void absorb(double at) {
    if (!absorbed_) {
      absorbed_ = true;
      absorbed_at_ = at;
    }
  }

  const ScalarProfile* g0_;
  double x_eff_;
  double t_;
  double tau_;
  int driver_;
  int seg_ = 0;
  bool absorbed_ = false;
  double absorbed_at_ = 0.0;
};

std::vector<double> record_grid(double T, int nodes,
                                const std::vector<double>& extra) {
  std::vector<double> out;
  out.reserve((std::size_t)nodes + 1 + extra.size());
  for (int k = 0; k <= nodes; ++k)
    out.push_back(k == nodes ? T : T * (double)k / (double)nodes);
  for (double e : extra)
    if (e >= 0.0 && e <= T) out.push_back(e);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

DiagonalSolution solve_diagonal(const ScalarProfile& g0, double x, double t0,
                                double tau0, double T,
                                const std::vector<double>& record_times) {
  DiagonalCursor c(&g0, x, t0, tau0, /*driver=*/0);
  DiagonalSolution sol;
  std::vector<double> times = record_times;
  std::sort(times.begin(), times.end());
  for (double rt : times) {
    if (rt < t0 || rt > T) continue;
    c.advance(rt - c.t());
    sol.t.push_back(rt);
    sol.tau.push_back(c.tau());
  }
  if (times.empty() || times.back() < T) {
    c.advance(T - c.t());
    sol.t.push_back(T);
    sol.tau.push_back(c.tau());
  }
  sol.absorbed_at = c.absorbed_at();
  return sol;
}

TimeChangeSolution solve_pasted(const std::vector<SplitPath>& splits,
                                const Vec& x, int level, bool up, double T,
                                const PasteSettings& settings) {
  const int m = (int)splits.size();
  if ((int)x.size() != m)
    throw std::invalid_argument("one initial value per split driver required");
  if (!(T > 0)) throw std::invalid_argument("horizon T must be positive");

  std::vector<DyadicApproximant> approx;
  std::vector<DyadicApproximant::Cursor> ev;
  std::vector<DiagonalCursor> cur;
  approx.reserve(m);
  ev.reserve(m);
  cur.reserve(m);
  for (int i = 0; i < m; ++i) {
    approx.emplace_back(splits[i], level, up);
    cur.emplace_back(&splits[i].tilde_profile(), x[i], 0.0, 0.0, i);
  }
  for (int i = 0; i < m; ++i) ev.push_back(approx[i].cursor());

  const std::vector<double> rec = record_grid(T, settings.output_nodes,
                                              settings.extra_times);

  TimeChangeSolution sol;
  sol.level = level;
  sol.paste_times.clear();

  std::vector<double> times;
  std::vector<Vec> taus;
  times.reserve(rec.size());
  auto record = [&](double t) {
    Vec col(m);
    for (int i = 0; i < m; ++i) col[i] = cur[i].tau();
    if (!times.empty() && times.back() == t) {
      taus.back() = col;
    } else {
      times.push_back(t);
      taus.push_back(col);
    }
  };

  // Consumes every staircase change already reached; each bump feeds the
  // positive-block field of all coordinates exactly once.
  auto consume_due = [&]() {
    bool any = false;
    for (int i = 0; i < m; ++i) {
      while (ev[i].next_time <= cur[i].tau()) {
        cur[i].snap_to(ev[i].next_time);
        const Vec inc = ev[i].increment;
        ev[i].pop();
        for (int k = 0; k < m; ++k)
          if (inc[k] != 0.0) cur[k].add_bump(inc[k]);
        any = true;
      }
    }
    return any;
  };

  double t = 0.0;
  consume_due();  // anticipating staircases change at zero already
  record(0.0);

  std::size_t ri = (!rec.empty() && rec.front() == 0.0) ? 1 : 0;
  while (ri < rec.size()) {
    const double next_rec = rec[ri];
    double budget = next_rec - t;
    double tstar = kInf;
    int argmin = -1;
    for (int i = 0; i < m; ++i) {
      const double ti = cur[i].time_to_reach(ev[i].next_time, budget);
      if (ti < tstar) {
        tstar = ti;
        argmin = i;
        budget = std::min(budget, ti);
      }
    }
    if (tstar <= next_rec - t) {
      for (int i = 0; i < m; ++i) cur[i].advance(tstar);
      t += tstar;
      if (++sol.pastes > settings.paste_cap)
        throw SimulationError("paste rounds exceeded the cap of " +
                              std::to_string(settings.paste_cap));
      const bool any = consume_due();
      if (!any && argmin >= 0) {
        // the target was reached up to roundoff; force the exchange
        cur[argmin].snap_to(ev[argmin].next_time);
        consume_due();
      }
      sol.paste_times.push_back(t);
      record(t);
    } else {
      for (int i = 0; i < m; ++i) cur[i].advance(next_rec - t);
      t = next_rec;
      consume_due();
      record(t);
      ++ri;
    }
  }

  sol.grid = std::move(times);
  sol.tau.resize(m, (Eigen::Index)sol.grid.size());
  for (std::size_t g = 0; g < sol.grid.size(); ++g) sol.tau.col((Eigen::Index)g) = taus[g];
  sol.absorbed_at.resize(m);
  for (int i = 0; i < m; ++i) sol.absorbed_at[i] = cur[i].absorbed_at();
  return sol;
}

namespace {

// tau values of a solution at the deterministic record times, which are
// present in its grid by construction.
Mat at_common(const TimeChangeSolution& s, const std::vector<double>& common) {
  Mat out((Eigen::Index)s.tau.rows(), (Eigen::Index)common.size());
  for (std::size_t k = 0; k < common.size(); ++k) {
    const auto it = std::lower_bound(s.grid.begin(), s.grid.end(), common[k]);
    if (it == s.grid.end() || *it != common[k])
      throw SimulationError("record time missing from a pasted solution grid");
    out.col((Eigen::Index)k) = s.tau.col((Eigen::Index)(it - s.grid.begin()));
  }
  return out;
}

double slack_for(double v) { return std::max(1e-12, 1e-12 * std::abs(v)); }

}  // namespace

TimeChangeSolution solve_converged(const std::vector<SplitPath>& splits,
                                   const Vec& x, double tol, int level0,
                                   int level_cap, double T,
                                   const PasteSettings& settings) {
  const std::vector<double> common = record_grid(T, settings.output_nodes,
                                                 settings.extra_times);
  Mat prev_up, prev_down;
  double gap = kInf;
  for (int M = level0; M <= level_cap; ++M) {
    TimeChangeSolution upper = solve_pasted(splits, x, M, false, T, settings);
    TimeChangeSolution lower = solve_pasted(splits, x, M, true, T, settings);
    const Mat lo = at_common(lower, common);
    const Mat hi = at_common(upper, common);

    gap = 0.0;
    for (Eigen::Index j = 0; j < lo.cols(); ++j)
      for (Eigen::Index i = 0; i < lo.rows(); ++i) {
        const double d = hi(i, j) - lo(i, j);
        if (d < -slack_for(hi(i, j)))
          throw SimulationError(
              "staircase solutions lost their sandwich ordering");
        gap = std::max(gap, d);
      }

    if (prev_up.size() > 0) {
      for (Eigen::Index j = 0; j < lo.cols(); ++j)
        for (Eigen::Index i = 0; i < lo.rows(); ++i) {
          if (lo(i, j) < prev_up(i, j) - slack_for(prev_up(i, j)) ||
              hi(i, j) > prev_down(i, j) + slack_for(prev_down(i, j)))
            throw SimulationError(
                "staircase refinement lost its monotonicity");
        }
    }
    prev_up = lo;
    prev_down = hi;

    if (gap <= tol) {
      lower.gap = gap;
      return lower;
    }
  }
  throw ConvergenceError(
      "time change did not converge by level " + std::to_string(level_cap) +
      " (remaining gap " + std::to_string(gap) + ")");
}

ProcessPath assemble(const std::vector<CadlagPath>& drivers,
                     const TimeChangeSolution& tc, const Vec& x0,
                     StateDim dim) {
  const int m = dim.m;
  const int d = dim.d();
  if ((int)drivers.size() != m)
    throw std::invalid_argument("one driver path per positive coordinate required");
  if ((int)x0.size() != d || tc.tau.rows() != m)
    throw std::invalid_argument("state dimension mismatch in assemble");

  ProcessPath p;
  p.grid = tc.grid;
  p.x0 = x0;
  p.absorbed_at = tc.absorbed_at;
  p.paste_times = tc.paste_times;
  p.mesh = drivers.empty() ? 0.0 : drivers[0].mesh();
  p.dim = dim;
  p.X.resize(d, (Eigen::Index)p.grid.size());

  for (std::size_t g = 0; g < p.grid.size(); ++g) {
    Vec xv = x0;
    for (int k = 0; k < m; ++k) xv += drivers[k].value(tc.tau(k, (Eigen::Index)g));
    for (int k = 0; k < m; ++k) {
      if (xv[k] < 0.0) {
        if (xv[k] >= -1e-10) {
          xv[k] = 0.0;
          ++p.clamp_count;
        } else {
          throw SimulationError(
              "assembled state left the positive block by " +
              std::to_string(-xv[k]) + " at t=" + std::to_string(p.grid[g]));
        }
      }
    }
    p.X.col((Eigen::Index)g) = xv;
  }
  return p;
}

Simulator::Simulator(AdmissibleParamSet params, Vec x0, SimConfig cfg)
    : params_(std::move(params)), x0_(std::move(x0)), cfg_(std::move(cfg)) {
  const ValidationReport rep = validate(params_);
  if (!rep.ok())
    throw ValidationError("parameter set is not admissible: " + rep.to_string());
  const ModelClass mc = classify(params_);
  if (!mc.directly_simulable()) {
    std::string why;
    if (!mc.constant_block_zero) why = "the state-independent block is nonzero";
    else if (!mc.free_drift_block_zero) why = "the real block has internal drift";
    else why = "a killing rate is present";
    throw ValidationError("parameter set is not directly simulable: " + why +
                          "; reduce it first");
  }
  if (!in_state_space(params_.dim, x0_))
    throw ValidationError("initial state is outside the state space");
  if (!(cfg_.T > 0)) throw ConfigError("horizon T must be positive");
  if (!(cfg_.mesh > 0)) throw ConfigError("driver mesh must be positive");
  if (cfg_.level0 < 0 || cfg_.level_cap < cfg_.level0)
    throw ConfigError("invalid dyadic level range");
  // the real-block drivers of an admissible, directly simulable set vanish
  for (int j = params_.dim.m; j < params_.dim.d(); ++j) {
    const LevyTriplet& tr = params_.drivers[j];
    if (!tr.beta.isZero(0.0) || !tr.alpha.isZero(0.0) || !tr.jumps.is_zero())
      throw ValidationError("real-block driver " + std::to_string(j + 1) +
                            " is nonzero despite the model class");
  }
  // A driver's exponent compensates small jumps only on its own coordinate
  // and the real block, while the path generator subtracts the full truncated
  // mean. Restore the remaining positive components so the generated path has
  // exactly the driver's law; this is also what keeps the cross drift of the
  // monotone remainder nonnegative for every admissible set.
  gen_triplets_.assign(params_.drivers.begin(),
                       params_.drivers.begin() + params_.dim.m);
  for (int k = 0; k < params_.dim.m; ++k) {
    LevyTriplet& tr = gen_triplets_[k];
    if (tr.jumps.is_zero()) continue;
    const Vec& tm = tr.jumps.dist->truncated_mean();
    for (int i = 0; i < params_.dim.m; ++i)
      if (i != k) tr.beta[i] += tr.jumps.rate * tm[i];
  }
  const double xmax = x0_.size() ? x0_.cwiseAbs().maxCoeff() : 0.0;
  horizon0_ = (1.0 + 2.0 * xmax) * (1.0 + cfg_.T) * 2.0;
  horizon0_ = std::ceil(horizon0_ / cfg_.mesh) * cfg_.mesh;
}

ProcessPath Simulator::run(std::uint64_t sample_index) const {
  const int m = params_.dim.m;
  const std::uint64_t sample_id = substream(0, sample_index);

  double S = horizon0_;
  for (int attempt = 0; attempt < 48; ++attempt) {
    try {
      std::vector<CadlagPath> paths;
      paths.reserve(m);
      for (int k = 0; k < m; ++k)
        paths.push_back(CadlagPath::generate(
            gen_triplets_[k], S, cfg_.mesh,
            RngStream{cfg_.seed, substream(sample_id, (std::uint64_t)k)}));
      std::vector<SplitPath> splits;
      splits.reserve(m);
      for (int k = 0; k < m; ++k) splits.emplace_back(paths[k], k, params_.dim);

      PasteSettings ps;
      ps.output_nodes = cfg_.output_nodes;
      ps.paste_cap = cfg_.paste_cap;
      ps.extra_times = cfg_.extra_record_times;

      const Vec xI = x0_.head(m);
      TimeChangeSolution tc = solve_converged(splits, xI, cfg_.tau_tol,
                                              cfg_.level0, cfg_.level_cap,
                                              cfg_.T, ps);
      return assemble(paths, tc, x0_, params_.dim);
    } catch (const NeedExtension& need) {
      double req = std::max(need.required, S);
      S = std::max(2.0 * S, 1.25 * req);
      S = std::ceil(S / cfg_.mesh) * cfg_.mesh;
    }
  }
  throw SimulationError("driver horizon kept growing; the time change diverges");
}

}  // namespace affine

#include "affine/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include <unsupported/Eigen/MatrixFunctions>

#include "affine/format.hpp"
#include "affine/reduction.hpp"

namespace affine {

namespace {

constexpr long kChunk = 1024;
constexpr double kMaxFailureRate = 0.001;

// State columns of one inverted sample at the query times.
Mat states_at(const ProcessPath& path, const std::vector<double>& t_list) {
  Mat out((Eigen::Index)path.dim.d(), (Eigen::Index)t_list.size());
  for (std::size_t q = 0; q < t_list.size(); ++q) {
    const auto it =
        std::lower_bound(path.grid.begin(), path.grid.end(), t_list[q]);
    if (it == path.grid.end() || *it != t_list[q])
      throw SimulationError("query time missing from the sample grid");
    out.col((Eigen::Index)q) = path.X.col((Eigen::Index)(it - path.grid.begin()));
  }
  return out;
}

// Per-chunk Monte Carlo accumulation: one worker fills one chunk slot, and
// slots are merged in index order afterwards so totals never depend on the
// worker count.
struct ChunkSums {
  Mat re, im, re2, im2;  // u_points x t_points
  long done = 0;
  long failed = 0;
};

template <typename PerSample>
std::vector<ChunkSums> run_chunks(long n, int workers, int rows, int cols,
                                  const PerSample& per_sample) {
  const long chunks = (n + kChunk - 1) / kChunk;
  std::vector<ChunkSums> slots((std::size_t)chunks);
  for (auto& s : slots) {
    s.re = Mat::Zero(rows, cols);
    s.im = Mat::Zero(rows, cols);
    s.re2 = Mat::Zero(rows, cols);
    s.im2 = Mat::Zero(rows, cols);
  }

  std::atomic<long> next{0};
  auto worker = [&]() {
    for (;;) {
      const long c = next.fetch_add(1);
      if (c >= chunks) return;
      ChunkSums& s = slots[(std::size_t)c];
      const long lo = c * kChunk;
      const long hi = std::min(n, lo + kChunk);
      for (long k = lo; k < hi; ++k) {
        try {
          per_sample((std::uint64_t)k, s);
          ++s.done;
        } catch (const SimulationError&) {
          ++s.failed;
        } catch (const ConvergenceError&) {
          ++s.failed;
        }
      }
    }
  };

  int nw = workers;
  if (nw <= 0) nw = (int)std::thread::hardware_concurrency();
  if (nw < 1) nw = 1;
  nw = (int)std::min<long>(nw, chunks);
  if (nw <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve((std::size_t)nw);
    for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return slots;
}

struct McPrep {
  ReductionPlan plan;
  SimConfig cfg;
  std::vector<double> t_list;
};

McPrep prepare(const AdmissibleParamSet& p, const std::vector<double>& t_list,
               const SimConfig& cfg) {
  McPrep prep;
  prep.plan = reduce_for_simulation(p);
  prep.cfg = cfg;
  prep.t_list = t_list;
  std::sort(prep.t_list.begin(), prep.t_list.end());
  prep.t_list.erase(std::unique(prep.t_list.begin(), prep.t_list.end()),
                    prep.t_list.end());
  if (prep.t_list.empty()) throw std::invalid_argument("no query times given");
  if (prep.t_list.front() < 0.0)
    throw std::invalid_argument("query times must be nonnegative");
  prep.cfg.T = std::max(prep.cfg.T, prep.t_list.back());
  auto& extra = prep.cfg.extra_record_times;
  extra.insert(extra.end(), prep.t_list.begin(), prep.t_list.end());
  return prep;
}

}  // namespace

std::vector<CFEstimate> mc_cf(const AdmissibleParamSet& p, const Vec& x0,
                              const std::vector<CVec>& u_list,
                              const std::vector<double>& t_list, long n,
                              const SimConfig& cfg) {
  if (u_list.empty()) throw std::invalid_argument("no transform arguments given");
  if (n < 2) throw std::invalid_argument("need at least two samples");
  for (const CVec& u : u_list) {
    if ((int)u.size() != p.d())
      throw std::invalid_argument("transform argument dimension mismatch");
    if (!in_frequency_set(p.dim, u))
      throw DomainError("transform argument outside the admissible frequency set");
  }

  McPrep prep = prepare(p, t_list, cfg);
  const Simulator sim(prep.plan.reduced, prep.plan.embed_x(x0), prep.cfg);
  const int nu = (int)u_list.size();
  const int nt = (int)prep.t_list.size();

  auto per_sample = [&](std::uint64_t k, ChunkSums& s) {
    const ProcessPath raw = sim.run(k);
    const ProcessPath path = invert_frames(raw, prep.plan);
    const Mat X = states_at(path, prep.t_list);
    for (int q = 0; q < nt; ++q) {
      const Vec xc = X.col(q);
      for (int a = 0; a < nu; ++a) {
        const Cplx w = std::exp(pairing(xc, u_list[(std::size_t)a]));
        s.re(a, q) += w.real();
        s.im(a, q) += w.imag();
        s.re2(a, q) += w.real() * w.real();
        s.im2(a, q) += w.imag() * w.imag();
      }
    }
  };

  const std::vector<ChunkSums> slots =
      run_chunks(n, prep.cfg.workers, nu, nt, per_sample);

  Mat re = Mat::Zero(nu, nt), im = Mat::Zero(nu, nt);
  Mat re2 = Mat::Zero(nu, nt), im2 = Mat::Zero(nu, nt);
  long done = 0, failed = 0;
  for (const ChunkSums& s : slots) {
    re += s.re;
    im += s.im;
    re2 += s.re2;
    im2 += s.im2;
    done += s.done;
    failed += s.failed;
  }
  if ((double)failed > kMaxFailureRate * (double)n)
    throw SimulationError("sample failure rate " + std::to_string(failed) +
                          "/" + std::to_string(n) + " exceeds 0.1%");
  if (done < 2) throw SimulationError("too few completed samples");

  std::vector<CFEstimate> out;
  out.reserve((std::size_t)nu * (std::size_t)nt);
  const double dn = (double)done;
  for (int q = 0; q < nt; ++q)
    for (int a = 0; a < nu; ++a) {
      CFEstimate e;
      e.u0 = u_list[(std::size_t)a];
      e.t = prep.t_list[(std::size_t)q];
      e.estimate = Cplx(re(a, q) / dn, im(a, q) / dn);
      const double var_re =
          std::max(0.0, (re2(a, q) - re(a, q) * re(a, q) / dn) / (dn - 1.0));
      const double var_im =
          std::max(0.0, (im2(a, q) - im(a, q) * im(a, q) / dn) / (dn - 1.0));
      e.std_error = std::sqrt((var_re + var_im) / dn);
      e.n = done;
      out.push_back(std::move(e));
    }
  return out;
}

double binomial_tail_geq(long N, long k, double p) {
  if (k <= 0) return 1.0;
  if (k > N) return 0.0;
  double tail = 0.0;
  for (long j = k; j <= N; ++j) {
    const double logc = std::lgamma((double)N + 1.0) -
                        std::lgamma((double)j + 1.0) -
                        std::lgamma((double)(N - j) + 1.0);
    tail += std::exp(logc + (double)j * std::log(p) +
                     (double)(N - j) * std::log1p(-p));
  }
  return std::min(1.0, tail);
}

int binomial_critical(long N, double p, double alpha) {
  for (long k = 0; k <= N; ++k)
    if (binomial_tail_geq(N, k, p) < alpha) return (int)k;
  return (int)N + 1;
}

CompareReport compare_cf(const std::vector<CFEstimate>& estimates,
                         const AdmissibleParamSet& p, const Vec& x0,
                         const RiccatiOptions& opts, double z_threshold) {
  CompareReport rep;
  rep.z_threshold = z_threshold;
  rep.p0 = std::erfc(z_threshold / std::sqrt(2.0));

  for (const CFEstimate& e : estimates) {
    CompareReport::Point pt;
    pt.u0 = e.u0;
    pt.t = e.t;
    pt.estimate = e.estimate;
    pt.se = e.std_error;
    pt.predicted = cf_affine(p, e.u0, x0, {e.t}, opts)[0];
    const double diff = std::abs(pt.estimate - pt.predicted);
    pt.z = diff == 0.0 ? 0.0 : diff / std::max(pt.se, 1e-300);
    pt.exceeds = pt.z > z_threshold;
    if (pt.exceeds) ++rep.n_exceed;
    rep.points.push_back(std::move(pt));
  }

  rep.critical = binomial_critical((long)rep.points.size(), rep.p0, 0.01);
  rep.pass = rep.n_exceed < rep.critical;
  return rep;
}

std::string CompareReport::to_string() const {
  std::string s;
  s += "transform comparison: " + std::to_string(points.size()) + " points, " +
       std::to_string(n_exceed) + " beyond z=" + fmt17(z_threshold) +
       " (critical count " + std::to_string(critical) + ")\n";
  for (const Point& pt : points) {
    if (!pt.exceeds) continue;
    s += "  t=" + fmt17(pt.t) + " z=" + fmt17(pt.z) + " est=(" +
         fmt17(pt.estimate.real()) + "," + fmt17(pt.estimate.imag()) +
         ") pred=(" + fmt17(pt.predicted.real()) + "," +
         fmt17(pt.predicted.imag()) + ")\n";
  }
  s += pass ? "PASS\n" : "FAIL\n";
  return s;
}

std::pair<Mat, Vec> mean_dynamics(const AdmissibleParamSet& p) {
  const int d = p.d();
  Mat B = Mat::Zero(d, d);
  Vec c = Vec::Zero(d);

  // derivative of a jump integral term at u = 0, coordinate j
  auto measure_term = [](const JumpMeasureSpec& jm,
                         const std::vector<int>& comp, int j) {
    if (jm.is_zero()) return 0.0;
    double v = jm.rate * jm.dist->mean()[j];
    for (int idx : comp)
      if (idx == j) v -= jm.rate * jm.dist->truncated_mean()[j];
    return v;
  };

  const std::vector<int> freeJ = free_indices(p.dim);
  for (int j = 0; j < d; ++j) c[j] = p.b[j] + measure_term(p.m_jumps, freeJ, j);

  for (int k = 0; k < d; ++k) {
    const std::vector<int> comp = free_indices_plus(p.dim, k);
    for (int j = 0; j < d; ++j)
      B(j, k) = p.drivers[k].beta[j] + measure_term(p.drivers[k].jumps, comp, j);
  }
  return {B, c};
}

Vec mean_ode_solution(const AdmissibleParamSet& p, const Vec& x0, double t) {
  const int d = p.d();
  if ((int)x0.size() != d) throw std::invalid_argument("state dimension mismatch");
  auto [B, c] = mean_dynamics(p);
  Mat aug = Mat::Zero(d + 1, d + 1);
  aug.topLeftCorner(d, d) = B;
  aug.topRightCorner(d, 1) = c;
  const Mat E = (t * aug).exp();
  Vec y(d + 1);
  y.head(d) = x0;
  y[d] = 1.0;
  return (E * y).head(d);
}

MomentReport moment_check(const AdmissibleParamSet& p, const Vec& x0,
                          const std::vector<double>& t_list, long n,
                          const SimConfig& cfg, double z_threshold) {
  if (n < 2) throw std::invalid_argument("need at least two samples");
  McPrep prep = prepare(p, t_list, cfg);
  const Simulator sim(prep.plan.reduced, prep.plan.embed_x(x0), prep.cfg);
  const int d = p.d();
  const int nt = (int)prep.t_list.size();

  auto per_sample = [&](std::uint64_t k, ChunkSums& s) {
    const ProcessPath raw = sim.run(k);
    const ProcessPath path = invert_frames(raw, prep.plan);
    const Mat X = states_at(path, prep.t_list);
    s.re += X;
    s.re2 += X.cwiseProduct(X);
  };

  const std::vector<ChunkSums> slots =
      run_chunks(n, prep.cfg.workers, d, nt, per_sample);

  Mat sum = Mat::Zero(d, nt), sum2 = Mat::Zero(d, nt);
  long done = 0, failed = 0;
  for (const ChunkSums& s : slots) {
    sum += s.re;
    sum2 += s.re2;
    done += s.done;
    failed += s.failed;
  }
  if ((double)failed > kMaxFailureRate * (double)n)
    throw SimulationError("sample failure rate " + std::to_string(failed) +
                          "/" + std::to_string(n) + " exceeds 0.1%");
  if (done < 2) throw SimulationError("too few completed samples");

  MomentReport rep;
  const double dn = (double)done;
  for (int q = 0; q < nt; ++q) {
    const Vec pred = mean_ode_solution(p, x0, prep.t_list[(std::size_t)q]);
    for (int j = 0; j < d; ++j) {
      MomentReport::Entry e;
      e.t = prep.t_list[(std::size_t)q];
      e.coord = j;
      e.estimate = sum(j, q) / dn;
      const double var =
          std::max(0.0, (sum2(j, q) - sum(j, q) * sum(j, q) / dn) / (dn - 1.0));
      e.se = std::sqrt(var / dn);
      e.predicted = pred[j];
      const double diff = std::abs(e.estimate - e.predicted);
      e.z = diff == 0.0 ? 0.0 : diff / std::max(e.se, 1e-300);
      e.flagged = e.z > z_threshold;
      if (e.flagged) ++rep.n_flagged;
      rep.entries.push_back(e);
    }
  }
  rep.pass = rep.n_flagged == 0;
  return rep;
}

std::string MomentReport::to_string() const {
  std::string s = "moment check: " + std::to_string(entries.size()) +
                  " entries, " + std::to_string(n_flagged) + " flagged\n";
  for (const Entry& e : entries) {
    if (!e.flagged) continue;
    s += "  t=" + fmt17(e.t) + " coord=" + std::to_string(e.coord + 1) +
         " est=" + fmt17(e.estimate) + " pred=" + fmt17(e.predicted) +
         " z=" + fmt17(e.z) + "\n";
  }
  s += pass ? "PASS\n" : "FAIL\n";
  return s;
}

std::vector<CVec> default_u_grid(const StateDim& dim, int cap) {
  static const double pos_re[] = {-2.0, -1.0, -0.5};
  static const double free_im[] = {0.0, 1.0, -1.0, 2.0, -2.0};
  const int d = dim.d();

  std::vector<CVec> out;
  std::vector<int> idx((std::size_t)d, 0);
  for (;;) {
    CVec u(d);
    for (int k = 0; k < d; ++k)
      u[k] = dim.is_pos(k) ? Cplx(pos_re[idx[(std::size_t)k]], 0.0)
                           : Cplx(0.0, free_im[idx[(std::size_t)k]]);
    out.push_back(std::move(u));
    if ((int)out.size() >= cap) break;
    int k = d - 1;
    for (; k >= 0; --k) {
      const int base = dim.is_pos(k) ? 3 : 5;
      if (++idx[(std::size_t)k] < base) break;
      idx[(std::size_t)k] = 0;
    }
    if (k < 0) break;
  }
  return out;
}

}  // namespace affine

#include "affine/path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace affine {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Covariance factor L with alpha = L L^T.  Rows whose diagonal entry is
// exactly zero are zeroed outright so that coordinates without diffusion get
// bitwise-zero Gaussian increments.
Mat covariance_factor(const Mat& alpha) {
  const int d = (int)alpha.rows();
  if (alpha.isZero(0.0)) return Mat::Zero(d, d);
  Eigen::SelfAdjointEigenSolver<Mat> es(alpha);
  Vec lam = es.eigenvalues().cwiseMax(0.0);
  Mat L = es.eigenvectors() * lam.cwiseSqrt().asDiagonal();
  for (int k = 0; k < d; ++k)
    if (alpha(k, k) == 0.0) L.row(k).setZero();
  return L;
}

}  // namespace

CadlagPath CadlagPath::generate(const LevyTriplet& t, double horizon, double mesh,
                                const RngStream& stream) {
  if (!(horizon > 0) || !(mesh > 0)) throw std::invalid_argument("horizon and mesh must be positive");
  const int d = (int)t.beta.size();
  CadlagPath p;
  p.mesh_ = mesh;
  p.generated_ = true;
  p.triplet_ = t;
  p.stream_ = stream;

  const std::int64_t N = (std::int64_t)std::ceil(horizon / mesh - 1e-12);
  p.horizon_ = (double)N * mesh;

  Vec drift = t.beta;
  if (!t.jumps.is_zero()) drift -= t.jumps.rate * t.jumps.dist->truncated_mean();

  const Mat L = covariance_factor(t.alpha);
  const bool gauss = !L.isZero(0.0);
  const double sq = std::sqrt(mesh);
  const RngStream gs{stream.seed, substream(stream.stream, kChannelGrid)};

  p.grid_.resize(d, N + 1);
  p.grid_.col(0).setZero();
  Vec z(d);
  for (std::int64_t j = 0; j < N; ++j) {
    Vec step = drift * mesh;
    if (gauss) {
      for (int c = 0; c < d; ++c)
        z[c] = rng_normal(gs, (std::uint64_t)j * (std::uint64_t)d + (std::uint64_t)c);
      step += L * (sq * z);
    }
    p.grid_.col(j + 1) = p.grid_.col(j) + step;
  }

  if (!t.jumps.is_zero()) {
    const RngStream ts{stream.seed, substream(stream.stream, kChannelJumpTimes)};
    const RngStream ss{stream.seed, substream(stream.stream, kChannelJumpSizes)};
    const std::uint64_t stride = t.jumps.dist->sample_stride();
    double s = 0.0;
    for (std::uint64_t i = 0;; ++i) {
      s += -std::log1p(-rng_uniform(ts, i)) / t.jumps.rate;
      if (!(s <= p.horizon_)) break;
      p.jumps_.push_back({s, t.jumps.dist->sample(ss, i * stride)});
    }
  }

  p.rebuild_prefix();
  p.check_finite();
  return p;
}

CadlagPath CadlagPath::from_data(double mesh, Mat grid, std::vector<JumpEvent> jumps) {
  if (!(mesh > 0) || grid.cols() < 2) throw std::invalid_argument("bad synthetic path data");
  CadlagPath p;
  p.mesh_ = mesh;
  p.horizon_ = (double)(grid.cols() - 1) * mesh;
  p.grid_ = std::move(grid);
  p.jumps_ = std::move(jumps);
  std::sort(p.jumps_.begin(), p.jumps_.end(),
            [](const JumpEvent& a, const JumpEvent& b) { return a.s < b.s; });
  p.rebuild_prefix();
  p.check_finite();
  return p;
}

void CadlagPath::rebuild_prefix() {
  const int d = dim();
  jump_prefix_.assign(jumps_.size() + 1, Vec::Zero(d));
  for (std::size_t i = 0; i < jumps_.size(); ++i) {
    if (i > 0 && !(jumps_[i - 1].s < jumps_[i].s))
      throw SimulationError("jump times are not strictly increasing");
    if ((int)jumps_[i].size.size() != d)
      throw std::invalid_argument("jump size dimension mismatch");
    jump_prefix_[i + 1] = jump_prefix_[i] + jumps_[i].size;
  }
}

void CadlagPath::check_finite() const {
  if (!grid_.allFinite()) throw SimulationError("path generation produced a non-finite grid value");
  for (const auto& j : jumps_)
    if (!j.size.allFinite() || !std::isfinite(j.s))
      throw SimulationError("path generation produced a non-finite jump");
}

Vec CadlagPath::continuous_at(double s) const {
  if (s < 0 || s > horizon_ * (1 + 1e-12) + 1e-300)
    throw NeedExtension{-1, s};
  const std::int64_t N = grid_.cols() - 1;
  std::int64_t j = (std::int64_t)(s / mesh_);
  if (j >= N) j = N - 1;
  const double t = (s - (double)j * mesh_) / mesh_;
  if (t == 0.0) return grid_.col(j);
  return grid_.col(j) + t * (grid_.col(j + 1) - grid_.col(j));
}

Vec CadlagPath::value(double s) const {
  Vec v = continuous_at(s);
  const auto it = std::upper_bound(jumps_.begin(), jumps_.end(), s,
                                   [](double x, const JumpEvent& e) { return x < e.s; });
  const std::size_t cnt = (std::size_t)(it - jumps_.begin());
  if (cnt > 0) v += jump_prefix_[cnt];
  return v;
}

double CadlagPath::value1(int coord, double s) const { return value(s)[coord]; }

void CadlagPath::extend(double new_horizon) {
  if (new_horizon <= horizon_) return;
  if (!generated_)
    throw SimulationError("cannot extend a path assembled from fixed data");

  const std::int64_t Nold = grid_.cols() - 1;
  const std::int64_t N = (std::int64_t)std::ceil(new_horizon / mesh_ - 1e-12);
  horizon_ = (double)N * mesh_;

  Vec drift = triplet_.beta;
  if (!triplet_.jumps.is_zero())
    drift -= triplet_.jumps.rate * triplet_.jumps.dist->truncated_mean();
  const Mat L = covariance_factor(triplet_.alpha);
  const bool gauss = !L.isZero(0.0);
  const int d = dim();
  const double sq = std::sqrt(mesh_);
  const RngStream gs{stream_.seed, substream(stream_.stream, kChannelGrid)};

  grid_.conservativeResize(Eigen::NoChange, N + 1);
  Vec z(d);
  for (std::int64_t j = Nold; j < N; ++j) {
    Vec step = drift * mesh_;
    if (gauss) {
      for (int c = 0; c < d; ++c)
        z[c] = rng_normal(gs, (std::uint64_t)j * (std::uint64_t)d + (std::uint64_t)c);
      step += L * (sq * z);
    }
    grid_.col(j + 1) = grid_.col(j) + step;
  }

  if (!triplet_.jumps.is_zero()) {
    // Arrival times are partial sums of counter-indexed gaps, so recomputing
    // the whole sequence reproduces the existing events exactly.
    const RngStream ts{stream_.seed, substream(stream_.stream, kChannelJumpTimes)};
    const RngStream ss{stream_.seed, substream(stream_.stream, kChannelJumpSizes)};
    const std::uint64_t stride = triplet_.jumps.dist->sample_stride();
    jumps_.clear();
    double s = 0.0;
    for (std::uint64_t i = 0;; ++i) {
      s += -std::log1p(-rng_uniform(ts, i)) / triplet_.jumps.rate;
      if (!(s <= horizon_)) break;
      jumps_.push_back({s, triplet_.jumps.dist->sample(ss, i * stride)});
    }
  }

  rebuild_prefix();
  check_finite();
}

CadlagPath generate_path(const LevyTriplet& t, double horizon, double mesh,
                         const RngStream& stream) {
  return CadlagPath::generate(t, horizon, mesh, stream);
}

CadlagPath extend_path(const CadlagPath& p, double new_horizon) {
  CadlagPath q = p;
  q.extend(new_horizon);
  return q;
}

// ---- ScalarProfile ----

ScalarProfile ScalarProfile::of_coordinate(const CadlagPath& p, int coord) {
  ScalarProfile g;
  g.horizon = p.horizon();
  const Mat& grid = p.grid();
  const std::int64_t N = grid.cols() - 1;
  const double h = p.mesh();

  std::size_t ji = 0;
  const auto& jumps = p.jumps();
  double jump_sum = 0.0;

  g.knot.reserve((std::size_t)N + 1 + jumps.size());
  g.right.reserve(g.knot.capacity());

  for (std::int64_t k = 0; k <= N; ++k) {
    const double node = (double)k * h;
    while (ji < jumps.size() && jumps[ji].s < node) {
      const double s = jumps[ji].s;
      const double base = grid(coord, k - 1) +
                          (s - (double)(k - 1) * h) / h * (grid(coord, k) - grid(coord, k - 1));
      jump_sum += jumps[ji].size[coord];
      g.knot.push_back(s);
      g.right.push_back(base + jump_sum);
      ++ji;
    }
    while (ji < jumps.size() && jumps[ji].s == node) {
      jump_sum += jumps[ji].size[coord];
      ++ji;
    }
    g.knot.push_back(node);
    g.right.push_back(grid(coord, k) + jump_sum);
  }

  // Knots include every grid node, so each segment sits inside one grid cell
  // and inherits that cell's slope; jumps only shift the level.
  g.slope.assign(g.knot.size(), 0.0);
  for (std::size_t i = 0; i + 1 < g.knot.size(); ++i) {
    std::int64_t cell = (std::int64_t)(g.knot[i] / h);
    if (cell >= N) cell = N - 1;
    g.slope[i] = (grid(coord, cell + 1) - grid(coord, cell)) / h;
  }
  return g;
}

ScalarProfile ScalarProfile::zero(double horizon) {
  ScalarProfile g;
  g.horizon = horizon;
  g.knot = {0.0, horizon};
  g.right = {0.0, 0.0};
  g.slope = {0.0, 0.0};
  return g;
}

int ScalarProfile::segment_of(double r) const {
  const auto it = std::upper_bound(knot.begin(), knot.end(), r);
  int i = (int)(it - knot.begin()) - 1;
  if (i < 0) i = 0;
  if (i >= (int)knot.size() - 1) i = (int)knot.size() - 2;
  return i;
}

double ScalarProfile::value(double r) const {
  const int i = segment_of(r);
  return right[i] + slope[i] * (r - knot[i]);
}

// ---- SplitPath ----

SplitPath::SplitPath(const CadlagPath& parent, int i, StateDim dim)
    : i_(i), dim_(dim) {
  const int d = parent.dim();
  if (d != dim.d() || i < 0 || i >= dim.m)
    throw std::invalid_argument("split index outside the positive block");

  Mat tg = Mat::Zero(d, parent.grid().cols());
  tg.row(i) = parent.grid().row(i);
  Mat ng = parent.grid();
  ng.row(i).setZero();

  std::vector<JumpEvent> tj, nj;
  tj.reserve(parent.jumps().size());
  nj.reserve(parent.jumps().size());
  for (const auto& e : parent.jumps()) {
    Vec ts = Vec::Zero(d);
    ts[i] = e.size[i];
    Vec ns = e.size;
    ns[i] = 0.0;
    tj.push_back({e.s, ts});
    nj.push_back({e.s, ns});
  }

  tilde_ = CadlagPath::from_data(parent.mesh(), std::move(tg), std::move(tj));
  notilde_ = CadlagPath::from_data(parent.mesh(), std::move(ng), std::move(nj));
  profile_ = ScalarProfile::of_coordinate(tilde_, i);
  check_invariants();
}

SplitPath::SplitPath(CadlagPath tilde, CadlagPath notilde, int i, StateDim dim)
    : i_(i), dim_(dim), tilde_(std::move(tilde)), notilde_(std::move(notilde)) {
  if (tilde_.dim() != dim.d() || notilde_.dim() != dim.d() || i < 0 || i >= dim.m)
    throw std::invalid_argument("split parts do not match the state dimension");
  profile_ = ScalarProfile::of_coordinate(tilde_, i);
  check_invariants();
}

void SplitPath::check_invariants() const {
  for (const auto& e : tilde_.jumps())
    if (e.size[i_] < 0.0)
      throw ValidationError("driver " + std::to_string(i_ + 1) +
                            " has a negative jump in its own coordinate");
  const Mat& g = notilde_.grid();
  for (int k = 0; k < dim_.m; ++k) {
    if (k == i_) {
      if (!g.row(k).isZero(0.0))
        throw ValidationError("remainder of driver " + std::to_string(i_ + 1) +
                              " is nonzero in its own coordinate");
      continue;
    }
    for (std::int64_t j = 0; j + 1 < g.cols(); ++j)
      if (g(k, j + 1) < g(k, j))
        throw ValidationError(
            "driver " + std::to_string(i_ + 1) +
            " violates the increasing-remainder hypothesis on coordinate " +
            std::to_string(k + 1) + " (compensated cross drift is negative)");
  }
  for (const auto& e : notilde_.jumps())
    for (int k = 0; k < dim_.m; ++k)
      if (e.size[k] < 0.0)
        throw ValidationError("driver " + std::to_string(i_ + 1) +
                              " has a negative jump on positive coordinate " +
                              std::to_string(k + 1));
}

// ---- DyadicApproximant ----

DyadicApproximant::DyadicApproximant(const SplitPath& split, int level, bool up)
    : split_(&split), level_(level), up_(up) {
  if (level < 0 || level > 62) throw std::invalid_argument("dyadic level out of range");
  cell_ = std::ldexp(1.0, -level);
  const Mat& g = split.notilde().grid();
  drift_free_ = true;
  for (int k = 0; k < split.dim().m && drift_free_; ++k)
    for (std::int64_t j = 0; j + 1 < g.cols(); ++j)
      if (g(k, j + 1) != g(k, j)) {
        drift_free_ = false;
        break;
      }
}

DyadicApproximant dyadic_approximant(const SplitPath& split, int level, bool up) {
  return DyadicApproximant(split, level, up);
}

Vec DyadicApproximant::base_at(std::int64_t node) const {
  const double s = (double)node * cell_;
  if (s > split_->notilde().horizon() * (1 + 1e-12))
    throw NeedExtension{split_->driver(), s};
  return split_->notilde().value(s);
}

Vec DyadicApproximant::value_at(double r) const {
  std::int64_t node = (std::int64_t)std::floor(r / cell_);
  if (node < 0) node = 0;
  if (!up_) node += 1;
  return base_at(node);
}

std::vector<double> DyadicApproximant::event_times(double up_to) const {
  std::vector<double> out;
  for (std::int64_t k = 0; (double)k * cell_ <= up_to; ++k) out.push_back((double)k * cell_);
  for (const auto& e : split_->notilde().jumps()) {
    if (e.s > up_to) break;
    out.push_back(e.s);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

DyadicApproximant::Cursor DyadicApproximant::cursor() const {
  Cursor c;
  c.a = this;
  c.prev_end = 0;
  c.next_end = 0;
  c.jump_scan = 0;
  c.increment = Vec::Zero(split_->dim().d());
  scan(c);
  return c;
}

void DyadicApproximant::Cursor::pop() {
  prev_end = next_end;
  a->scan(*this);
}

void DyadicApproximant::scan(Cursor& c) const {
  const int m = split_->dim().m;
  const double horizon = split_->notilde().horizon();
  const auto& jumps = split_->notilde().jumps();

  std::int64_t w = c.prev_end;  // candidate window end
  for (;;) {
    if (drift_free_) {
      // Next window holding a jump with positive-block mass.
      std::size_t q = c.jump_scan;
      while (q < jumps.size()) {
        bool pos = false;
        for (int k = 0; k < m && !pos; ++k) pos = jumps[q].size[k] != 0.0;
        if (pos && jumps[q].s > (double)c.prev_end * cell_) break;
        ++q;
      }
      if (q == jumps.size()) {
        c.next_time = kInf;
        return;
      }
      c.jump_scan = q;
      w = (std::int64_t)std::ceil(jumps[q].s / cell_ - 1e-12);
      if (w <= c.prev_end) w = c.prev_end + 1;
    } else {
      w += 1;
    }

    const double event_time = up_ ? (double)w * cell_ : (double)(w - 1) * cell_;
    if (!up_ && event_time >= horizon * (1 + 1e-12)) {
      c.next_time = kInf;  // unreachable: the diagonal sweep ends first
      return;
    }
    if ((double)w * cell_ > horizon * (1 + 1e-12)) {
      if (up_) {
        c.next_time = kInf;  // event would sit beyond the horizon itself
        return;
      }
      throw NeedExtension{split_->driver(), (double)w * cell_};
    }

    Vec inc = base_at(w) - base_at(c.prev_end);
    bool pos = false;
    for (int k = 0; k < m && !pos; ++k) pos = inc[k] != 0.0;
    if (pos) {
      c.next_end = w;
      c.next_time = event_time;
      c.increment = std::move(inc);
      return;
    }
    // Zero on the positive block: fold the window into the consumed prefix.
    c.prev_end = w;
  }
}

}  // namespace affine

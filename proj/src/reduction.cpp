#include "affine/reduction.hpp"

#include <Eigen/LU>

namespace affine {

namespace {

Mat lift_matrix(const Mat& A) {
  const int d = (int)A.rows();
  Mat out = Mat::Zero(d + 1, d + 1);
  out.block(1, 1, d, d) = A;
  return out;
}

Vec lift_vector(const Vec& v, double head) {
  Vec out(v.size() + 1);
  out[0] = head;
  out.tail(v.size()) = v;
  return out;
}

JumpMeasureSpec lift_measure(const JumpMeasureSpec& jm, int new_dim) {
  if (jm.is_zero()) return JumpMeasureSpec::none();
  return JumpMeasureSpec::of(jm.rate, jm.dist->lifted(new_dim, 1));
}

}  // namespace

Vec ReductionPlan::embed_x(const Vec& x) const {
  return added_aux ? lift_vector(x, 1.0) : x;
}

CVec ReductionPlan::embed_u(const CVec& u) const {
  if (!added_aux) return u;
  CVec out(u.size() + 1);
  out[0] = Cplx(0, 0);
  out.tail(u.size()) = u;
  return out;
}

AdmissibleParamSet augment(const AdmissibleParamSet& p) {
  if (p.c != 0.0 || !p.gamma.isZero(0.0))
    throw ValidationError(
        "killing cannot be absorbed into an auxiliary coordinate; remove it first");
  const int d = p.d();
  AdmissibleParamSet q = AdmissibleParamSet::zero({p.dim.m + 1, p.dim.n});

  LevyTriplet aux;
  aux.beta = lift_vector(p.b, 0.0);
  aux.alpha = lift_matrix(p.a);
  aux.jumps = lift_measure(p.m_jumps, d + 1);
  q.drivers[0] = std::move(aux);

  for (int k = 0; k < d; ++k) {
    LevyTriplet tr;
    tr.beta = lift_vector(p.drivers[k].beta, 0.0);
    tr.alpha = lift_matrix(p.drivers[k].alpha);
    tr.jumps = lift_measure(p.drivers[k].jumps, d + 1);
    q.drivers[k + 1] = std::move(tr);
  }
  q.check_shape();
  return q;
}

std::pair<AdmissibleParamSet, Mat> apply_moving_frames(const AdmissibleParamSet& p) {
  const int m = p.dim.m, n = p.dim.n;
  Mat C = Mat::Zero(n, n);
  AdmissibleParamSet q = p;
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) {
      C(r, c) = p.drivers[m + c].beta[m + r];
      q.drivers[m + c].beta[m + r] = 0.0;
    }
  return {std::move(q), std::move(C)};
}

ReductionPlan reduce_for_simulation(const AdmissibleParamSet& p) {
  const ValidationReport rep = validate(p);
  if (!rep.ok())
    throw ValidationError("cannot reduce an inadmissible set: " + rep.to_string());

  ReductionPlan plan;
  plan.original = p;

  ModelClass mc = classify(p);
  if (!mc.killing_free)
    throw ValidationError(
        "killing rates are outside the scope of the pathwise construction");

  AdmissibleParamSet work = p;
  if (!mc.constant_block_zero) {
    work = augment(work);
    plan.added_aux = true;
  }
  if (!classify(work).free_drift_block_zero) {
    auto moved = apply_moving_frames(work);
    work = std::move(moved.first);
    plan.frame = std::move(moved.second);
  }
  plan.reduced = std::move(work);
  return plan;
}

ProcessPath forward_frames(const ProcessPath& path, const Mat& C) {
  const int n = path.dim.n;
  if ((int)C.rows() != n || (int)C.cols() != n)
    throw std::invalid_argument("frame matrix must match the real block");
  ProcessPath out = path;
  if (n == 0 || C.isZero(0.0)) return out;

  Vec Q = Vec::Zero(n);
  for (std::size_t l = 0; l + 1 < path.grid.size(); ++l) {
    const double dt = path.grid[l + 1] - path.grid[l];
    Q += 0.5 * dt *
         (path.X.col((Eigen::Index)l).tail(n) + path.X.col((Eigen::Index)(l + 1)).tail(n));
    out.X.col((Eigen::Index)(l + 1)).tail(n) =
        path.X.col((Eigen::Index)(l + 1)).tail(n) - C * Q;
  }
  return out;
}

namespace {

ProcessPath invert_frames_only(const ProcessPath& path, const Mat& C) {
  const int n = path.dim.n;
  if ((int)C.rows() != n || (int)C.cols() != n)
    throw std::invalid_argument("frame matrix must match the real block");
  ProcessPath out = path;
  if (n == 0 || C.isZero(0.0)) return out;

  Vec Q = Vec::Zero(n);
  const Mat I = Mat::Identity(n, n);
  for (std::size_t l = 0; l + 1 < path.grid.size(); ++l) {
    const double dt = path.grid[l + 1] - path.grid[l];
    const Vec xl = out.X.col((Eigen::Index)l).tail(n);
    const Vec rhs =
        path.X.col((Eigen::Index)(l + 1)).tail(n) + C * (Q + 0.5 * dt * xl);
    const Vec xn = (I - 0.5 * dt * C).partialPivLu().solve(rhs);
    out.X.col((Eigen::Index)(l + 1)).tail(n) = xn;
    Q += 0.5 * dt * (xl + xn);
  }
  return out;
}

}  // namespace

ProcessPath strip_aux(const ProcessPath& path, StateDim original_dim) {
  const int d = path.dim.d();
  if (path.dim.m != original_dim.m + 1 || path.dim.n != original_dim.n)
    throw std::invalid_argument("auxiliary strip dimension mismatch");
  for (Eigen::Index g = 0; g < path.X.cols(); ++g)
    if (path.X(0, g) != 1.0)
      throw SimulationError("auxiliary coordinate drifted away from 1");

  ProcessPath out;
  out.grid = path.grid;
  out.x0 = path.x0.tail(d - 1);
  out.X = path.X.bottomRows(d - 1);
  out.absorbed_at = path.absorbed_at.tail(path.dim.m - 1);
  out.clamp_count = path.clamp_count;
  out.paste_times = path.paste_times;
  out.mesh = path.mesh;
  out.dim = original_dim;
  return out;
}

ProcessPath invert_frames(const ProcessPath& path, const ReductionPlan& plan) {
  ProcessPath out = path;
  if (plan.uses_frames()) out = invert_frames_only(out, plan.frame);
  if (plan.added_aux) out = strip_aux(out, plan.original.dim);
  return out;
}

}  // namespace affine

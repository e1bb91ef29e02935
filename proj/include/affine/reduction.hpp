#pragma once

#include <utility>

#include "affine/params.hpp"
#include "affine/timechange.hpp"
#include "affine/types.hpp"

namespace affine {

// Rewrites a parameter set into a directly simulable one and remembers how
// to map states back.  Two independent devices are available:
//
//  * an auxiliary positive coordinate pinned at 1 that absorbs the
//    state-independent block (b, a, m) into a new driver, and
//  * a moving frame that removes the internal drift of the real block; the
//    removed drift is reinstated pathwise through a cumulative integral.
//
// Killing is not representable this way and is rejected.
struct ReductionPlan {
  AdmissibleParamSet original;
  AdmissibleParamSet reduced;
  bool added_aux = false;
  Mat frame;  // n x n real-block drift that was removed; size 0 when unused

  bool uses_frames() const { return frame.size() > 0 && !frame.isZero(0.0); }
  Vec embed_x(const Vec& x) const;
  CVec embed_u(const CVec& u) const;
};

// Adds the auxiliary coordinate in front of the positive block.  Requires a
// killing-free set; the new driver reproduces the state-independent block
// exactly, so its transform derivative equals F of the input set.
AdmissibleParamSet augment(const AdmissibleParamSet& p);

// Zeroes the real-block internal drift and returns the removed matrix C,
// C(r, c) = drift of driver m+c at coordinate m+r.
std::pair<AdmissibleParamSet, Mat> apply_moving_frames(const AdmissibleParamSet& p);

ReductionPlan reduce_for_simulation(const AdmissibleParamSet& p);

// Y = X - C * (trapezoidal cumulative integral of X) on the real block,
// evaluated on the path's own grid.  Inverse of invert via the matched
// implicit recursion; the positive block is untouched.
ProcessPath forward_frames(const ProcessPath& path, const Mat& C);

// Undoes the plan: reinstates the removed drift (implicit trapezoidal
// recursion, the exact inverse of forward_frames on the same grid) and
// strips the auxiliary coordinate when one was added.
ProcessPath invert_frames(const ProcessPath& path, const ReductionPlan& plan);

// Drops the auxiliary coordinate after checking it stayed pinned at 1.
ProcessPath strip_aux(const ProcessPath& path, StateDim original_dim);

}  // namespace affine

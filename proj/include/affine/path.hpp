#ifndef AFFINE_PATH_HPP
#define AFFINE_PATH_HPP

#include <cstdint>
#include <vector>

#include "affine/params.hpp"
#include "affine/rng.hpp"
#include "affine/types.hpp"

namespace affine {

struct JumpEvent {
  double s = 0.0;  // internal time of the driver
  Vec size;
};

/// Sampled driver path: gridded continuous-plus-drift part (linear between
/// nodes) plus exact jump events.  Extension to a larger horizon reproduces
/// the existing prefix bit for bit (counter-based generation).
class CadlagPath {
 public:
  /// Draws the path on [0, horizon] at the given mesh.  The drift is the
  /// triplet drift minus rate * E[xi 1{|xi|<=1}] (compensation folded in);
  /// jumps are raw.  Deterministic in (triplet, horizon, mesh, stream).
  static CadlagPath generate(const LevyTriplet& t, double horizon, double mesh,
                             const RngStream& stream);

  /// Wraps externally supplied data (tests, synthetic instances).  grid is
  /// d x (N+1) with column j the continuous part at j*mesh; jumps sorted.
  static CadlagPath from_data(double mesh, Mat grid, std::vector<JumpEvent> jumps);

  int dim() const { return (int)grid_.rows(); }
  double mesh() const { return mesh_; }
  double horizon() const { return horizon_; }
  const Mat& grid() const { return grid_; }
  const std::vector<JumpEvent>& jumps() const { return jumps_; }
  const RngStream& stream() const { return stream_; }

  /// Continuous part at s (linear interpolation between grid nodes).
  Vec continuous_at(double s) const;
  /// Full value: continuous part plus all jumps with time <= s.
  Vec value(double s) const;
  double value1(int coord, double s) const;

  /// Regenerates out to at least new_horizon; existing values are unchanged.
  void extend(double new_horizon);

 private:
  friend class SplitPath;  // owns empty paths while assembling the split
  CadlagPath() = default;
  void rebuild_prefix();
  void check_finite() const;

  double mesh_ = 0.0;
  double horizon_ = 0.0;
  Mat grid_;                      // d x (N+1)
  std::vector<JumpEvent> jumps_;  // sorted by s
  std::vector<Vec> jump_prefix_;  // prefix sums, size jumps+1
  bool generated_ = false;
  LevyTriplet triplet_;
  RngStream stream_;
};

CadlagPath generate_path(const LevyTriplet& t, double horizon, double mesh,
                         const RngStream& stream);
CadlagPath extend_path(const CadlagPath& p, double new_horizon);

/// One scalar coordinate of a path as a piecewise-linear profile with jump
/// discontinuities at knots; the exact field the one-dimensional time-change
/// inversion integrates against.
struct ScalarProfile {
  std::vector<double> knot;   // ascending, knot[0] = 0
  std::vector<double> right;  // value just after the knot
  std::vector<double> slope;  // on [knot[i], knot[i+1]); last entry unused
  double horizon = 0.0;

  static ScalarProfile of_coordinate(const CadlagPath& p, int coord);
  static ScalarProfile zero(double horizon);

  int segment_of(double r) const;  // largest i with knot[i] <= r
  double value(double r) const;    // right-continuous
  int segments() const { return (int)knot.size(); }
};

/// Splits driver i of the positive block into the scalar self-exciting part
/// (coordinate i only: its diffusion, diagonal drift, own jump component) and
/// the remainder, whose positive-block coordinates must be nondecreasing.
class SplitPath {
 public:
  /// Checks nonnegative own-coordinate jumps of the scalar part and
  /// nondecreasing increments of the remainder on coordinates I \ {i};
  /// throws ValidationError when the generated path violates them.
  SplitPath(const CadlagPath& parent, int i, StateDim dim);

  /// Test hook: assembles a split from explicit parts (same checks).
  SplitPath(CadlagPath tilde, CadlagPath notilde, int i, StateDim dim);

  int driver() const { return i_; }
  StateDim dim() const { return dim_; }
  const CadlagPath& tilde() const { return tilde_; }
  const CadlagPath& notilde() const { return notilde_; }
  const ScalarProfile& tilde_profile() const { return profile_; }

 private:
  void check_invariants() const;

  int i_ = 0;
  StateDim dim_;
  CadlagPath tilde_;
  CadlagPath notilde_;
  ScalarProfile profile_;
};

/// Piecewise-constant staircase of the nondecreasing remainder on the dyadic
/// grid {k/2^M}: the "up" direction takes the value at the cell's left node,
/// "down" at the node one cell ahead (an upper staircase, right-continuous,
/// already lifted at r = 0).
class DyadicApproximant {
 public:
  DyadicApproximant(const SplitPath& split, int level, bool up);

  int level() const { return level_; }
  bool up() const { return up_; }
  double cell() const { return cell_; }

  /// Staircase value (full state dimension; positive-block rows drive the
  /// pasting).  Throws NeedExtension when the base node lies beyond horizon.
  Vec value_at(double r) const;

  /// Dyadic nodes and base jump times up to and including up_to.
  std::vector<double> event_times(double up_to) const;

  /// Streams the staircase changes in order.  Each change is described by its
  /// r-position and the full increment over the newly covered base window, so
  /// consuming every change once telescopes exactly to the staircase value.
  /// Only changes with nonzero increment on the positive block are reported;
  /// constant stretches are skipped in one step when the drift part of the
  /// remainder vanishes.  Scanning throws NeedExtension if a reachable change
  /// needs base data beyond the horizon.
  struct Cursor {
    const DyadicApproximant* a = nullptr;
    std::int64_t prev_end = 0;   // last consumed window end (node index)
    std::int64_t next_end = 0;   // window end of the pending change
    std::size_t jump_scan = 0;   // next base jump to consider
    double next_time = 0.0;      // r-position of the pending change; +inf if none
    Vec increment;               // staircase change consumed at next_time

    void pop();                  // consume the pending change, find the next
  };
  Cursor cursor() const;

 private:
  Vec base_at(std::int64_t node) const;  // base value at node*cell, checked
  void scan(Cursor& c) const;

  const SplitPath* split_;
  int level_;
  bool up_;
  double cell_;
  bool drift_free_;  // remainder grid is constant on I-rows between jumps
};

DyadicApproximant dyadic_approximant(const SplitPath& split, int level, bool up);

}  // namespace affine

#endif

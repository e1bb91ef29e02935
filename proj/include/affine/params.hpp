#ifndef AFFINE_PARAMS_HPP
#define AFFINE_PARAMS_HPP

#include <string>
#include <vector>

#include "affine/jumps.hpp"
#include "affine/types.hpp"

namespace affine {

/// Characteristic triplet of one driving process: truncation-adjusted drift,
/// Gaussian covariance, and a finite-activity jump measure.
struct LevyTriplet {
  Vec beta;              // size d
  Mat alpha;             // d x d, symmetric positive semidefinite
  JumpMeasureSpec jumps;

  static LevyTriplet zero(int d) {
    return {Vec::Zero(d), Mat::Zero(d, d), JumpMeasureSpec::none()};
  }
};

/// Full parameter set of the process on the mixed state space: one
/// state-independent block (b, a, c, m) and one triplet plus kill rate per
/// coordinate.  drivers[k] scales with coordinate k.
struct AdmissibleParamSet {
  StateDim dim;
  Vec b;                     // size d
  Mat a;                     // d x d
  double c = 0.0;            // constant kill rate
  JumpMeasureSpec m_jumps;   // state-independent jump measure
  Vec gamma;                 // size d, state-proportional kill rates
  std::vector<LevyTriplet> drivers;  // size d

  int d() const { return dim.d(); }
  /// Structural shape check (sizes, finiteness); throws std::invalid_argument.
  void check_shape() const;

  static AdmissibleParamSet zero(StateDim dim) {
    AdmissibleParamSet p;
    p.dim = dim;
    const int d = dim.d();
    p.b = Vec::Zero(d);
    p.a = Mat::Zero(d, d);
    p.m_jumps = JumpMeasureSpec::none();
    p.gamma = Vec::Zero(d);
    p.drivers.assign(d, LevyTriplet::zero(d));
    return p;
  }
};

struct ValidationIssue {
  std::string condition;  // stable identifier of the violated constraint
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  std::string to_string() const;
};

/// Checks every admissibility constraint on the mixed state space.  Zero
/// patterns are exact; positive semidefiniteness allows eigenvalues down to
/// -1e-12 relative to the largest one.
ValidationReport validate(const AdmissibleParamSet& p);

/// Three structural properties that decide whether the set can be fed to the
/// path construction directly.
struct ModelClass {
  bool constant_block_zero = false;  // (b, a, c, m) all vanish
  bool free_drift_block_zero = false;  // no drift among the unconstrained coordinates
  bool killing_free = false;           // c = 0 and gamma = 0
  bool directly_simulable() const {
    return constant_block_zero && free_drift_block_zero && killing_free;
  }
};

ModelClass classify(const AdmissibleParamSet& p);

/// True when x has nonnegative entries on the first m coordinates.
bool in_state_space(const StateDim& dim, const Vec& x);

/// Index helpers for the compensated sets of the transform integrands.
std::vector<int> free_indices(const StateDim& dim);              // {m, ..., d-1}
std::vector<int> free_indices_plus(const StateDim& dim, int k);  // {k} ∪ {m, ..., d-1}

}  // namespace affine

#endif

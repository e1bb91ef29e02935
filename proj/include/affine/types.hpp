#ifndef AFFINE_TYPES_HPP
#define AFFINE_TYPES_HPP

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace affine {

using Vec  = Eigen::VectorXd;
using Mat  = Eigen::MatrixXd;
using Cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// State-space shape: first m coordinates are nonnegative, the remaining n are
/// unconstrained.  d = m + n.
struct StateDim {
  int m = 0;
  int n = 0;

  int d() const { return m + n; }
  bool is_pos(int k) const { return k < m; }      // coordinate lives on the half line
  bool is_free(int k) const { return k >= m; }    // coordinate lives on the full line

  void check() const {
    if (m < 0 || n < 0 || m + n < 1)
      throw std::invalid_argument("StateDim: need m >= 0, n >= 0, m + n >= 1");
  }
};

/// Bilinear pairing sum_k a_k b_k, no complex conjugation on either slot.
inline Cplx pairing(const CVec& a, const CVec& b) {
  return (a.array() * b.array()).sum();
}
inline Cplx pairing(const Vec& a, const CVec& b) {
  Cplx s(0.0, 0.0);
  for (Eigen::Index k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

/// Real matrix applied to a complex vector.
inline CVec apply_real(const Mat& A, const CVec& v) {
  CVec out(A.rows());
  Vec re = A * v.real().eval();
  Vec im = A * v.imag().eval();
  for (Eigen::Index k = 0; k < out.size(); ++k) out[k] = Cplx(re[k], im[k]);
  return out;
}

/// u^T A u for real A, again without conjugation.
inline Cplx quadratic(const CVec& u, const Mat& A) {
  return pairing(u, apply_real(A, u));
}

// ---------------------------------------------------------------------------
// Error taxonomy.  All exceptions derive from std::runtime_error except
// structural misuse, which uses std::invalid_argument directly.
// ---------------------------------------------------------------------------

/// Parameter set fails an admissibility condition.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Configuration file cannot be parsed or is structurally incomplete.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A transform was evaluated outside its convergence domain.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A path sample could not be completed (positivity breach, paste cap, ...).
struct SimulationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The level iteration or the ODE integrator failed to reach its tolerance.
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Internal signal: a driver path is too short for a requested evaluation.
/// Callers that own the driver extend it and retry; never user facing.
struct NeedExtension {
  int driver = 0;        // index of the driver that ran out of horizon
  double required = 0;   // driver-time coordinate that must become reachable
};

}  // namespace affine

#endif

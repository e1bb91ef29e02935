#include "affine/params.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace affine {

namespace {

bool finite(const Vec& v) { return v.allFinite(); }
bool finite(const Mat& m) { return m.allFinite(); }

std::string at(int k) { return "coordinate " + std::to_string(k + 1); }
std::string at(int k, int l) {
  return "entry (" + std::to_string(k + 1) + "," + std::to_string(l + 1) + ")";
}

void check_psd(const Mat& A, const std::string& name, ValidationReport& rep) {
  const double asym = (A - A.transpose()).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if (asym > 1e-12 * scale) {
    rep.issues.push_back({name + ".symmetric", name + " is not symmetric"});
    return;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(A, Eigen::EigenvaluesOnly);
  const double lmax = std::max(1.0, es.eigenvalues().maxCoeff());
  if (es.eigenvalues().minCoeff() < -1e-12 * lmax)
    rep.issues.push_back({name + ".psd", name + " has a negative eigenvalue beyond tolerance"});
}

}  // namespace

void AdmissibleParamSet::check_shape() const {
  dim.check();
  const int D = d();
  if (b.size() != D) throw std::invalid_argument("params: b has wrong size");
  if (a.rows() != D || a.cols() != D) throw std::invalid_argument("params: a has wrong shape");
  if (gamma.size() != D) throw std::invalid_argument("params: gamma has wrong size");
  if (static_cast<int>(drivers.size()) != D)
    throw std::invalid_argument("params: need one driver triplet per coordinate");
  if (!finite(b) || !finite(a) || !finite(gamma) || !std::isfinite(c))
    throw std::invalid_argument("params: non-finite entry");
  m_jumps.check(D);
  for (int k = 0; k < D; ++k) {
    const LevyTriplet& t = drivers[k];
    if (t.beta.size() != D || t.alpha.rows() != D || t.alpha.cols() != D)
      throw std::invalid_argument("params: driver " + std::to_string(k + 1) + " has wrong shape");
    if (!finite(t.beta) || !finite(t.alpha))
      throw std::invalid_argument("params: driver " + std::to_string(k + 1) + " has non-finite entry");
    t.jumps.check(D);
  }
}

std::string ValidationReport::to_string() const {
  if (ok()) return "all admissibility conditions hold\n";
  std::ostringstream os;
  for (const auto& i : issues) os << i.condition << ": " << i.detail << "\n";
  return os.str();
}

ValidationReport validate(const AdmissibleParamSet& p) {
  p.check_shape();
  ValidationReport rep;
  const int m = p.dim.m;
  const int D = p.d();

  // Constant diffusion: only the free-free block may be nonzero.
  for (int k = 0; k < D; ++k)
    for (int l = 0; l < D; ++l)
      if ((k < m || l < m) && p.a(k, l) != 0.0)
        rep.issues.push_back({"a.support", "a must vanish at " + at(k, l)});
  check_psd(p.a, "a", rep);

  for (int i = 0; i < D; ++i) {
    const Mat& al = p.drivers[i].alpha;
    const std::string name = "alpha" + std::to_string(i + 1);
    if (i >= m) {
      if (al.cwiseAbs().maxCoeff() != 0.0)
        rep.issues.push_back({name + ".free_zero", name + " must vanish for a free coordinate"});
      continue;
    }
    for (int k = 0; k < D; ++k)
      for (int l = 0; l < D; ++l)
        if (((k < m && k != i) || (l < m && l != i)) && al(k, l) != 0.0)
          rep.issues.push_back(
              {name + ".pattern", name + " may touch only its own coordinate and the free block; " +
                                      at(k, l) + " must vanish"});
    check_psd(al, name, rep);
  }

  for (int k = 0; k < m; ++k)
    if (p.b[k] < 0.0)
      rep.issues.push_back({"b.state_space", "b must be a state-space point; " + at(k) + " is negative"});

  for (int i = 0; i < D; ++i) {
    const Vec& beta = p.drivers[i].beta;
    if (i < m) {
      for (int k = 0; k < m; ++k)
        if (k != i && beta[k] < 0.0)
          rep.issues.push_back({"beta.cross_nonneg",
                                "driver " + std::to_string(i + 1) + " drift into " + at(k) +
                                    " must be nonnegative"});
    } else {
      for (int k = 0; k < m; ++k)
        if (beta[k] != 0.0)
          rep.issues.push_back({"beta.free_to_pos_zero",
                                "driver " + std::to_string(i + 1) + " may not push " + at(k)});
    }
  }

  if (p.c < 0.0) rep.issues.push_back({"kill.constant_nonneg", "c must be nonnegative"});
  for (int k = 0; k < D; ++k) {
    if (k < m) {
      if (p.gamma[k] < 0.0)
        rep.issues.push_back({"kill.linear_nonneg", "gamma at " + at(k) + " must be nonnegative"});
    } else if (p.gamma[k] != 0.0) {
      rep.issues.push_back({"kill.free_zero", "gamma must vanish at free " + at(k)});
    }
  }

  if (!p.m_jumps.is_zero() && !p.m_jumps.dist->supported_in_state_space(m))
    rep.issues.push_back({"jumps.base_support", "base jump measure leaves the state space"});
  for (int i = 0; i < D; ++i) {
    const JumpMeasureSpec& jm = p.drivers[i].jumps;
    if (i >= m) {
      if (!jm.is_zero())
        rep.issues.push_back({"jumps.free_zero",
                              "free " + at(i) + " may not carry a jump measure"});
    } else if (!jm.is_zero() && !jm.dist->supported_in_state_space(m)) {
      rep.issues.push_back({"jumps.pos_support",
                            "jump measure of driver " + std::to_string(i + 1) +
                                " leaves the state space"});
    }
  }
  return rep;
}

ModelClass classify(const AdmissibleParamSet& p) {
  p.check_shape();
  const int m = p.dim.m;
  const int D = p.d();
  ModelClass c;
  c.constant_block_zero = p.b.cwiseAbs().maxCoeff() == 0.0 &&
                          p.a.cwiseAbs().maxCoeff() == 0.0 && p.c == 0.0 &&
                          p.m_jumps.is_zero();
  c.free_drift_block_zero = true;
  for (int j = m; j < D; ++j)
    for (int k = m; k < D; ++k)
      if (p.drivers[j].beta[k] != 0.0) c.free_drift_block_zero = false;
  c.killing_free = p.c == 0.0 && p.gamma.cwiseAbs().maxCoeff() == 0.0;
  return c;
}

bool in_state_space(const StateDim& dim, const Vec& x) {
  if (x.size() != dim.d()) return false;
  for (int k = 0; k < dim.m; ++k)
    if (!(x[k] >= 0.0)) return false;
  return x.allFinite();
}

std::vector<int> free_indices(const StateDim& dim) {
  std::vector<int> idx;
  for (int j = dim.m; j < dim.d(); ++j) idx.push_back(j);
  return idx;
}

std::vector<int> free_indices_plus(const StateDim& dim, int k) {
  std::vector<int> idx;
  if (k < dim.m) idx.push_back(k);
  for (int j = dim.m; j < dim.d(); ++j) idx.push_back(j);
  return idx;
}

}  // namespace affine

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "affine/params.hpp"
#include "affine/riccati.hpp"
#include "affine/timechange.hpp"
#include "affine/types.hpp"

namespace affine {

// Monte Carlo estimate of E[exp(<u, X_t>)] at one transform argument and
// time.  std_error is the delta-method value sqrt((Var Re + Var Im)/n).
struct CFEstimate {
  CVec u0;
  double t = 0.0;
  Cplx estimate{0.0, 0.0};
  double std_error = 0.0;
  long n = 0;
};

// Simulates n samples through the full pipeline (reduce, construct, map
// back) and accumulates every (u, t) point.  Accumulation happens in fixed
// 1024-sample chunks merged in chunk order, so the result is bitwise
// reproducible for any worker count.  Samples that fail to converge are
// dropped; a failure rate above 0.1% aborts the run.
std::vector<CFEstimate> mc_cf(const AdmissibleParamSet& p, const Vec& x0,
                              const std::vector<CVec>& u_list,
                              const std::vector<double>& t_list, long n,
                              const SimConfig& cfg);

// Statistical comparison of Monte Carlo estimates against the transform ODE
// prediction.  Each point is scored z = |estimate - predicted| / se; the
// run passes when the number of points with z above the threshold stays
// below the 1% binomial critical count for the nominal exceedance
// probability p0 = P(|N(0,1)| > threshold).
struct CompareReport {
  struct Point {
    CVec u0;
    double t = 0.0;
    Cplx estimate{0.0, 0.0};
    Cplx predicted{0.0, 0.0};
    double se = 0.0;
    double z = 0.0;
    bool exceeds = false;
  };
  std::vector<Point> points;
  int n_exceed = 0;
  int critical = 0;  // smallest exceed count that would fail at the 1% level
  double p0 = 0.0;
  double z_threshold = 0.0;
  bool pass = false;
  std::string to_string() const;
};

CompareReport compare_cf(const std::vector<CFEstimate>& estimates,
                         const AdmissibleParamSet& p, const Vec& x0,
                         const RiccatiOptions& opts = {},
                         double z_threshold = 3.0);

// P(Bin(N, p) >= k) and the smallest k with that tail below alpha.
double binomial_tail_geq(long N, long k, double p);
int binomial_critical(long N, double p, double alpha = 0.01);

// First-moment dynamics d/dt E[X] = Btilde E[X] + ctilde, read off the
// transform derivatives at u = 0.
std::pair<Mat, Vec> mean_dynamics(const AdmissibleParamSet& p);
Vec mean_ode_solution(const AdmissibleParamSet& p, const Vec& x0, double t);

// Simulated coordinate means against the linear ODE solution, flagged
// beyond z_threshold standard errors.
struct MomentReport {
  struct Entry {
    double t = 0.0;
    int coord = 0;
    double estimate = 0.0;
    double se = 0.0;
    double predicted = 0.0;
    double z = 0.0;
    bool flagged = false;
  };
  std::vector<Entry> entries;
  int n_flagged = 0;
  bool pass = false;
  std::string to_string() const;
};

MomentReport moment_check(const AdmissibleParamSet& p, const Vec& x0,
                          const std::vector<double>& t_list, long n,
                          const SimConfig& cfg, double z_threshold = 3.0);

// Deterministic default transform arguments: negative reals on the positive
// block, imaginary values on the real block, odometer order, at most cap.
std::vector<CVec> default_u_grid(const StateDim& dim, int cap = 64);

}  // namespace affine

#pragma once

#include <vector>

#include "affine/params.hpp"
#include "affine/types.hpp"

namespace affine {

// Right-hand sides of the transform ODE system
//
//   d/dt phi = F(psi),  d/dt psi_k = R_k(psi),  phi(0) = 0, psi(0) = u0,
//
// where F collects the state-independent block and R_k the block scaling
// with coordinate k.  Both use the non-conjugating complex pairing.
Cplx eval_F(const AdmissibleParamSet& p, const CVec& u);
CVec eval_R(const AdmissibleParamSet& p, const CVec& u);

// Natural domain of transform arguments: nonpositive real part on the
// positive block, purely imaginary on the real block (within tol).
bool in_frequency_set(const StateDim& dim, const CVec& u, double tol = 1e-8);

struct RiccatiOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double h_init = 1e-4;
  long max_steps = 2000000;
};

struct RiccatiSolution {
  std::vector<double> t;
  std::vector<Cplx> phi;
  CMat psi;  // d x t.size()
  long accepted = 0;
  long rejected = 0;
};

// Adaptive embedded Runge-Kutta integration of (phi, psi) on [0, T].  Steps
// are clipped so every query time is hit exactly.  If psi leaves the
// frequency set the solve aborts with ConvergenceError naming the escape
// time; the transform formula is not trusted beyond that point.
RiccatiSolution solve_riccati(const AdmissibleParamSet& p, const CVec& u0,
                              double T, const RiccatiOptions& opts = {},
                              const std::vector<double>& query_times = {});

// exp(phi(t) + <psi(t), x>) at the requested times.
std::vector<Cplx> cf_affine(const AdmissibleParamSet& p, const CVec& u0,
                            const Vec& x, const std::vector<double>& times,
                            const RiccatiOptions& opts = {});

}  // namespace affine

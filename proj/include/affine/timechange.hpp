#pragma once

#include <cstdint>
#include <vector>

#include "affine/params.hpp"
#include "affine/path.hpp"
#include "affine/rng.hpp"
#include "affine/types.hpp"

namespace affine {

// Exact solve of a single time-change coordinate
//
//   tau'(t) = max(x + g0(tau(t)), 0),   tau(t0) = tau0,
//
// against a piecewise linear profile g0.  Within each linear segment the
// solution is an explicit exponential (or linear) arc, so the only error is
// floating-point roundoff.  The coordinate is absorbed once the field cannot
// produce a representable increment any more; tau stays constant afterwards.
struct DiagonalSolution {
  std::vector<double> t;
  std::vector<double> tau;
  double absorbed_at;  // NaN when the field stayed positive throughout
};

DiagonalSolution solve_diagonal(const ScalarProfile& g0, double x, double t0,
                                double tau0, double T,
                                const std::vector<double>& record_times);

struct PasteSettings {
  int output_nodes = 512;     // uniform record times k*T/output_nodes
  long paste_cap = 1000000;   // hard bound on paste rounds per solve
  std::vector<double> extra_times;  // additional record times in [0, T]
};

// One multivariate solve at a fixed dyadic level.  grid holds the record
// times (uniform nodes, extra times and every paste time, merged); tau is
// m x grid.size() with row i the time change of driver i.
struct TimeChangeSolution {
  std::vector<double> grid;
  Mat tau;
  std::vector<double> paste_times;
  Vec absorbed_at;  // per driver; NaN when never (finally) absorbed
  int level = 0;
  double gap = 0.0;  // sup down-up distance, filled by solve_converged
  long pastes = 0;
};

// Solves the coupled system with every monotone remainder replaced by its
// staircase at the given level (up: left endpoints, minorant; !up: one node
// ahead, majorant).  Between consecutive staircase changes the coordinates
// decouple and each one is advanced exactly against its own profile.
TimeChangeSolution solve_pasted(const std::vector<SplitPath>& splits,
                                const Vec& x, int level, bool up, double T,
                                const PasteSettings& settings);

// Runs matched up/down solves on increasing levels until their gap over the
// deterministic record times is at most tol in every coordinate, then
// returns the minorant solution.  The sandwich ordering and its refinement
// monotonicity are asserted between levels; exceeding level_cap raises
// ConvergenceError.
TimeChangeSolution solve_converged(const std::vector<SplitPath>& splits,
                                   const Vec& x, double tol, int level0,
                                   int level_cap, double T,
                                   const PasteSettings& settings);

// A simulated state path on the record grid.
struct ProcessPath {
  std::vector<double> grid;
  Mat X;  // d x grid.size()
  Vec x0;
  Vec absorbed_at;
  long clamp_count = 0;  // roundoff negatives on the positive block set to 0
  std::vector<double> paste_times;
  double mesh = 0.0;
  StateDim dim;
};

// Evaluates X(t) = x0 + sum_k Z^(k)(tau_k(t)) on the record grid.  drivers
// holds the m positive-block driver paths in coordinate order.
ProcessPath assemble(const std::vector<CadlagPath>& drivers,
                     const TimeChangeSolution& tc, const Vec& x0,
                     StateDim dim);

struct SimConfig {
  double T = 1.0;
  double mesh = 0x1p-10;
  int level0 = 6;
  int level_cap = 22;
  double tau_tol = 1e-4;
  int output_nodes = 512;
  long paste_cap = 1000000;
  std::uint64_t seed = 0;
  int workers = 0;  // 0: decide per call site
  std::vector<double> extra_record_times;
};

// End-to-end sampler for a directly simulable parameter set.  Construction
// validates admissibility, the model class, and x0; run(k) draws sample k
// from a counter-based stream, so samples are reproducible and independent
// of evaluation order.
class Simulator {
 public:
  Simulator(AdmissibleParamSet params, Vec x0, SimConfig cfg);

  ProcessPath run(std::uint64_t sample_index) const;

  const AdmissibleParamSet& params() const { return params_; }
  const SimConfig& config() const { return cfg_; }
  const Vec& x0() const { return x0_; }
  double initial_horizon() const { return horizon0_; }

 private:
  AdmissibleParamSet params_;
  Vec x0_;
  SimConfig cfg_;
  std::vector<LevyTriplet> gen_triplets_;
  double horizon0_;
};

}  // namespace affine

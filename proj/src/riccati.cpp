#include "affine/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace affine {

Cplx eval_F(const AdmissibleParamSet& p, const CVec& u) {
  Cplx v = pairing(p.b, u) + 0.5 * quadratic(u, p.a) - p.c;
  if (!p.m_jumps.is_zero())
    v += jump_integral_term(p.m_jumps, u, free_indices(p.dim));
  return v;
}

CVec eval_R(const AdmissibleParamSet& p, const CVec& u) {
  const int d = p.d();
  CVec out(d);
  for (int k = 0; k < d; ++k) {
    const LevyTriplet& tr = p.drivers[k];
    Cplx v = pairing(tr.beta, u) + 0.5 * quadratic(u, tr.alpha) - p.gamma[k];
    if (!tr.jumps.is_zero())
      v += jump_integral_term(tr.jumps, u, free_indices_plus(p.dim, k));
    out[k] = v;
  }
  return out;
}

bool in_frequency_set(const StateDim& dim, const CVec& u, double tol) {
  for (int i = 0; i < dim.m; ++i)
    if (u[i].real() > tol) return false;
  for (int j = dim.m; j < dim.d(); ++j)
    if (std::abs(u[j].real()) > tol) return false;
  return true;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187,
                 A53 = 64448.0 / 6561, A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247,
                 A64 = 49.0 / 176, A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192,
                 B5 = -2187.0 / 6784, B6 = 11.0 / 84;
constexpr double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920,
                 E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40;

}  // namespace

RiccatiSolution solve_riccati(const AdmissibleParamSet& p, const CVec& u0,
                              double T, const RiccatiOptions& opts,
                              const std::vector<double>& query_times) {
  const int d = p.d();
  if ((int)u0.size() != d) throw std::invalid_argument("u0 dimension mismatch");
  if (!(T >= 0)) throw std::invalid_argument("negative horizon");
  if (!in_frequency_set(p.dim, u0))
    throw DomainError("transform argument outside the admissible frequency set");

  std::vector<double> queries = query_times;
  for (double& q : queries) q = std::min(std::max(q, 0.0), T);
  queries.push_back(0.0);
  queries.push_back(T);
  std::sort(queries.begin(), queries.end());
  queries.erase(std::unique(queries.begin(), queries.end()), queries.end());

  // stacked state y = (phi, psi)
  const int n = d + 1;
  auto rhs = [&](const CVec& y) {
    CVec f(n);
    const CVec psi = y.tail(d);
    f[0] = eval_F(p, psi);
    f.tail(d) = eval_R(p, psi);
    return f;
  };

  RiccatiSolution sol;
  sol.t.reserve(queries.size());
  sol.phi.reserve(queries.size());
  sol.psi.resize(d, (Eigen::Index)queries.size());

  CVec y(n);
  y[0] = Cplx(0, 0);
  y.tail(d) = u0;
  double t = 0.0;

  std::size_t qi = 0;
  auto emit = [&](double at, const CVec& state) {
    sol.t.push_back(at);
    sol.phi.push_back(state[0]);
    sol.psi.col((Eigen::Index)(sol.t.size() - 1)) = state.tail(d);
  };
  while (qi < queries.size() && queries[qi] <= 0.0) {
    emit(0.0, y);
    ++qi;
  }

  if (T == 0.0 || qi >= queries.size()) return sol;

  double h = std::min(opts.h_init, T);
  CVec k1 = rhs(y);
  long steps = 0;

  while (qi < queries.size()) {
    const double target = queries[qi];
    if (t >= target) {
      emit(target, y);
      ++qi;
      continue;
    }
    bool clipped = false;
    double hs = h;
    if (t + hs >= target) {
      hs = target - t;
      clipped = true;
    }
    if (++steps > opts.max_steps)
      throw ConvergenceError("transform ODE exceeded the step budget at t=" +
                             std::to_string(t));

    const CVec k2 = rhs(y + hs * (A21 * k1));
    const CVec k3 = rhs(y + hs * (A31 * k1 + A32 * k2));
    const CVec k4 = rhs(y + hs * (A41 * k1 + A42 * k2 + A43 * k3));
    const CVec k5 = rhs(y + hs * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
    const CVec k6 =
        rhs(y + hs * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
    const CVec ynew =
        y + hs * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
    const CVec k7 = rhs(ynew);
    const CVec errv =
        hs * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);

    double err = 0.0;
    for (int i = 0; i < n; ++i) {
      const double sc =
          opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err = std::max(err, std::abs(errv[i]) / sc);
    }

    const double fac =
        err == 0.0 ? 5.0
                   : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
    const double hprop = hs * fac;
    if (err <= 1.0) {
      t += hs;
      y = ynew;
      k1 = k7;
      ++sol.accepted;
      if (!in_frequency_set(p.dim, y.tail(d)))
        throw ConvergenceError(
            "transform argument left the admissible frequency set near t=" +
            std::to_string(t));
      if (clipped && t == target) {
        emit(target, y);
        ++qi;
      }
      // a clipped step must not drag the working step size down
      if (!clipped || hprop > h) h = hprop;
    } else {
      ++sol.rejected;
      h = hprop;
    }
    if (!(h > 1e-14 * std::max(1.0, t)))
      throw ConvergenceError("transform ODE step size underflowed at t=" +
                             std::to_string(t));
  }
  return sol;
}

std::vector<Cplx> cf_affine(const AdmissibleParamSet& p, const CVec& u0,
                            const Vec& x, const std::vector<double>& times,
                            const RiccatiOptions& opts) {
  if ((int)x.size() != p.d()) throw std::invalid_argument("state dimension mismatch");
  double T = 0.0;
  for (double t : times) T = std::max(T, t);
  RiccatiSolution sol = solve_riccati(p, u0, T, opts, times);
  std::vector<Cplx> out;
  out.reserve(times.size());
  for (double t : times) {
    const auto it = std::lower_bound(sol.t.begin(), sol.t.end(), t);
    if (it == sol.t.end() || *it != t)
      throw ConvergenceError("query time missing from the transform solution");
    const std::size_t k = (std::size_t)(it - sol.t.begin());
    const CVec psik = sol.psi.col((Eigen::Index)k);
    out.push_back(std::exp(sol.phi[k] + pairing(x, psik)));
  }
  return out;
}

}  // namespace affine

#include "affine/jumps.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "affine/faddeeva.hpp"
#include "affine/quadrature.hpp"

namespace affine {

namespace {
constexpr double kSqrt2 = std::numbers::sqrt2;
const double kSqrt2OverPi = std::sqrt(2.0 / std::numbers::pi);
}  // namespace

// ---------------------------------------------------------------------------
// ScalarLaw
// ---------------------------------------------------------------------------

ScalarLaw ScalarLaw::exponential(double mean) {
  if (!(mean > 0.0)) throw std::invalid_argument("ScalarLaw: exponential mean must be > 0");
  return {Kind::Exponential, mean};
}

ScalarLaw ScalarLaw::half_normal(double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("ScalarLaw: half-normal scale must be > 0");
  return {Kind::HalfNormal, scale};
}

bool ScalarLaw::nonnegative_support() const {
  return kind == Kind::Dirac ? param >= 0.0 : true;
}

double ScalarLaw::mean() const {
  switch (kind) {
    case Kind::Dirac: return param;
    case Kind::Exponential: return param;
    case Kind::HalfNormal: return param * kSqrt2OverPi;
  }
  return 0.0;
}

double ScalarLaw::cdf(double c) const {
  if (c < 0.0) return 0.0;
  switch (kind) {
    case Kind::Dirac: return param <= c ? 1.0 : 0.0;
    case Kind::Exponential: return -std::expm1(-c / param);
    case Kind::HalfNormal: return std::erf(c / (param * kSqrt2));
  }
  return 0.0;
}

double ScalarLaw::partial_mean(double c) const {
  if (c < 0.0) return 0.0;
  switch (kind) {
    case Kind::Dirac: return param <= c ? param : 0.0;
    case Kind::Exponential: return param - (c + param) * std::exp(-c / param);
    case Kind::HalfNormal: {
      const double r = c / param;
      return param * kSqrt2OverPi * -std::expm1(-0.5 * r * r);
    }
  }
  return 0.0;
}

double ScalarLaw::density(double x) const {
  switch (kind) {
    case Kind::Exponential: return x < 0.0 ? 0.0 : std::exp(-x / param) / param;
    case Kind::HalfNormal: {
      if (x < 0.0) return 0.0;
      const double r = x / param;
      return kSqrt2OverPi / param * std::exp(-0.5 * r * r);
    }
    case Kind::Dirac: break;
  }
  throw std::logic_error("ScalarLaw::density: point mass has no density");
}

Cplx ScalarLaw::transform(Cplx u) const {
  switch (kind) {
    case Kind::Dirac: return std::exp(u * param);
    case Kind::Exponential:
      if (u.real() * param >= 1.0)
        throw DomainError("exponential transform: Re(u) * mean >= 1 is outside the convergence domain");
      return 1.0 / (1.0 - param * u);
    case Kind::HalfNormal:
      // E[e^{u x}] = w(-i u s / sqrt(2)) with w the scaled complex error
      // function; the argument lies in the closed upper half plane whenever
      // Re(u) <= 0.
      return faddeeva_w(Cplx(0.0, -1.0) * u * (param / kSqrt2));
  }
  return Cplx(0.0, 0.0);
}

double ScalarLaw::sample(double u01) const {
  switch (kind) {
    case Kind::Dirac: return param;
    case Kind::Exponential: return -param * std::log1p(-u01);
    case Kind::HalfNormal: return param * std::abs(normal_quantile(u01));
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// JumpDistribution
// ---------------------------------------------------------------------------

JumpDistribution JumpDistribution::dirac(const Vec& xi) {
  if (xi.size() < 1) throw std::invalid_argument("JumpDistribution: empty point");
  JumpDistribution d;
  d.kind_ = Kind::Dirac;
  d.dim_ = static_cast<int>(xi.size());
  d.xi_ = xi;
  d.finalize();
  return d;
}

JumpDistribution JumpDistribution::exp_coord(int dim, int coord, double mean) {
  if (dim < 1 || coord < 0 || coord >= dim)
    throw std::invalid_argument("JumpDistribution: coordinate out of range");
  if (!(mean > 0.0)) throw std::invalid_argument("JumpDistribution: exponential mean must be > 0");
  JumpDistribution d;
  d.kind_ = Kind::ExpCoord;
  d.dim_ = dim;
  d.coord_ = coord;
  d.exp_mean_ = mean;
  d.finalize();
  return d;
}

JumpDistribution JumpDistribution::product(const std::vector<ScalarLaw>& laws) {
  if (laws.empty()) throw std::invalid_argument("JumpDistribution: empty product");
  int live = 0;
  for (const auto& l : laws)
    if (!l.degenerate()) ++live;
  if (live > 3)
    throw std::invalid_argument(
        "JumpDistribution: more than 3 non-degenerate product factors are not supported");
  JumpDistribution d;
  d.kind_ = Kind::Product;
  d.dim_ = static_cast<int>(laws.size());
  d.laws_ = laws;
  d.finalize();
  return d;
}

JumpDistribution JumpDistribution::mixture(const std::vector<double>& weights,
                                           const std::vector<JumpDistribution>& components) {
  if (weights.empty() || weights.size() != components.size())
    throw std::invalid_argument("JumpDistribution: mixture weights/components mismatch");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw std::invalid_argument("JumpDistribution: mixture weights must be > 0");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("JumpDistribution: mixture weights must sum to 1");
  const int dim = components.front().dim();
  for (const auto& c : components) {
    if (c.dim() != dim)
      throw std::invalid_argument("JumpDistribution: mixture components differ in dimension");
    if (c.kind() == Kind::Mixture)
      throw std::invalid_argument("JumpDistribution: nested mixtures are not supported");
  }
  JumpDistribution d;
  d.kind_ = Kind::Mixture;
  d.dim_ = dim;
  d.weights_ = weights;
  d.components_ = components;
  d.finalize();
  return d;
}

bool JumpDistribution::supported_in_state_space(int m_pos) const {
  switch (kind_) {
    case Kind::Dirac:
      for (int k = 0; k < std::min(m_pos, dim_); ++k)
        if (xi_[k] < 0.0) return false;
      return true;
    case Kind::ExpCoord:
      return true;
    case Kind::Product:
      for (int k = 0; k < std::min(m_pos, dim_); ++k)
        if (!laws_[k].nonnegative_support()) return false;
      return true;
    case Kind::Mixture:
      return std::all_of(components_.begin(), components_.end(),
                         [&](const JumpDistribution& c) { return c.supported_in_state_space(m_pos); });
  }
  return false;
}

Cplx JumpDistribution::transform(const CVec& u) const {
  if (u.size() != dim_) throw std::invalid_argument("JumpDistribution::transform: dimension mismatch");
  switch (kind_) {
    case Kind::Dirac:
      return std::exp(pairing(xi_, u));
    case Kind::ExpCoord:
      return ScalarLaw::exponential(exp_mean_).transform(u[coord_]);
    case Kind::Product: {
      Cplx prod(1.0, 0.0);
      for (int c = 0; c < dim_; ++c) prod *= laws_[c].transform(u[c]);
      return prod;
    }
    case Kind::Mixture: {
      Cplx acc(0.0, 0.0);
      for (std::size_t j = 0; j < components_.size(); ++j)
        acc += weights_[j] * components_[j].transform(u);
      return acc;
    }
  }
  return Cplx(0.0, 0.0);
}

namespace {

// E[target_factor * prod_j 1{sum of squares of live coordinates <= c^2}] for
// independent nonnegative scalar laws; recursion peels one live coordinate per
// level, the innermost level closes with a partial mean or a cdf.
double ball_moment(const std::vector<const ScalarLaw*>& live, double c, int target,
                   std::size_t idx, double tol) {
  if (c <= 0.0) return 0.0;
  const std::size_t r = live.size();
  if (idx == r - 1) {
    return target == static_cast<int>(idx) ? live[idx]->partial_mean(c) : live[idx]->cdf(c);
  }
  const auto integrand = [&](double x) {
    const double rem2 = c * c - x * x;
    if (rem2 <= 0.0) return 0.0;
    const double inner = ball_moment(live, std::sqrt(rem2), target, idx + 1, tol * 0.5);
    const double w = target == static_cast<int>(idx) ? x : 1.0;
    return live[idx]->density(x) * w * inner;
  };
  return integrate_adaptive(integrand, 0.0, c, tol);
}

}  // namespace

void JumpDistribution::finalize() {
  mean_ = Vec::Zero(dim_);
  truncated_mean_ = Vec::Zero(dim_);
  switch (kind_) {
    case Kind::Dirac:
      mean_ = xi_;
      if (xi_.norm() <= 1.0) truncated_mean_ = xi_;
      return;
    case Kind::ExpCoord: {
      const ScalarLaw law = ScalarLaw::exponential(exp_mean_);
      mean_[coord_] = law.mean();
      truncated_mean_[coord_] = law.partial_mean(1.0);
      return;
    }
    case Kind::Product: {
      double const2 = 0.0;  // squared norm of the deterministic block
      std::vector<int> live_idx;
      std::vector<const ScalarLaw*> live;
      for (int c = 0; c < dim_; ++c) {
        mean_[c] = laws_[c].mean();
        if (laws_[c].degenerate()) {
          const2 += laws_[c].param * laws_[c].param;
        } else {
          live_idx.push_back(c);
          live.push_back(&laws_[c]);
        }
      }
      if (live.empty()) {
        if (const2 <= 1.0) truncated_mean_ = mean_;
        return;
      }
      if (const2 >= 1.0) return;  // ball constraint has probability zero
      const double c = std::sqrt(1.0 - const2);
      double prob = 0.0;  // P(|xi| <= 1)
      if (live.size() == 1) {
        prob = live[0]->cdf(c);
      } else {
        prob = ball_moment(live, c, -1, 0, 1e-11);
      }
      for (int k = 0; k < dim_; ++k) {
        if (laws_[k].degenerate()) {
          truncated_mean_[k] = laws_[k].param * prob;
        } else {
          const auto it = std::find(live_idx.begin(), live_idx.end(), k);
          const int t = static_cast<int>(it - live_idx.begin());
          truncated_mean_[k] = live.size() == 1 ? live[0]->partial_mean(c)
                                                : ball_moment(live, c, t, 0, 1e-11);
        }
      }
      return;
    }
    case Kind::Mixture:
      for (std::size_t j = 0; j < components_.size(); ++j) {
        mean_ += weights_[j] * components_[j].mean();
        truncated_mean_ += weights_[j] * components_[j].truncated_mean();
      }
      return;
  }
}

Vec JumpDistribution::sample(const RngStream& s, std::uint64_t base_counter) const {
  Vec out = Vec::Zero(dim_);
  switch (kind_) {
    case Kind::Dirac:
      return xi_;
    case Kind::ExpCoord:
      out[coord_] = ScalarLaw::exponential(exp_mean_).sample(
          rng_uniform(s, base_counter + 1 + coord_));
      return out;
    case Kind::Product:
      for (int c = 0; c < dim_; ++c) {
        if (laws_[c].degenerate()) {
          out[c] = laws_[c].param;
        } else {
          out[c] = laws_[c].sample(rng_uniform(s, base_counter + 1 + c));
        }
      }
      return out;
    case Kind::Mixture: {
      const double u = rng_uniform(s, base_counter);
      double acc = 0.0;
      for (std::size_t j = 0; j < components_.size(); ++j) {
        acc += weights_[j];
        if (u <= acc || j + 1 == components_.size())
          return components_[j].sample(s, base_counter);
      }
      return out;
    }
  }
  return out;
}

JumpDistribution JumpDistribution::lifted(int new_dim, int offset) const {
  if (new_dim < dim_ + offset || offset < 0)
    throw std::invalid_argument("JumpDistribution::lifted: bad target shape");
  switch (kind_) {
    case Kind::Dirac: {
      Vec xi = Vec::Zero(new_dim);
      xi.segment(offset, dim_) = xi_;
      return dirac(xi);
    }
    case Kind::ExpCoord:
      return exp_coord(new_dim, coord_ + offset, exp_mean_);
    case Kind::Product: {
      std::vector<ScalarLaw> laws(new_dim, ScalarLaw::dirac(0.0));
      for (int c = 0; c < dim_; ++c) laws[c + offset] = laws_[c];
      return product(laws);
    }
    case Kind::Mixture: {
      std::vector<JumpDistribution> comps;
      comps.reserve(components_.size());
      for (const auto& c : components_) comps.push_back(c.lifted(new_dim, offset));
      return mixture(weights_, comps);
    }
  }
  throw std::logic_error("JumpDistribution::lifted: unreachable");
}

const Vec& JumpDistribution::dirac_point() const {
  if (kind_ != Kind::Dirac) throw std::logic_error("not a point mass");
  return xi_;
}
int JumpDistribution::exp_coordinate() const {
  if (kind_ != Kind::ExpCoord) throw std::logic_error("not an exponential coordinate law");
  return coord_;
}
double JumpDistribution::exp_mean() const {
  if (kind_ != Kind::ExpCoord) throw std::logic_error("not an exponential coordinate law");
  return exp_mean_;
}
const std::vector<ScalarLaw>& JumpDistribution::product_laws() const {
  if (kind_ != Kind::Product) throw std::logic_error("not a product law");
  return laws_;
}
const std::vector<double>& JumpDistribution::mixture_weights() const {
  if (kind_ != Kind::Mixture) throw std::logic_error("not a mixture");
  return weights_;
}
const std::vector<JumpDistribution>& JumpDistribution::mixture_components() const {
  if (kind_ != Kind::Mixture) throw std::logic_error("not a mixture");
  return components_;
}

// ---------------------------------------------------------------------------
// JumpMeasureSpec
// ---------------------------------------------------------------------------

JumpMeasureSpec JumpMeasureSpec::of(double rate, JumpDistribution d) {
  if (!(rate >= 0.0)) throw std::invalid_argument("JumpMeasureSpec: rate must be >= 0");
  JumpMeasureSpec jm;
  jm.rate = rate;
  if (rate > 0.0) jm.dist = std::make_shared<const JumpDistribution>(std::move(d));
  return jm;
}

void JumpMeasureSpec::check(int d) const {
  if (!(rate >= 0.0) || !std::isfinite(rate))
    throw std::invalid_argument("JumpMeasureSpec: rate must be finite and >= 0");
  if (rate > 0.0) {
    if (!dist) throw std::invalid_argument("JumpMeasureSpec: positive rate without a distribution");
    if (dist->dim() != d) throw std::invalid_argument("JumpMeasureSpec: dimension mismatch");
  }
}

Cplx jump_integral_term(const JumpMeasureSpec& jm, const CVec& u,
                        const std::vector<int>& compensated) {
  if (jm.is_zero()) return Cplx(0.0, 0.0);
  Cplx term = jm.dist->transform(u) - 1.0;
  const Vec& tm = jm.dist->truncated_mean();
  for (int k : compensated) term -= u[k] * tm[k];
  return jm.rate * term;
}

}  // namespace affine

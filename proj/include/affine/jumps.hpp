#ifndef AFFINE_JUMPS_HPP
#define AFFINE_JUMPS_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "affine/rng.hpp"
#include "affine/types.hpp"

namespace affine {

/// One-dimensional building block for product-form jump laws.
/// param means: Dirac -> the point, Exponential -> the mean, HalfNormal -> the
/// scale of the underlying normal (support is the nonnegative half line).
struct ScalarLaw {
  enum class Kind { Dirac, Exponential, HalfNormal };
  Kind kind = Kind::Dirac;
  double param = 0.0;

  static ScalarLaw dirac(double v) { return {Kind::Dirac, v}; }
  static ScalarLaw exponential(double mean);
  static ScalarLaw half_normal(double scale);

  bool degenerate() const { return kind == Kind::Dirac; }
  bool nonnegative_support() const;
  double mean() const;
  double cdf(double c) const;              // P(x <= c), c >= 0
  double partial_mean(double c) const;     // E[x 1{x <= c}], c >= 0
  double density(double x) const;          // only for non-degenerate laws
  Cplx transform(Cplx u) const;            // E[e^{u x}]
  double sample(double u01) const;
};

/// Finite-activity jump size distribution with a closed-form transform.
/// Kinds: a point mass, an exponential on one coordinate, an independent
/// product of scalar laws, and a finite mixture of the former three.
class JumpDistribution {
 public:
  enum class Kind { Dirac, ExpCoord, Product, Mixture };

  static JumpDistribution dirac(const Vec& xi);
  static JumpDistribution exp_coord(int dim, int coord, double mean);
  static JumpDistribution product(const std::vector<ScalarLaw>& laws);
  static JumpDistribution mixture(const std::vector<double>& weights,
                                  const std::vector<JumpDistribution>& components);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }

  /// True when every support point has nonnegative entries on the first
  /// m_pos coordinates.
  bool supported_in_state_space(int m_pos) const;

  /// E[e^{<u, xi>}] with the non-conjugating pairing; throws DomainError when
  /// an exponential factor is evaluated at Re(u_k) * mean >= 1.
  Cplx transform(const CVec& u) const;

  /// First moment E[xi]; finite for every catalog entry.
  const Vec& mean() const { return mean_; }

  /// Truncated first moment E[xi 1{|xi| <= 1}] (Euclidean norm, inclusive).
  const Vec& truncated_mean() const { return truncated_mean_; }

  /// Draw one jump.  Counter slots consumed: slot 0 selects a mixture
  /// component, slot 1+c the draw for coordinate c; the caller advances the
  /// base counter by sample_stride() per jump event.
  Vec sample(const RngStream& s, std::uint64_t base_counter) const;
  std::uint64_t sample_stride() const { return 1 + static_cast<std::uint64_t>(dim_); }

  /// Same law embedded into a larger space: coordinate c becomes c + offset,
  /// new coordinates carry a point mass at zero.
  JumpDistribution lifted(int new_dim, int offset) const;

  // Introspection for serialization.
  const Vec& dirac_point() const;
  int exp_coordinate() const;
  double exp_mean() const;
  const std::vector<ScalarLaw>& product_laws() const;
  const std::vector<double>& mixture_weights() const;
  const std::vector<JumpDistribution>& mixture_components() const;

 private:
  JumpDistribution() = default;
  void finalize();  // computes cached moments

  Kind kind_ = Kind::Dirac;
  int dim_ = 0;
  Vec xi_;                      // Dirac
  int coord_ = 0;               // ExpCoord
  double exp_mean_ = 0.0;       // ExpCoord
  std::vector<ScalarLaw> laws_; // Product
  std::vector<double> weights_;
  std::vector<JumpDistribution> components_;
  Vec mean_;
  Vec truncated_mean_;
};

/// Jump measure = rate * distribution; rate zero means "no jumps".
struct JumpMeasureSpec {
  double rate = 0.0;
  std::shared_ptr<const JumpDistribution> dist;  // required iff rate > 0

  bool is_zero() const { return rate == 0.0; }
  static JumpMeasureSpec none() { return {}; }
  static JumpMeasureSpec of(double rate, JumpDistribution d);
  void check(int d) const;  // structural: rate >= 0, dimension match
};

/// lambda * (E[e^{<u,xi>}] - 1 - sum_{k in comp} u_k E[h_k(xi)]) where
/// h(x) = x 1{|x| <= 1} and comp is the compensated index set.
Cplx jump_integral_term(const JumpMeasureSpec& jm, const CVec& u,
                        const std::vector<int>& compensated);

}  // namespace affine

#endif

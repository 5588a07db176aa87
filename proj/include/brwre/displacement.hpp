#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "brwre/rng.hpp"

namespace brwre {

struct IidMode {
  friend bool operator==(const IidMode&, const IidMode&) = default;
};
struct FullDepMode {
  friend bool operator==(const FullDepMode&, const FullDepMode&) = default;
};
/// Discrete angular measure: atom m (a unit-norm K-vector) carries mass weights[m].
struct AngularMode {
  std::size_t dim = 0;
  std::vector<std::vector<double>> atoms;
  std::vector<double> weights;

  friend bool operator==(const AngularMode&, const AngularMode&) = default;
};

using DependenceMode = std::variant<IidMode, FullDepMode, AngularMode>;

/// Which coordinates of a brood exceed the unit threshold: bit j set means
/// coordinate j lies in (1, inf], clear means (-inf, 1].
struct Pattern {
  std::vector<std::uint8_t> bits;

  std::size_t size() const noexcept { return bits.size(); }
  std::size_t ones() const noexcept;
  /// Pattern of length v read from the low bits of `mask`.
  static Pattern from_mask(std::uint64_t mask, std::size_t v);
};

/// Heavy-tailed displacement law with exact Pareto tails, P(|X_1| > t) = t^-alpha.
class DisplacementModel {
 public:
  static DisplacementModel iid(double alpha, double p);
  static DisplacementModel full_dependence(double alpha, double p);
  /// Weights are rescaled so that the first marginal has unit tail mass; the
  /// balance p is derived from the atoms. Throws when marginals differ.
  static DisplacementModel angular(double alpha, std::vector<std::vector<double>> atoms, std::vector<double> weights);

  double alpha() const noexcept { return alpha_; }
  double p() const noexcept { return p_; }
  const DependenceMode& mode() const noexcept { return mode_; }
  bool is_iid() const noexcept { return std::holds_alternative<IidMode>(mode_); }
  bool is_full_dependence() const noexcept { return std::holds_alternative<FullDepMode>(mode_); }
  bool is_angular() const noexcept { return std::holds_alternative<AngularMode>(mode_); }

  /// Total angular mass c0 (1 for the IID and full-dependence modes).
  double angular_mass() const noexcept { return c0_; }
  /// Radial scale r0 = c0^(1/alpha) of the angular sampler.
  double radial_scale() const noexcept { return r0_; }
  /// Max brood size the model can displace (0 = unbounded).
  std::size_t max_brood() const noexcept;
  /// Smallest t from which P(|X_1| > t) = t^-alpha holds exactly.
  double marginal_floor() const noexcept;

  /// Displacements of the `out.size()` children of one parent.
  void sample_brood(std::span<double> out, Rng& rng) const;
  std::vector<double> sample_brood(std::size_t v, Rng& rng) const;

  friend bool operator==(const DisplacementModel&, const DisplacementModel&);

 private:
  DisplacementModel(double alpha, double p, DependenceMode mode);

  double alpha_;
  double p_;
  DependenceMode mode_;
  double c0_ = 1.0;
  double r0_ = 1.0;
  std::vector<double> atom_cumulative_;
};


/// Normalization B_n = max(1, pi_n^(1/alpha)).
double b_n(double pi_n, double alpha);

/// Limit-measure mass of the pattern set H_{i_1..i_v}. The all-zero pattern
/// contains a neighbourhood of the origin and has infinite mass.
double nu_H(const DisplacementModel& model, const Pattern& pattern);

/// For each k in 0..v, the sum of nu_H over patterns of length v with k ones
/// (entry 0 is left at 0).
std::vector<double> pattern_mass_by_ones(const DisplacementModel& model, std::size_t v);

}  // namespace brwre

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "brwre/rng.hpp"

namespace brwre {

struct Deterministic {
  std::uint32_t k;
};
struct Poisson {
  double lambda;
};
/// P(xi = k) = (1 - q) q^k on k >= 0.
struct Geometric {
  double q;
};
struct Binomial {
  std::uint32_t m;
  double q;
};
struct Finite {
  std::vector<double> pmf;
};

/// A progeny distribution on the nonnegative integers.
///
/// Immutable after construction; every factory validates its parameters and
/// throws `Error(InvalidArgument)` on out-of-range input.
class OffspringLaw {
 public:
  using Family = std::variant<Deterministic, Poisson, Geometric, Binomial, Finite>;

  static OffspringLaw deterministic(std::uint32_t k);
  static OffspringLaw poisson(double lambda);
  static OffspringLaw geometric(double q);
  static OffspringLaw binomial(std::uint32_t m, double q);
  static OffspringLaw finite(std::vector<double> pmf);

  const Family& family() const noexcept { return family_; }
  std::string describe() const;

  double mean() const noexcept { return mean_; }
  double pmf(std::int64_t k) const;
  /// Probability generating function; throws for s outside [0, 1].
  double pgf(double s) const;
  /// Derivative of the pgf on [0, 1].
  double pgf_derivative(double s) const;
  /// Largest attainable value, or nullopt for infinite support.
  std::optional<std::uint64_t> max_support() const;

  std::uint64_t sample(Rng& rng) const;
  /// Sum of `count` independent draws, using the family's convolution closure
  /// where one exists (so cost does not scale with `count`).
  std::uint64_t sample_sum(std::uint64_t count, Rng& rng) const;

  /// Coefficients of f(g(s)) truncated at degree `cap`, where g is the
  /// truncated power series `inner` with nonnegative coefficients.
  std::vector<double> compose_series(std::span<const double> inner, std::size_t cap) const;

  friend bool operator==(const OffspringLaw& a, const OffspringLaw& b);

 private:
  explicit OffspringLaw(Family family);

  Family family_;
  double mean_ = 0.0;
};

bool operator==(const Deterministic& a, const Deterministic& b);
bool operator==(const Poisson& a, const Poisson& b);
bool operator==(const Geometric& a, const Geometric& b);
bool operator==(const Binomial& a, const Binomial& b);
bool operator==(const Finite& a, const Finite& b);

/// Pmf of a generation size truncated at a degree cap; `mass_beyond` holds
/// the probability of exceeding the cap.
struct TruncatedPMF {
  std::vector<double> probs;
  double mass_beyond = 0.0;

  std::size_t degree_cap() const noexcept { return probs.empty() ? 0 : probs.size() - 1; }
  double at(std::size_t r) const noexcept { return r < probs.size() ? probs[r] : 0.0; }
};

inline constexpr std::size_t kDefaultDegreeCap = 4096;

/// P(Z_i = 0) for the branching process whose generation-j particles
/// reproduce according to env_rev[j]. An empty input means Z_0 = 1, so 0.
double extinct_prob_by_gen(std::span<const OffspringLaw> env_rev);

/// Truncated pmf of Z_i for the same generation ordering as
/// `extinct_prob_by_gen`, by iterated composition of truncated pgfs.
TruncatedPMF pmf_Zi(std::span<const OffspringLaw> env_rev, std::size_t degree_cap = kDefaultDegreeCap);

/// Product of two truncated power series, keeping degrees <= cap.
std::vector<double> multiply_series(std::span<const double> a, std::span<const double> b, std::size_t cap);

}  // namespace brwre

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "brwre/offspring.hpp"
#include "brwre/rng.hpp"

namespace brwre {

/// Finite mixture over offspring laws; one environment step draws a law.
class EnvironmentModel {
 public:
  EnvironmentModel(std::vector<OffspringLaw> support, std::vector<double> weights);

  const std::vector<OffspringLaw>& support() const noexcept { return support_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  std::size_t draw_index(Rng& rng) const;
  /// True when every law has P(xi = 0) = 0.
  bool leafless() const;
  /// Max support over all laws, or nullopt if any law is unbounded.
  std::optional<std::uint64_t> max_progeny() const;

  friend bool operator==(const EnvironmentModel&, const EnvironmentModel&) = default;

 private:
  std::vector<OffspringLaw> support_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

/// A realized environment (Y_0, ..., Y_{n-1}) with pi[i] = prod_{j<i} mean(Y_j).
struct EnvSequence {
  std::vector<OffspringLaw> laws;
  std::vector<std::size_t> law_index;
  std::vector<double> pi;
  /// log pi[i], finite where pi overflows.
  std::vector<double> log_pi;

  std::size_t size() const noexcept { return laws.size(); }
};

EnvSequence sample_env(const EnvironmentModel& model, std::size_t n, Rng& rng);

/// Builds an EnvSequence from explicit laws (indices left empty).
EnvSequence make_env(std::vector<OffspringLaw> laws);

/// An environment sequence revealed one step at a time from its own stream.
class LazyEnvironment {
 public:
  LazyEnvironment(const EnvironmentModel& model, Rng rng);

  /// Law Y_i, drawing further steps as needed.
  const OffspringLaw& law(std::size_t i);
  /// pi_i = prod_{j<i} mean(Y_j), pi_0 = 1.
  double pi(std::size_t i);
  std::size_t revealed() const noexcept { return seq_.size(); }
  const EnvSequence& sequence() const noexcept { return seq_; }

 private:
  void extend_to(std::size_t n);

  EnvironmentModel model_;
  Rng rng_;
  EnvSequence seq_;
};

struct AssumptionReport {
  enum class Verdict { SupercriticalOK, Violated };

  double e_log_mean = 0.0;
  double e_abs_log_p_gt1 = 0.0;
  double kesten_stigum_term = 0.0;
  /// Bound on the truncated tail of the Kesten-Stigum sums.
  double kesten_stigum_tail_bound = 0.0;
  std::int64_t n_samples = 0;
  Verdict verdict = Verdict::Violated;
  std::string reason;

  bool ok() const noexcept { return verdict == Verdict::SupercriticalOK; }
};

/// Evaluates the supercriticality, P(xi > 1) and Kesten-Stigum moment
/// conditions for a mixture environment. Everything is closed form except the
/// Kesten-Stigum moment of infinite-support laws, which is summed up to the
/// first k past the mean with pmf(k) < 1e-14 and carries a geometric tail
/// bound. `n_samples` reports the number of summed pmf terms; `mc_samples`
/// only caps that count.
AssumptionReport check_assumptions(const EnvironmentModel& model, std::int64_t mc_samples, Rng& rng);

}  // namespace brwre

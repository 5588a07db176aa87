#pragma once

#include <cstdint>
#include <vector>

#include "brwre/displacement.hpp"
#include "brwre/environment.hpp"
#include "brwre/offspring.hpp"
#include "brwre/point_measure.hpp"
#include "brwre/rng.hpp"

namespace brwre {

struct LimitConfig {
  /// Relative tolerance for truncating sums over generations.
  double series_tol = 1e-9;
  std::size_t max_terms = 10000;
  /// W is approximated by Z_m / pi_m with m = w_horizon.
  std::size_t w_horizon = 30;
  std::size_t degree_cap = kDefaultDegreeCap;
  /// Smallest radial Poisson point kept in limit-process draws.
  double u_min = 0.05;
  std::size_t n_limit_samples = 10000;

  void validate() const;
  friend bool operator==(const LimitConfig&, const LimitConfig&) = default;
};

struct SeriesValue {
  double value = 0.0;
  double tail_bound = 0.0;
  std::size_t terms_used = 0;
  /// Summands, index i holds the generation-i term.
  std::vector<double> terms;
};

struct WDraw {
  double w = 0.0;
  /// |Z_m/pi_m - Z_{m-5}/pi_{m-5}|, a visible proxy for the horizon bias.
  double drift = 0.0;
  std::uint64_t restarts = 0;
};

/// Z_m / pi_m of a BPRE in a fresh environment; restarts on extinction when
/// conditioning. Once Z exceeds 2^40 the ratio is frozen (relative noise
/// below 1e-6).
WDraw estimate_W(const EnvironmentModel& env_model, std::size_t m, bool condition_on_survival, Rng& rng);

/// Quenched generation-size laws for the time-reversed prefixes of a lazily
/// revealed environment Y'. Generation i uses Y'_{i-1} for its first
/// reproduction step and Y'_0 for its last.
class QuenchedEnvironment {
 public:
  QuenchedEnvironment(const EnvironmentModel& model, Rng env_rng, std::size_t degree_cap = kDefaultDegreeCap);

  const OffspringLaw& law(std::size_t i) { return env_.law(i); }
  /// pi_i(Y') = E(Z_i | Y'_{i-1:0}).
  double pi(std::size_t i) { return env_.pi(i); }
  /// P(Z_i = 0 | Y'_{i-1:0}).
  double extinct(std::size_t i);
  /// P(Z_i = 1 | Y'_{i-1:0}).
  double prob_one(std::size_t i);
  const TruncatedPMF& pmf(std::size_t i);
  /// Exact draw of Z_i by forward simulation through Y'_{i-1}, ..., Y'_0.
  std::uint64_t draw_Z(std::size_t i, Rng& rng);
  /// Draw of Z_i conditioned on Z_i >= 1, by rejection.
  std::uint64_t draw_Z_positive(std::size_t i, Rng& rng);

  std::vector<std::size_t> law_indices() const { return env_.sequence().law_index; }
  std::size_t degree_cap() const noexcept { return degree_cap_; }

 private:
  void extend_extinction(std::size_t i);
  std::uint64_t simulate_Z(std::size_t i, Rng& rng);

  LazyEnvironment env_;
  std::size_t degree_cap_;
  std::vector<double> extinct_;   // e0(i)
  std::vector<double> prob_one_;  // P(Z_i = 1)
  std::vector<TruncatedPMF> pmfs_;
};

enum class Constant { C0, C1, C2, C3 };

/// Quenched constant for the environment Y' held by `env`, summed until the
/// realized-growth tail bound drops below series_tol * value. Throws
/// Error(NonGeometricGrowth) if that does not happen within max_terms.
SeriesValue constant_C(Constant which, QuenchedEnvironment& env, const LimitConfig& cfg);

/// Cluster size R >= 1 for tail-independent displacements.
std::uint64_t sample_cluster_R(QuenchedEnvironment& env, const SeriesValue& c3, Rng& rng);
std::uint64_t sample_cluster_R(QuenchedEnvironment& env, const LimitConfig& cfg, Rng& rng);

struct ClusterVR {
  std::uint64_t v = 0;
  std::vector<std::uint64_t> r;
  std::size_t generation = 0;
};

/// Cluster (V, R_1..R_V) with R != 0 for dependent displacements.
ClusterVR sample_cluster_VR(QuenchedEnvironment& env, const SeriesValue& c1, Rng& rng);
ClusterVR sample_cluster_VR(QuenchedEnvironment& env, const LimitConfig& cfg, Rng& rng);

enum class QRoute {
  /// W p C3 (IID) or W p C1 (full dependence); angular models use General.
  Shortcut,
  /// Pattern-mass series, requires bounded progeny.
  General,
};

struct QSample {
  double q = 0.0;
  double w = 0.0;
  /// Q / W: the environment-dependent factor.
  double env_factor = 0.0;
  double tail_bound = 0.0;
  std::vector<std::size_t> env_prime_summary;
};

/// Environment factor of Q via the pattern-mass series.
SeriesValue q_general_series(const DisplacementModel& disp, const EnvironmentModel& env_model, QuenchedEnvironment& env,
                             const LimitConfig& cfg);

/// One draw of the mixing variable Q. W and Y' come from two words of `rng`,
/// so both routes see identical W and Y' for the same rng state.
QSample sample_Q(const DisplacementModel& disp, const EnvironmentModel& env_model, const LimitConfig& cfg, Rng& rng,
                 QRoute route = QRoute::Shortcut);

std::vector<QSample> sample_Q_batch(const DisplacementModel& disp, const EnvironmentModel& env_model,
                                    const LimitConfig& cfg, std::uint64_t seed, std::size_t count,
                                    QRoute route = QRoute::Shortcut, unsigned threads = 1);

/// E exp(-x^-alpha Q) over the samples.
double limit_max_cdf(const std::vector<QSample>& samples, double x, double alpha);

struct LimitDraw {
  PointMeasure measure;
  /// (C W)^(1/alpha), the random scale of the draw.
  double scale = 0.0;
  double w = 0.0;
  double constant = 0.0;
  /// Atoms are complete for |location| > coverage.
  double coverage = 0.0;
};

/// One draw of the limit extremal process.
LimitDraw sample_limit_pp(const DisplacementModel& disp, const EnvironmentModel& env_model, const LimitConfig& cfg,
                          Rng& rng);

std::vector<LimitDraw> sample_limit_pp_batch(const DisplacementModel& disp, const EnvironmentModel& env_model,
                                             const LimitConfig& cfg, std::uint64_t seed, std::size_t count,
                                             unsigned threads = 1);

/// (W, C3(Y'), P(R = 1 | Y')) for the tail-independent joint laws.
struct WC3Sample {
  double w = 0.0;
  double c3 = 0.0;
  double r_one = 0.0;
};

WC3Sample sample_w_c3(const EnvironmentModel& env_model, const LimitConfig& cfg, Rng& rng);
std::vector<WC3Sample> sample_w_c3_batch(const EnvironmentModel& env_model, const LimitConfig& cfg,
                                         std::uint64_t seed, std::size_t count, unsigned threads = 1);

/// P(min > -y, max <= x) in the tail-independent limit.
double joint_min_max_cdf(const std::vector<WC3Sample>& samples, double x, double y, double alpha, double p);

/// P(M1 <= y, M2 <= x), 0 < x <= y, by the Poisson formula that treats every
/// Poisson point as a single particle. Throws Error(ArgumentOrder) if x > y.
double top_two_cdf(const std::vector<WC3Sample>& samples, double x, double y, double alpha, double p);

/// Same event with cluster multiplicities: a single point in (x, y] only
/// keeps M2 <= x when its cluster has size one.
double top_two_cdf_clustered(const std::vector<WC3Sample>& samples, double x, double y, double alpha, double p);

}  // namespace brwre

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "brwre/brw_sim.hpp"
#include "brwre/displacement.hpp"
#include "brwre/environment.hpp"
#include "brwre/limit_laws.hpp"
#include "brwre/point_measure.hpp"

namespace brwre {

struct SimulationSection {
  std::vector<std::size_t> n{14};
  std::size_t replications = 2000;
  double retain_delta = 0.05;
  std::size_t top_k = 2;
  std::uint64_t population_cap = kDefaultPopulationCap;
  double jump_eta = 0.1;
  bool condition_on_survival = true;
  /// Generations counted as "late" by the early-jump diagnostic.
  std::size_t rho = 10;

  friend bool operator==(const SimulationSection&, const SimulationSection&) = default;
};

struct ComparisonSection {
  std::vector<double> grid{0.5, 0.75, 1.0, 1.5, 2.0, 3.0};
  double ks_tol = 0.05;
  double tv_tol = 0.05;
  double laplace_tol = 0.05;
  /// x in the count statistic N(x, inf).
  double count_threshold = 1.0;
  std::size_t limit_pp_draws = 2000;

  friend bool operator==(const ComparisonSection&, const ComparisonSection&) = default;
};

struct ExperimentConfig {
  EnvironmentModel environment{{OffspringLaw::deterministic(2)}, {1.0}};
  DisplacementModel displacement = DisplacementModel::iid(2.0, 1.0);
  SimulationSection simulation;
  LimitConfig limit;
  ComparisonSection comparison;
  std::uint64_t seed = 0;
  std::string output_dir = "out";

  /// Simulation settings for one entry of the n list.
  SimConfig sim_config(std::size_t n) const;
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

nlohmann::json law_to_json(const OffspringLaw& law);
OffspringLaw law_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const ExperimentConfig& cfg);
/// Missing sections and fields take their defaults; invalid values throw
/// Error(ConfigError).
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// FNV-1a 64 of the canonical JSON dump.
std::uint64_t config_hash(const ExperimentConfig& cfg);
std::string header_line(const ExperimentConfig& cfg);

/// Formats a double with 17 significant digits.
std::string fmt_double(double x);

struct RunContext {
  std::filesystem::path out_dir;
  unsigned threads = 1;
  std::ostream* log = nullptr;
};

/// The two sides of a finite-n versus limit comparison.
struct ComparisonSource {
  std::function<double(double)> max_cdf;
  std::vector<std::uint64_t> counts;
  std::vector<PointMeasure> measures;
  /// Test functions must stay above this level.
  double retention_floor = 0.0;
};

struct GridRow {
  double x = 0.0;
  double cdf_a = 0.0;
  double cdf_b = 0.0;
  double laplace_a = 0.0;
  double laplace_b = 0.0;
};

struct ComparisonReport {
  std::vector<GridRow> rows;
  double ks = 0.0;
  double count_tv = 0.0;
  double max_laplace_diff = 0.0;
  bool pass = false;
};

ComparisonReport compare_sources(const ComparisonSource& a, const ComparisonSource& b, const ComparisonSection& cmp);

/// Subcommands; each returns the process exit code.
int cmd_check(const ExperimentConfig& cfg, const RunContext& ctx);
int cmd_simulate(const ExperimentConfig& cfg, const RunContext& ctx);
int cmd_limit(const ExperimentConfig& cfg, const RunContext& ctx);
int cmd_compare(const ExperimentConfig& cfg, const RunContext& ctx);
int cmd_diagnostics(const ExperimentConfig& cfg, const RunContext& ctx);

}  // namespace brwre

#pragma once

#include <cstdint>
#include <vector>

#include "brwre/displacement.hpp"
#include "brwre/environment.hpp"
#include "brwre/point_measure.hpp"
#include "brwre/rng.hpp"

namespace brwre {

inline constexpr std::uint64_t kDefaultPopulationCap = std::uint64_t{1} << 24;

struct SimConfig {
  std::size_t n = 1;
  EnvironmentModel env;
  DisplacementModel disp;
  /// Atoms with |S(v)| / B_n > retain_delta are kept in the extremal process.
  double retain_delta = 0.05;
  std::size_t top_k = 2;
  std::uint64_t population_cap = kDefaultPopulationCap;
  bool condition_on_survival = true;
  /// A displacement is "big" for the two-jump diagnostic when |X| > jump_eta * B_n.
  double jump_eta = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct JumpDiagnostics {
  /// Generation-n particles whose ancestral path carries >= 2 big displacements.
  std::uint64_t paths_with_two_big_jumps = 0;
  /// Per generation, displacements with |X| > retain_delta * B_n.
  std::vector<std::uint64_t> big_jump_generations;

  friend bool operator==(const JumpDiagnostics&, const JumpDiagnostics&) = default;
};

struct BrwOutcome {
  EnvSequence env_seq;
  /// Generation sizes Z_0..Z_n (shorter if the final attempt died out).
  std::vector<std::uint64_t> z;
  double b_n = 1.0;
  /// Retained generation-n positions divided by B_n.
  PointMeasure atoms;
  /// Largest positions, descending (raw, not normalized).
  std::vector<double> top;
  /// Smallest positions, ascending (raw).
  std::vector<double> bottom;
  double w_n = 0.0;
  JumpDiagnostics diagnostics;
  /// Generation index of the largest |displacement| in the tree.
  std::size_t max_jump_generation = 0;
  double max_jump = 0.0;
  std::uint64_t restarts = 0;
  /// Tagged empty outcome: Z_n = 0 without survival conditioning.
  bool extinct = false;
};

/// One replication; `rng` drives environment, genealogy and displacements in
/// that order per generation. Throws Error(PopulationCapExceeded).
BrwOutcome simulate(const SimConfig& config, Rng& rng);

/// Replication `rep` with its stream derived from (config.seed, rep).
BrwOutcome simulate_replication(const SimConfig& config, std::uint64_t rep);

std::vector<BrwOutcome> simulate_batch(const SimConfig& config, std::size_t replications, unsigned threads = 1);

/// N_n: the normalized retained positions.
PointMeasure extremal_process(const BrwOutcome& outcome);

struct DiagnosticsSummary {
  /// Replications with at least one two-big-jump path.
  double two_jump_fraction = 0.0;
  /// Share of big jumps in generations 0..n-rho-1.
  double early_jump_fraction = 0.0;
  /// Mean share of generation-n particles on two-big-jump paths.
  double two_jump_path_share = 0.0;
};

DiagnosticsSummary diagnostics_report(const std::vector<BrwOutcome>& outcomes, std::size_t rho);

}  // namespace brwre

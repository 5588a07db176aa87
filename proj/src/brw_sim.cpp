#include "brwre/brw_sim.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>

#include "brwre/errors.hpp"
#include "brwre/parallel.hpp"

namespace brwre {
namespace {

// Bounded top-k selection over a stream of positions.
class ExtremeTracker {
 public:
  explicit ExtremeTracker(std::size_t k) : k_(k) {}

  void push(double s) {
    if (high_.size() < k_) high_.push(s);
    else if (s > high_.top()) {
      high_.pop();
      high_.push(s);
    }
    if (low_.size() < k_) low_.push(s);
    else if (s < low_.top()) {
      low_.pop();
      low_.push(s);
    }
  }

  std::vector<double> top() {
    std::vector<double> out;
    while (!high_.empty()) {
      out.push_back(high_.top());
      high_.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

  std::vector<double> bottom() {
    std::vector<double> out;
    while (!low_.empty()) {
      out.push_back(low_.top());
      low_.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

 private:
  std::size_t k_;
  std::priority_queue<double, std::vector<double>, std::greater<>> high_;
  std::priority_queue<double> low_;
};

}  // namespace

void SimConfig::validate() const {
  require(n >= 1, "simulation needs n >= 1");
  require(population_cap >= 1, "population_cap must be >= 1");
  require(retain_delta > 0.0, "retain_delta must be > 0");
  require(jump_eta > 0.0, "jump_eta must be > 0");
  require(top_k >= 2, "top_k must be >= 2");
  if (disp.is_angular()) {
    const auto progeny = env.max_progeny();
    require(progeny.has_value() && *progeny <= disp.max_brood(),
            "angular displacements need offspring support bounded by the angular dimension");
  }
}

BrwOutcome simulate(const SimConfig& config, Rng& rng) {
  config.validate();
  const std::size_t n = config.n;

  std::vector<double> positions;
  std::vector<std::uint8_t> jumps;
  std::vector<double> next_positions;
  std::vector<std::uint8_t> next_jumps;
  std::vector<double> brood;

  for (std::uint64_t restarts = 0;; ++restarts) {
    BrwOutcome out;
    out.restarts = restarts;
    out.env_seq = sample_env(config.env, n, rng);
    out.b_n = b_n(out.env_seq.pi[n], config.disp.alpha());
    out.diagnostics.big_jump_generations.assign(n, 0);
    out.z.assign(1, 1);

    const double eta_threshold = config.jump_eta * out.b_n;
    const double retain_threshold = config.retain_delta * out.b_n;
    ExtremeTracker extremes(config.top_k);

    positions.assign(1, 0.0);
    jumps.assign(1, 0);
    bool died = false;

    for (std::size_t gen = 0; gen < n; ++gen) {
      const OffspringLaw& law = out.env_seq.laws[gen];
      const bool last = gen + 1 == n;
      next_positions.clear();
      next_jumps.clear();
      std::uint64_t count = 0;
      auto& histogram = out.diagnostics.big_jump_generations[gen];

      for (std::size_t parent = 0; parent < positions.size(); ++parent) {
        const std::uint64_t v = law.sample(rng);
        if (v == 0) continue;
        count += v;
        if (count > config.population_cap)
          fail(ErrorKind::PopulationCapExceeded, "generation " + std::to_string(gen + 1) + " exceeds population cap " +
                                                     std::to_string(config.population_cap));
        brood.resize(v);
        config.disp.sample_brood(brood, rng);
        const double base = positions[parent];
        const std::uint8_t base_jumps = jumps[parent];
        for (double x : brood) {
          const double ax = std::abs(x);
          const std::uint8_t child_jumps =
              static_cast<std::uint8_t>(std::min(255, base_jumps + (ax > eta_threshold ? 1 : 0)));
          if (ax > retain_threshold) ++histogram;
          if (ax > out.max_jump) {
            out.max_jump = ax;
            out.max_jump_generation = gen;
          }
          const double s = base + x;
          if (last) {
            extremes.push(s);
            const double normalized = s / out.b_n;
            if (std::abs(normalized) > config.retain_delta) out.atoms.add(normalized);
            if (child_jumps >= 2) ++out.diagnostics.paths_with_two_big_jumps;
          } else {
            next_positions.push_back(s);
            next_jumps.push_back(child_jumps);
          }
        }
      }
      out.z.push_back(count);
      if (count == 0) {
        died = true;
        break;
      }
      if (!last) {
        positions.swap(next_positions);
        jumps.swap(next_jumps);
      }
    }

    if (died) {
      if (config.condition_on_survival) continue;
      out.extinct = true;
      out.atoms = PointMeasure{};
      out.diagnostics.paths_with_two_big_jumps = 0;
      out.w_n = 0.0;
      return out;
    }
    out.atoms.canonicalize();
    out.top = extremes.top();
    out.bottom = extremes.bottom();
    out.w_n = static_cast<double>(out.z[n]) / out.env_seq.pi[n];
    return out;
  }
}

BrwOutcome simulate_replication(const SimConfig& config, std::uint64_t rep) {
  Rng rng = derive_rng(config.seed, rep);
  return simulate(config, rng);
}

std::vector<BrwOutcome> simulate_batch(const SimConfig& config, std::size_t replications, unsigned threads) {
  config.validate();
  std::vector<BrwOutcome> outcomes(replications);
  parallel_for(replications, threads, [&](std::size_t rep) { outcomes[rep] = simulate_replication(config, rep); });
  return outcomes;
}

PointMeasure extremal_process(const BrwOutcome& outcome) { return outcome.atoms; }

DiagnosticsSummary diagnostics_report(const std::vector<BrwOutcome>& outcomes, std::size_t rho) {
  require(!outcomes.empty(), "diagnostics need at least one outcome");
  DiagnosticsSummary summary;
  std::size_t surviving = 0;
  std::size_t with_two = 0;
  std::uint64_t early = 0;
  std::uint64_t total = 0;
  double share = 0.0;
  for (const auto& outcome : outcomes) {
    if (outcome.extinct) continue;
    ++surviving;
    if (outcome.diagnostics.paths_with_two_big_jumps > 0) ++with_two;
    const auto& hist = outcome.diagnostics.big_jump_generations;
    const std::size_t n = hist.size();
    const std::size_t early_end = rho >= n ? 0 : n - rho;
    for (std::size_t g = 0; g < n; ++g) {
      total += hist[g];
      if (g < early_end) early += hist[g];
    }
    share += static_cast<double>(outcome.diagnostics.paths_with_two_big_jumps) / static_cast<double>(outcome.z.back());
  }
  if (surviving == 0) return summary;
  summary.two_jump_fraction = static_cast<double>(with_two) / static_cast<double>(surviving);
  summary.early_jump_fraction = total == 0 ? 0.0 : static_cast<double>(early) / static_cast<double>(total);
  summary.two_jump_path_share = share / static_cast<double>(surviving);
  return summary;
}

}  // namespace brwre

#include "naive_tree.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "brwre/errors.hpp"

namespace brwre::testing {

namespace {

struct Node {
  std::int64_t parent;
  double displacement;
};

}  // namespace

SimConfig random_config(Rng& rng, std::uint64_t seed) {
  const std::vector<OffspringLaw> pool{OffspringLaw::deterministic(1), OffspringLaw::deterministic(2),
                                       OffspringLaw::deterministic(3), OffspringLaw::poisson(1.6),
                                       OffspringLaw::poisson(2.4),     OffspringLaw::geometric(0.6),
                                       OffspringLaw::binomial(3, 0.7), OffspringLaw::finite({0.2, 0.3, 0.5})};
  const std::size_t laws = 1 + rng() % 3;
  std::vector<OffspringLaw> support;
  std::vector<double> weights;
  bool bounded = true;
  for (std::size_t i = 0; i < laws; ++i) {
    support.push_back(pool[rng() % pool.size()]);
    weights.push_back(1.0 / laws);
    bounded = bounded && support.back().max_support().has_value() && *support.back().max_support() <= 3;
  }
  weights.back() = 1.0 - (laws - 1) * (1.0 / laws);
  const double alpha = 0.5 + 2.5 * uniform01(rng);
  const double p = uniform01(rng);
  DisplacementModel disp = DisplacementModel::iid(alpha, p);
  switch (rng() % 3) {
    case 1:
      disp = DisplacementModel::full_dependence(alpha, p);
      break;
    case 2:
      if (bounded) {
        const double c = 1.0 / std::sqrt(3.0);
        disp = DisplacementModel::angular(alpha, {{c, c, c}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {-c, -c, -c}},
                                          {1.0, 0.5, 0.5, 0.5, 0.7});
      }
      break;
    default:
      break;
  }
  return SimConfig{.n = 1 + rng() % 8,
                   .env = EnvironmentModel(support, weights),
                   .disp = disp,
                   .retain_delta = 0.01 + 0.2 * uniform01(rng),
                   .top_k = 2 + rng() % 4,
                   .population_cap = 10000,
                   .condition_on_survival = rng() % 4 != 0,
                   .jump_eta = 0.05 + 0.5 * uniform01(rng),
                   .seed = seed};
}

NaiveResult naive_simulate(const SimConfig& config, Rng& rng) {
  const std::size_t n = config.n;
  for (std::uint64_t restarts = 0;; ++restarts) {
    NaiveResult out;
    out.restarts = restarts;
    const EnvSequence env = sample_env(config.env, n, rng);
    out.b_n = b_n(env.pi[n], config.disp.alpha());

    std::vector<Node> nodes{{-1, 0.0}};
    std::vector<std::size_t> generation{0};
    out.z.push_back(1);
    for (std::size_t gen = 0; gen < n && !generation.empty(); ++gen) {
      std::vector<std::size_t> children;
      for (std::size_t id : generation) {
        const std::uint64_t v = env.laws[gen].sample(rng);
        if (v == 0) continue;
        if (children.size() + v > config.population_cap)
          fail(ErrorKind::PopulationCapExceeded, "naive tree exceeds population cap");
        for (double x : config.disp.sample_brood(v, rng)) {
          children.push_back(nodes.size());
          nodes.push_back({static_cast<std::int64_t>(id), x});
        }
      }
      out.z.push_back(children.size());
      generation = std::move(children);
    }

    if (generation.empty()) {
      if (config.condition_on_survival) continue;
      out.extinct = true;
      return out;
    }

    const double eta = config.jump_eta * out.b_n;
    std::vector<double> leaves;
    std::map<double, std::uint64_t> grouped;
    for (std::size_t id : generation) {
      std::vector<double> path;
      for (std::int64_t cur = static_cast<std::int64_t>(id); nodes[cur].parent >= 0; cur = nodes[cur].parent)
        path.push_back(nodes[cur].displacement);
      double s = 0.0;
      int big = 0;
      for (auto it = path.rbegin(); it != path.rend(); ++it) {
        s = s + *it;
        if (std::abs(*it) > eta) ++big;
      }
      if (big >= 2) ++out.paths_with_two_big_jumps;
      leaves.push_back(s);
      const double normalized = s / out.b_n;
      if (std::abs(normalized) > config.retain_delta) ++grouped[normalized];
    }

    std::sort(leaves.begin(), leaves.end());
    const std::size_t k = std::min(config.top_k, leaves.size());
    out.bottom.assign(leaves.begin(), leaves.begin() + static_cast<std::ptrdiff_t>(k));
    out.top.assign(leaves.rbegin(), leaves.rbegin() + static_cast<std::ptrdiff_t>(k));
    for (auto it = grouped.rbegin(); it != grouped.rend(); ++it) out.atoms.add(it->first, it->second);
    return out;
  }
}

}  // namespace brwre::testing

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "brwre/environment.hpp"
#include "brwre/errors.hpp"
#include "brwre/stats.hpp"

using namespace brwre;

namespace {

EnvironmentModel poisson_mix() {
  return EnvironmentModel({OffspringLaw::poisson(2.0), OffspringLaw::poisson(3.0)}, {0.5, 0.5});
}

}  // namespace

TEST_CASE("sample_env: deterministic product") {
  Rng rng = derive_rng(1, 1);
  const EnvironmentModel model({OffspringLaw::deterministic(2)}, {1.0});
  const auto env = sample_env(model, 10, rng);
  CHECK(env.pi[10] == 1024.0);
  CHECK(env.pi[0] == 1.0);
  CHECK(env.size() == 10);

  const auto single = sample_env(poisson_mix(), 1, rng);
  REQUIRE(single.pi.size() == 2);
  CHECK(single.pi[1] == single.laws[0].mean());
}

TEST_CASE("sample_env: log growth rate") {
  Rng rng = derive_rng(1, 2);
  const std::size_t n = 10000;
  const auto env = sample_env(poisson_mix(), n, rng);
  const double rate = env.log_pi[n] / n;
  const double sd = (std::log(3.0) - std::log(2.0)) / 2.0;
  CHECK(std::abs(rate - std::log(6.0) / 2.0) < 3.0 * sd / std::sqrt(double(n)));
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(env.log_pi[i + 1] - env.log_pi[i] - std::log(env.laws[i].mean())) > 1e-12) {
      FAIL("log pi increment differs from the law mean at " << i);
    }
    if (i < 300 && std::abs(env.pi[i + 1] / env.pi[i] - env.laws[i].mean()) > 1e-12 * env.laws[i].mean()) {
      FAIL("pi ratio differs from the law mean at " << i);
    }
    CHECK(env.laws[i] == poisson_mix().support()[env.law_index[i]]);
  }
}

TEST_CASE("environment model validation") {
  CHECK_THROWS_AS(EnvironmentModel({}, {}), Error);
  CHECK_THROWS_AS(EnvironmentModel({OffspringLaw::poisson(2.0)}, {0.9}), Error);
  CHECK_THROWS_AS(EnvironmentModel({OffspringLaw::poisson(2.0)}, {0.5, 0.5}), Error);
  CHECK_THROWS_AS(EnvironmentModel({OffspringLaw::poisson(2.0), OffspringLaw::poisson(1.0)}, {1.2, -0.2}), Error);
}

TEST_CASE("draw_index frequencies follow the weights") {
  Rng rng = derive_rng(4, 0);
  const EnvironmentModel model({OffspringLaw::deterministic(1), OffspringLaw::deterministic(2),
                                OffspringLaw::deterministic(3)},
                               {0.2, 0.5, 0.3});
  std::vector<std::uint64_t> counts(3, 0);
  const int n = 50000;
  for (int i = 0; i < n; ++i) ++counts[model.draw_index(rng)];
  const std::vector<double> probs{0.2, 0.5, 0.3};
  CHECK(chi_square_gof(counts, probs).p_value > 0.001);
  CHECK(model.max_progeny() == 3u);
  CHECK(model.leafless());
  CHECK(!poisson_mix().leafless());
}

TEST_CASE("check_assumptions examples") {
  Rng rng = derive_rng(5, 0);
  const auto det2 = check_assumptions(EnvironmentModel({OffspringLaw::deterministic(2)}, {1.0}), 1000, rng);
  CHECK(det2.e_log_mean == doctest::Approx(std::log(2.0)));
  CHECK(det2.ok());

  const auto det1 = check_assumptions(EnvironmentModel({OffspringLaw::deterministic(1)}, {1.0}), 1000, rng);
  CHECK(det1.e_log_mean == 0.0);
  CHECK(!det1.ok());
  CHECK(!det1.reason.empty());

  const auto mix = check_assumptions(poisson_mix(), 1000, rng);
  CHECK(mix.e_log_mean == doctest::Approx(0.5 * (std::log(2.0) + std::log(3.0))).epsilon(1e-12));
  CHECK(mix.ok());
  CHECK(std::isfinite(mix.e_abs_log_p_gt1));
  CHECK(std::isfinite(mix.kesten_stigum_term));
  CHECK(mix.kesten_stigum_tail_bound >= 0.0);
}

TEST_CASE("check_assumptions closed-form moments") {
  Rng rng = derive_rng(5, 1);
  const auto law = OffspringLaw::finite({0.25, 0.25, 0.5});
  const auto rep = check_assumptions(EnvironmentModel({law}, {1.0}), 100, rng);
  CHECK(rep.e_abs_log_p_gt1 == doctest::Approx(std::log(2.0)));
  CHECK(rep.kesten_stigum_term == doctest::Approx(0.5 * 2.0 * std::log(2.0) / 1.25));

  const auto pois = check_assumptions(EnvironmentModel({OffspringLaw::poisson(2.0)}, {1.0}), 100, rng);
  double ks = 0.0;
  double p = std::exp(-2.0);
  for (int k = 1; k < 200; ++k) {
    p *= 2.0 / k;
    if (k >= 2) ks += p * k * std::log(double(k));
  }
  CHECK(pois.kesten_stigum_term == doctest::Approx(ks / 2.0).epsilon(1e-10));
  CHECK(pois.e_abs_log_p_gt1 == doctest::Approx(-std::log(1.0 - 3.0 * std::exp(-2.0))).epsilon(1e-12));

  const auto never = check_assumptions(
      EnvironmentModel({OffspringLaw::deterministic(1), OffspringLaw::deterministic(5)}, {0.5, 0.5}), 100, rng);
  CHECK(!never.ok());
}

TEST_CASE("pi of a sequence is invariant under reversal") {
  Rng rng = derive_rng(6, 0);
  const std::size_t n = 40;
  std::vector<double> forward;
  std::vector<double> reversed;
  for (int t = 0; t < 2000; ++t) {
    forward.push_back(std::log(sample_env(poisson_mix(), n, rng).pi[n]));
    auto laws = sample_env(poisson_mix(), n, rng).laws;
    std::reverse(laws.begin(), laws.end());
    reversed.push_back(std::log(make_env(laws).pi[n]));
  }
  CHECK(ks_two_sample(forward, reversed).p_value > 0.001);
}

TEST_CASE("pi grows at the advertised rate") {
  Rng rng = derive_rng(6, 1);
  const EnvironmentModel model({OffspringLaw::poisson(0.8), OffspringLaw::poisson(3.0)}, {0.5, 0.5});
  const double mu = check_assumptions(model, 100, rng).e_log_mean;
  REQUIRE(mu > 0.0);
  double prev = 0.0;
  for (std::size_t n : {50u, 200u}) {
    int hits = 0;
    const int reps = 2000;
    for (int t = 0; t < reps; ++t) hits += sample_env(model, n, rng).pi[n] >= std::exp(n * mu / 2.0);
    const double freq = hits / double(reps);
    CHECK(freq >= prev);
    prev = freq;
  }
  CHECK(prev > 0.99);
}

TEST_CASE("lazy environment extends on demand") {
  LazyEnvironment env(poisson_mix(), derive_rng(7, 0));
  const double p5 = env.pi(5);
  CHECK(env.revealed() >= 5);
  double product = 1.0;
  for (std::size_t i = 0; i < 5; ++i) product *= env.law(i).mean();
  CHECK(p5 == doctest::Approx(product));
  CHECK(env.pi(0) == 1.0);
}

#include <doctest.h>

#include <cmath>
#include <numeric>

#include "brwre/errors.hpp"
#include "brwre/offspring.hpp"
#include "brwre/stats.hpp"

using namespace brwre;

namespace {

std::vector<OffspringLaw> all_families() {
  return {OffspringLaw::deterministic(3), OffspringLaw::poisson(1.7), OffspringLaw::geometric(0.6),
          OffspringLaw::binomial(4, 0.35), OffspringLaw::finite({0.2, 0.1, 0.3, 0.4})};
}

}  // namespace

TEST_CASE("sample: point mass and frequencies") {
  Rng rng = derive_rng(1, 0);
  const auto det = OffspringLaw::deterministic(2);
  for (int i = 0; i < 100; ++i) CHECK(det.sample(rng) == 2);

  const auto pois = OffspringLaw::poisson(2.0);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += static_cast<double>(pois.sample(rng));
  CHECK(std::abs(sum / n - 2.0) < 3.0 * std::sqrt(2.0 / n));

  const auto fin = OffspringLaw::finite({0.5, 0.0, 0.5});
  int twos = 0;
  for (int i = 0; i < n; ++i) {
    const auto v = fin.sample(rng);
    REQUIRE((v == 0 || v == 2));
    twos += v == 2;
  }
  CHECK(std::abs(twos / double(n) - 0.5) < 3.0 * std::sqrt(0.25 / n));
}

TEST_CASE("sample_sum matches the mean of independent draws") {
  Rng rng = derive_rng(2, 0);
  for (const auto& law : all_families()) {
    const int n = 20000;
    const std::uint64_t count = 7;
    double sum = 0.0;
    double sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double s = static_cast<double>(law.sample_sum(count, rng));
      sum += s;
      sq += s * s;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(std::max(sq / n - mean * mean, 1e-12));
    CHECK_MESSAGE(std::abs(mean - 7.0 * law.mean()) <= 4.0 * sd / std::sqrt(n) + 1e-12, law.describe());
  }
}

TEST_CASE("pgf closed forms") {
  CHECK(OffspringLaw::poisson(2.0).pgf(0.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
  const auto det = OffspringLaw::deterministic(2);
  for (double s : {0.0, 0.3, 0.7, 1.0}) CHECK(det.pgf(s) == doctest::Approx(s * s));
  CHECK(det.mean() == 2.0);
  CHECK(OffspringLaw::finite({0.25, 0.5, 0.25}).mean() == doctest::Approx(1.0));
  CHECK(OffspringLaw::geometric(0.5).pgf(0.5) == doctest::Approx(0.5 / (1.0 - 0.25)));
  CHECK(OffspringLaw::binomial(3, 0.5).pgf(0.0) == doctest::Approx(0.125));
}

TEST_CASE("pgf rejects arguments outside the unit interval") {
  const auto law = OffspringLaw::poisson(1.0);
  CHECK_THROWS_AS(law.pgf(-0.1), Error);
  CHECK_THROWS_AS(law.pgf(1.5), Error);
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(OffspringLaw::poisson(0.0), Error);
  CHECK_THROWS_AS(OffspringLaw::geometric(1.0), Error);
  CHECK_THROWS_AS(OffspringLaw::geometric(0.0), Error);
  CHECK_THROWS_AS(OffspringLaw::binomial(0, 0.5), Error);
  CHECK_THROWS_AS(OffspringLaw::finite({0.5, 0.4}), Error);
  CHECK_THROWS_AS(OffspringLaw::finite({1.0}), Error);
  CHECK_THROWS_AS(OffspringLaw::deterministic(0), Error);
}

TEST_CASE("pgf properties for every family") {
  for (const auto& law : all_families()) {
    CAPTURE(law.describe());
    CHECK(law.pgf(1.0) == doctest::Approx(1.0).epsilon(1e-13));
    double prev = -1.0;
    for (int i = 0; i <= 50; ++i) {
      const double v = law.pgf(i / 50.0);
      CHECK(v >= prev);
      prev = v;
    }
    const double h = 1e-6;
    CHECK(law.pgf_derivative(1.0) == doctest::Approx(law.mean()).epsilon(1e-12));
    CHECK((law.pgf(1.0) - law.pgf(1.0 - h)) / h == doctest::Approx(law.mean()).epsilon(1e-4));
    double s = 0.0;
    double m = 0.0;
    for (int k = 0; k < 200; ++k) {
      s += law.pmf(k);
      m += k * law.pmf(k);
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m == doctest::Approx(law.mean()).epsilon(1e-10));
    CHECK(law.pmf(-1) == 0.0);
  }
}

TEST_CASE("extinct_prob_by_gen examples") {
  std::vector<OffspringLaw> det(5, OffspringLaw::deterministic(2));
  CHECK(extinct_prob_by_gen(det) == 0.0);
  const std::vector<OffspringLaw> one{OffspringLaw::poisson(2.0)};
  CHECK(extinct_prob_by_gen(one) == doctest::Approx(0.135335283).epsilon(1e-8));
  const std::vector<OffspringLaw> two{OffspringLaw::poisson(2.0), OffspringLaw::poisson(3.0)};
  CHECK(std::abs(extinct_prob_by_gen(two) - std::exp(2.0 * (std::exp(-3.0) - 1.0))) < 1e-12);
  CHECK(extinct_prob_by_gen(std::span<const OffspringLaw>{}) == 0.0);
}

TEST_CASE("extinction is nondecreasing as generations are appended") {
  std::vector<OffspringLaw> env;
  const std::vector<OffspringLaw> pool{OffspringLaw::poisson(1.5), OffspringLaw::geometric(0.7),
                                       OffspringLaw::finite({0.3, 0.2, 0.5})};
  double prev = 0.0;
  for (int i = 0; i < 12; ++i) {
    env.push_back(pool[i % pool.size()]);
    const double e = extinct_prob_by_gen(env);
    CHECK(e >= prev - 1e-15);
    prev = e;
  }
}

TEST_CASE("pmf_Zi examples") {
  std::vector<OffspringLaw> det(3, OffspringLaw::deterministic(2));
  const auto eight = pmf_Zi(det, 64);
  CHECK(eight.at(8) == 1.0);
  CHECK(eight.mass_beyond == doctest::Approx(0.0));

  const std::vector<OffspringLaw> fin{OffspringLaw::finite({0.5, 0.0, 0.5})};
  const auto copy = pmf_Zi(fin, 16);
  CHECK(copy.at(0) == doctest::Approx(0.5));
  CHECK(copy.at(1) == doctest::Approx(0.0));
  CHECK(copy.at(2) == doctest::Approx(0.5));

  const std::vector<OffspringLaw> pois{OffspringLaw::poisson(2.0)};
  const auto p = pmf_Zi(pois, 50);
  double fact = 1.0;
  for (int k = 0; k <= 20; ++k) {
    if (k > 0) fact *= k;
    CHECK(p.at(k) == doctest::Approx(std::exp(-2.0) * std::pow(2.0, k) / fact).epsilon(1e-12));
  }
  CHECK(p.mass_beyond < 1e-12);

  const auto unit = pmf_Zi(std::span<const OffspringLaw>{}, 8);
  CHECK(unit.at(1) == 1.0);
}

TEST_CASE("pmf_Zi agrees with extinction and with the mean product") {
  const std::vector<OffspringLaw> env{OffspringLaw::poisson(1.8), OffspringLaw::binomial(3, 0.6),
                                      OffspringLaw::geometric(0.55), OffspringLaw::finite({0.1, 0.6, 0.3})};
  const auto pmf = pmf_Zi(env, 512);
  REQUIRE(pmf.mass_beyond < 1e-9);
  CHECK(std::abs(pmf.at(0) - extinct_prob_by_gen(env)) < 1e-9);
  double mean = 0.0;
  double total = pmf.mass_beyond;
  for (std::size_t r = 0; r < pmf.probs.size(); ++r) {
    mean += r * pmf.probs[r];
    total += pmf.probs[r];
    CHECK(pmf.probs[r] >= 0.0);
  }
  double product = 1.0;
  for (const auto& law : env) product *= law.mean();
  CHECK(mean <= product * (1 + 1e-12));
  CHECK(mean == doctest::Approx(product).epsilon(1e-8));
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("pmf_Zi mean converges to the product as the cap grows") {
  const std::vector<OffspringLaw> env{OffspringLaw::poisson(3.0), OffspringLaw::poisson(3.0), OffspringLaw::poisson(3.0)};
  double product = 27.0;
  double prev_gap = 1e300;
  for (std::size_t cap : {16u, 64u, 256u, 1024u}) {
    const auto pmf = pmf_Zi(env, cap);
    double mean = 0.0;
    for (std::size_t r = 0; r < pmf.probs.size(); ++r) mean += r * pmf.probs[r];
    const double gap = product - mean;
    CHECK(gap >= -1e-9);
    CHECK(gap <= prev_gap + 1e-12);
    prev_gap = gap;
  }
  CHECK(prev_gap < 1e-8);
}

TEST_CASE("pmf_Zi agrees with direct simulation for every family") {
  Rng rng = derive_rng(3, 0);
  for (const auto& law : all_families()) {
    CAPTURE(law.describe());
    // env_rev[0] governs generation 0; simulate forward in that order.
    const std::vector<OffspringLaw> env{law, OffspringLaw::poisson(1.2)};
    const auto pmf = pmf_Zi(env, 256);
    const int n = 100000;
    std::vector<std::uint64_t> counts(64, 0);
    for (int t = 0; t < n; ++t) {
      std::uint64_t z = env[0].sample(rng);
      z = env[1].sample_sum(z, rng);
      if (z < counts.size()) ++counts[z];
    }
    for (std::size_t r = 0; r < 20; ++r) {
      const double p = pmf.at(r);
      const double sigma = std::sqrt(p * (1 - p) / n);
      CHECK(std::abs(counts[r] / double(n) - p) <= 3.5 * sigma + 1e-5);
    }
  }
}

TEST_CASE("compose_series evaluates to the composed pgf") {
  const std::vector<double> inner{0.1, 0.3, 0.2, 0.4};
  auto inner_pgf = [&](double s) { return inner[0] + s * (inner[1] + s * (inner[2] + s * inner[3])); };
  for (const auto& law : all_families()) {
    CAPTURE(law.describe());
    const auto series = law.compose_series(inner, 2048);
    for (double s : {0.0, 0.25, 0.5, 0.9}) {
      double v = 0.0;
      double pw = 1.0;
      for (double c : series) {
        v += c * pw;
        pw *= s;
      }
      CHECK(v == doctest::Approx(law.pgf(inner_pgf(s))).epsilon(1e-11));
    }
  }
}

TEST_CASE("multiply_series truncates at the cap") {
  const std::vector<double> a{1, 2, 3};
  const std::vector<double> b{4, 5};
  const auto full = multiply_series(a, b, 10);
  REQUIRE(full.size() == 4);
  CHECK(full[0] == 4);
  CHECK(full[1] == 13);
  CHECK(full[2] == 22);
  CHECK(full[3] == 15);
  CHECK(multiply_series(a, b, 1).size() == 2);
}

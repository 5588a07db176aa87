#include <doctest.h>

#include <cmath>

#include "brwre/displacement.hpp"
#include "brwre/errors.hpp"

using namespace brwre;

namespace {

Pattern pat(std::initializer_list<int> bits) {
  Pattern p;
  for (int b : bits) p.bits.push_back(static_cast<std::uint8_t>(b));
  return p;
}

DisplacementModel diagonal(std::size_t k, double alpha) {
  const double c = 1.0 / std::sqrt(double(k));
  return DisplacementModel::angular(alpha, {std::vector<double>(k, c)}, {1.0});
}

// nu of the union over coordinates j <= v of {x_j > 1}, from the atoms directly.
double union_mass(const DisplacementModel& model, std::size_t v) {
  const auto& ang = std::get<AngularMode>(model.mode());
  double total = 0.0;
  for (std::size_t m = 0; m < ang.atoms.size(); ++m) {
    double best = 0.0;
    for (std::size_t j = 0; j < v; ++j) best = std::max(best, ang.atoms[m][j]);
    if (best > 0.0) total += ang.weights[m] * std::pow(best, model.alpha());
  }
  return total;
}

}  // namespace

TEST_CASE("sample_brood: full dependence repeats one value") {
  Rng rng = derive_rng(10, 0);
  const auto model = DisplacementModel::full_dependence(2.0, 0.5);
  for (int t = 0; t < 100; ++t) {
    const auto x = model.sample_brood(3, rng);
    REQUIRE(x.size() == 3);
    CHECK(x[0] == x[1]);
    CHECK(x[1] == x[2]);
    CHECK(std::abs(x[0]) >= 1.0);
  }
}

TEST_CASE("sample_brood: exact Pareto tail") {
  Rng rng = derive_rng(10, 1);
  const auto model = DisplacementModel::iid(2.0, 1.0);
  const int n = 1000000;
  int above = 0;
  int above3 = 0;
  for (int t = 0; t < n; ++t) {
    const double x = model.sample_brood(1, rng)[0];
    REQUIRE(x >= 1.0);
    above += x > 10.0;
    above3 += x > 3.0;
  }
  CHECK(std::abs(above / double(n) - 0.01) < 3.0 * std::sqrt(0.01 * 0.99 / n));
  CHECK(std::abs(above3 / double(n) - 1.0 / 9.0) < 3.0 * std::sqrt((1.0 / 9.0) * (8.0 / 9.0) / n));
}

TEST_CASE("sample_brood: sign balance") {
  Rng rng = derive_rng(10, 2);
  const auto model = DisplacementModel::iid(1.5, 0.3);
  const int n = 200000;
  int positive = 0;
  for (int t = 0; t < n; ++t) positive += model.sample_brood(1, rng)[0] > 0.0;
  CHECK(std::abs(positive / double(n) - 0.3) < 3.0 * std::sqrt(0.21 / n));
}

TEST_CASE("sample_brood: axis atoms give one nonzero coordinate") {
  Rng rng = derive_rng(10, 3);
  const auto model = DisplacementModel::angular(2.0, {{1.0, 0.0}, {0.0, 1.0}}, {1.0, 1.0});
  for (int t = 0; t < 1000; ++t) {
    const auto x = model.sample_brood(2, rng);
    CHECK(((x[0] != 0.0) + (x[1] != 0.0)) == 1);
  }
  CHECK_THROWS_AS(model.sample_brood(3, rng), Error);
}

TEST_CASE("angular marginals are standardized") {
  Rng rng = derive_rng(10, 4);
  const double s = 1.0 / std::sqrt(2.0);
  const auto model = DisplacementModel::angular(2.0, {{s, s}, {-s, -s}, {1.0, 0.0}, {0.0, 1.0}}, {1.0, 3.0, 2.0, 2.0});
  const auto& ang = std::get<AngularMode>(model.mode());
  double first = 0.0;
  for (std::size_t m = 0; m < ang.atoms.size(); ++m) first += ang.weights[m] * std::pow(std::abs(ang.atoms[m][0]), 2.0);
  CHECK(first == doctest::Approx(1.0));
  const int n = 400000;
  const double t0 = 4.0 * model.marginal_floor();
  int above = 0;
  for (int i = 0; i < n; ++i) above += std::abs(model.sample_brood(2, rng)[1]) > t0;
  const double expect = std::pow(t0, -2.0);
  CHECK(std::abs(above / double(n) - expect) < 3.0 * std::sqrt(expect * (1 - expect) / n));
}

TEST_CASE("angular construction validation") {
  CHECK_THROWS_AS(DisplacementModel::angular(2.0, {{1.0, 1.0}}, {1.0}), Error);
  CHECK_THROWS_AS(DisplacementModel::angular(2.0, {{1.0, 0.0}}, {1.0}), Error);
  CHECK_THROWS_AS(DisplacementModel::angular(2.0, {{1.0, 0.0}, {0.0, -1.0}}, {1.0, 1.0}), Error);
  CHECK_THROWS_AS(DisplacementModel::angular(2.0, {{1.0, 0.0}, {0.0, 1.0}}, {1.0, -1.0}), Error);
  CHECK_THROWS_AS(DisplacementModel::iid(0.0, 0.5), Error);
  CHECK_THROWS_AS(DisplacementModel::iid(2.0, 1.5), Error);
}

TEST_CASE("b_n examples") {
  CHECK(b_n(1024.0, 2.0) == doctest::Approx(32.0));
  CHECK(b_n(1.0, 3.0) == 1.0);
  CHECK(b_n(0.5, 2.0) == 1.0);
  CHECK(b_n(std::pow(6.0, 10.0), 3.0) == doctest::Approx(std::pow(6.0, 10.0 / 3.0)).epsilon(1e-14));
  CHECK(b_n(std::pow(6.0, 10.0), 3.0) == doctest::Approx(392.498).epsilon(1e-5));
}

TEST_CASE("nu_H examples") {
  const auto iid = DisplacementModel::iid(2.0, 0.7);
  CHECK(nu_H(iid, pat({1, 0})) == doctest::Approx(0.7));
  CHECK(nu_H(iid, pat({1, 1})) == 0.0);
  const auto full = DisplacementModel::full_dependence(2.0, 0.7);
  CHECK(nu_H(full, pat({1, 1})) == doctest::Approx(0.7));
  CHECK(nu_H(full, pat({1, 0})) == 0.0);
  const auto diag = diagonal(2, 2.0);
  CHECK(diag.angular_mass() == doctest::Approx(2.0));
  CHECK(nu_H(diag, pat({1, 1})) == doctest::Approx(1.0));
  CHECK(nu_H(diag, pat({0, 1})) == doctest::Approx(0.0));
  CHECK(std::isinf(nu_H(iid, pat({0, 0}))));
}

TEST_CASE("full dependence is the diagonal angular model") {
  for (std::size_t k : {1u, 2u, 3u, 4u}) {
    const auto diag = diagonal(k, 1.5);
    const auto full = DisplacementModel::full_dependence(1.5, 1.0);
    for (std::uint64_t mask = 1; mask < (1ULL << k); ++mask) {
      const auto p = Pattern::from_mask(mask, k);
      CHECK(nu_H(diag, p) == doctest::Approx(nu_H(full, p)).epsilon(1e-12));
    }
  }
}

TEST_CASE("pattern masses decompose the union") {
  const double a = 0.6;
  const double b = 0.8;
  const double d = 1.0 / std::sqrt(3.0);
  const auto model =
      DisplacementModel::angular(2.0, {{a, b, 0.0}, {0.0, a, b}, {b, 0.0, a}, {d, d, d}}, {1.0, 1.0, 1.0, 1.0});
  for (std::size_t v = 1; v <= 3; ++v) {
    double sum = 0.0;
    for (std::uint64_t mask = 1; mask < (1ULL << v); ++mask) {
      const double m = nu_H(model, Pattern::from_mask(mask, v));
      CHECK(m >= 0.0);
      sum += m;
    }
    CHECK(sum == doctest::Approx(union_mass(model, v)).epsilon(1e-12));
    const double single = nu_H(model, Pattern::from_mask(1, 1));
    CHECK(sum <= v * single + 1e-12);
  }
}

TEST_CASE("pattern_mass_by_ones groups nu_H by number of ones") {
  const auto iid = DisplacementModel::iid(2.0, 0.4);
  const auto by = pattern_mass_by_ones(iid, 3);
  REQUIRE(by.size() == 4);
  CHECK(by[1] == doctest::Approx(1.2));
  CHECK(by[2] == 0.0);
  CHECK(by[3] == 0.0);
  const auto full = pattern_mass_by_ones(DisplacementModel::full_dependence(2.0, 0.4), 30);
  CHECK(full[30] == doctest::Approx(0.4));
  CHECK(full[1] == 0.0);
  const auto big = pattern_mass_by_ones(iid, 25);
  CHECK(big[1] == doctest::Approx(25 * 0.4));
}

TEST_CASE("angular nu_H matches sampled exceedance frequencies") {
  Rng rng = derive_rng(10, 5);
  const double a = 0.6;
  const double b = 0.8;
  const auto model = DisplacementModel::angular(2.0, {{a, b}, {b, a}, {1.0, 0.0}, {0.0, 1.0}}, {1.0, 1.0, 0.5, 0.5});
  const int n = 1000000;
  for (double u : {10.0, 30.0}) {
    std::vector<std::uint64_t> counts(4, 0);
    for (int t = 0; t < n; ++t) {
      const auto x = model.sample_brood(2, rng);
      const std::uint64_t mask = (x[0] / u > 1.0 ? 1 : 0) | (x[1] / u > 1.0 ? 2 : 0);
      ++counts[mask];
    }
    const double scale = u * u;
    for (std::uint64_t mask = 1; mask < 4; ++mask) {
      const double expect = nu_H(model, Pattern::from_mask(mask, 2)) / scale;
      const double sigma = std::sqrt(expect * (1 - expect) / n);
      CHECK(std::abs(counts[mask] / double(n) - expect) <= 3.0 * sigma + 1e-9);
    }
  }
}

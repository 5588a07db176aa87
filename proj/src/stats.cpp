#include "brwre/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "brwre/errors.hpp"

namespace brwre {

Ecdf::Ecdf(std::vector<double> values) : sorted_(std::move(values)) {
  require(!sorted_.empty(), "ECDF needs at least one value");
  std::sort(sorted_.begin(), sorted_.end());
}

double Ecdf::operator()(double x) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double ks_distance(const Ecdf& ecdf, const std::function<double(double)>& oracle, std::span<const double> grid) {
  require(!grid.empty(), "KS grid must be nonempty");
  double worst = 0.0;
  for (double x : grid) worst = std::max(worst, std::abs(ecdf(x) - oracle(x)));
  return worst;
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsTwoSample ks_two_sample(std::span<const double> a, std::span<const double> b) {
  require(!a.empty() && !b.empty(), "two-sample KS needs nonempty samples");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] <= x) ++i;
    while (j < sb.size() && sb[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  const double sq = std::sqrt(ne);
  return {d, kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d)};
}

double count_distribution_tv(std::span<const std::uint64_t> counts_a, std::span<const std::uint64_t> counts_b) {
  require(!counts_a.empty() && !counts_b.empty(), "count TV needs nonempty samples");
  std::vector<double> pa(kCountCap + 2, 0.0);
  std::vector<double> pb(kCountCap + 2, 0.0);
  for (auto c : counts_a) pa[std::min<std::uint64_t>(c, kCountCap + 1)] += 1.0;
  for (auto c : counts_b) pb[std::min<std::uint64_t>(c, kCountCap + 1)] += 1.0;
  double tv = 0.0;
  for (std::size_t k = 0; k < pa.size(); ++k)
    tv += std::abs(pa[k] / static_cast<double>(counts_a.size()) - pb[k] / static_cast<double>(counts_b.size()));
  return std::min(1.0, 0.5 * tv);
}

TestFunction TestFunction::above(double x, double theta) {
  require(x > 0.0, "IndicatorAbove needs x > 0");
  return {Kind::IndicatorAbove, x, x, theta};
}

TestFunction TestFunction::below(double y, double theta) {
  require(y > 0.0, "IndicatorBelow needs y > 0");
  return {Kind::IndicatorBelow, y, y, theta};
}

TestFunction TestFunction::bump(double a, double b, double theta) {
  require(a > 0.0 && b > a, "Bump needs 0 < a < b");
  return {Kind::Bump, a, b, theta};
}

double TestFunction::operator()(double location) const {
  switch (kind) {
    case Kind::IndicatorAbove: return location > a ? theta : 0.0;
    case Kind::IndicatorBelow: return location < -a ? theta : 0.0;
    case Kind::Bump: return theta * std::clamp((std::abs(location) - a) / (b - a), 0.0, 1.0);
  }
  return 0.0;
}

double laplace_estimate(const std::vector<PointMeasure>& measures, const TestFunction& f, double retention_floor) {
  if (f.support_floor() < retention_floor)
    fail(ErrorKind::SupportBelowRetention, "test function support reaches below the retention threshold");
  if (measures.empty()) return 1.0;
  double acc = 0.0;
  for (const auto& measure : measures) {
    double exponent = 0.0;
    for (const Atom& atom : measure.atoms()) {
      const double value = f(atom.location);
      if (value != 0.0) exponent += static_cast<double>(atom.multiplicity) * value;
    }
    acc += std::exp(-exponent);
  }
  return acc / static_cast<double>(measures.size());
}

ChiSquareResult chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> probs,
                               double min_expected) {
  require(observed.size() == probs.size() || observed.size() == probs.size() + 1,
          "observed needs one cell per probability, plus an optional remainder cell");
  const double total = static_cast<double>(std::accumulate(observed.begin(), observed.end(), std::uint64_t{0}));
  require(total > 0.0, "chi-square needs observations");

  std::vector<double> obs_cells;
  std::vector<double> exp_cells;
  double obs_acc = 0.0;
  double exp_acc = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    obs_acc += static_cast<double>(observed[k]);
    exp_acc += probs[k] * total;
    if (exp_acc >= min_expected) {
      obs_cells.push_back(obs_acc);
      exp_cells.push_back(exp_acc);
      obs_acc = exp_acc = 0.0;
    }
  }
  const double prob_sum = std::accumulate(probs.begin(), probs.end(), 0.0);
  exp_acc += std::max(0.0, 1.0 - prob_sum) * total;
  if (observed.size() > probs.size()) obs_acc += static_cast<double>(observed.back());
  if (exp_acc > 0.0 || obs_acc > 0.0) {
    if (exp_acc >= min_expected || exp_cells.empty()) {
      obs_cells.push_back(obs_acc);
      exp_cells.push_back(exp_acc);
    } else {
      obs_cells.back() += obs_acc;
      exp_cells.back() += exp_acc;
    }
  }

  ChiSquareResult out;
  for (std::size_t c = 0; c < obs_cells.size(); ++c) {
    if (exp_cells[c] <= 0.0) {
      if (obs_cells[c] > 0.0) out.statistic = std::numeric_limits<double>::infinity();
      continue;
    }
    const double diff = obs_cells[c] - exp_cells[c];
    out.statistic += diff * diff / exp_cells[c];
  }
  out.dof = obs_cells.size() > 1 ? obs_cells.size() - 1 : 1;
  if (std::isinf(out.statistic)) {
    out.p_value = 0.0;
  } else {
    const boost::math::chi_squared dist(static_cast<double>(out.dof));
    out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
  }
  return out;
}

}  // namespace brwre

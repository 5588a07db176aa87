#include "brwre/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "brwre/errors.hpp"

namespace brwre {

EnvironmentModel::EnvironmentModel(std::vector<OffspringLaw> support, std::vector<double> weights)
    : support_(std::move(support)), weights_(std::move(weights)) {
  require(!support_.empty(), "environment support must be nonempty");
  require(support_.size() == weights_.size(), "environment weights must match support length");
  double total = 0.0;
  for (double w : weights_) {
    require(std::isfinite(w) && w >= 0.0, "environment weights must be nonnegative");
    total += w;
  }
  require(std::abs(total - 1.0) <= 1e-12, "environment weights must sum to 1 within 1e-12");
  cumulative_.resize(weights_.size());
  std::partial_sum(weights_.begin(), weights_.end(), cumulative_.begin());
}

std::size_t EnvironmentModel::draw_index(Rng& rng) const {
  if (support_.size() == 1) return 0;
  const double u = uniform01(rng) * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), support_.size() - 1);
}

bool EnvironmentModel::leafless() const {
  return std::all_of(support_.begin(), support_.end(), [](const OffspringLaw& law) { return law.pmf(0) == 0.0; });
}

std::optional<std::uint64_t> EnvironmentModel::max_progeny() const {
  std::uint64_t best = 0;
  for (const auto& law : support_) {
    const auto m = law.max_support();
    if (!m) return std::nullopt;
    best = std::max(best, *m);
  }
  return best;
}

EnvSequence sample_env(const EnvironmentModel& model, std::size_t n, Rng& rng) {
  require(n >= 1, "environment length must be >= 1");
  EnvSequence seq;
  seq.laws.reserve(n);
  seq.law_index.reserve(n);
  seq.pi.reserve(n + 1);
  seq.pi.push_back(1.0);
  seq.log_pi.push_back(0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t idx = model.draw_index(rng);
    seq.law_index.push_back(idx);
    seq.laws.push_back(model.support()[idx]);
    seq.pi.push_back(seq.pi.back() * seq.laws.back().mean());
    seq.log_pi.push_back(seq.log_pi.back() + std::log(seq.laws.back().mean()));
  }
  return seq;
}

EnvSequence make_env(std::vector<OffspringLaw> laws) {
  EnvSequence seq;
  seq.pi.push_back(1.0);
  seq.log_pi.push_back(0.0);
  for (const auto& law : laws) {
    seq.pi.push_back(seq.pi.back() * law.mean());
    seq.log_pi.push_back(seq.log_pi.back() + std::log(law.mean()));
  }
  seq.laws = std::move(laws);
  return seq;
}

LazyEnvironment::LazyEnvironment(const EnvironmentModel& model, Rng rng) : model_(model), rng_(std::move(rng)) {
  seq_.pi.push_back(1.0);
  seq_.log_pi.push_back(0.0);
}

void LazyEnvironment::extend_to(std::size_t n) {
  while (seq_.laws.size() < n) {
    const std::size_t idx = model_.draw_index(rng_);
    seq_.law_index.push_back(idx);
    seq_.laws.push_back(model_.support()[idx]);
    seq_.pi.push_back(seq_.pi.back() * seq_.laws.back().mean());
    seq_.log_pi.push_back(seq_.log_pi.back() + std::log(seq_.laws.back().mean()));
  }
}

const OffspringLaw& LazyEnvironment::law(std::size_t i) {
  extend_to(i + 1);
  return seq_.laws[i];
}

double LazyEnvironment::pi(std::size_t i) {
  extend_to(i);
  return seq_.pi[i];
}

namespace {

struct KsMoment {
  double value = 0.0;
  double tail_bound = 0.0;
  std::int64_t terms = 0;
};

// E[1(xi >= 2) xi log xi] for one law.
KsMoment ks_moment(const OffspringLaw& law, std::int64_t term_cap) {
  KsMoment out;
  const auto term = [&](std::int64_t k) {
    const double kd = static_cast<double>(k);
    return kd * std::log(kd) * law.pmf(k);
  };
  if (const auto top = law.max_support()) {
    for (std::int64_t k = 2; k <= static_cast<std::int64_t>(*top); ++k) {
      out.value += term(k);
      ++out.terms;
    }
    return out;
  }
  const double floor_k = std::ceil(law.mean()) + 2.0;
  std::int64_t k = 2;
  for (;; ++k) {
    out.value += term(k);
    ++out.terms;
    if ((static_cast<double>(k) > floor_k && law.pmf(k) < 1e-14) || out.terms >= term_cap) break;
  }
  // term ratios are nonincreasing past the mean for both unbounded families
  const double tk = term(k);
  const double ratio = term(k + 1) / tk;
  out.tail_bound = (tk > 0.0 && ratio < 1.0) ? tk * ratio / (1.0 - ratio) : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace

AssumptionReport check_assumptions(const EnvironmentModel& model, std::int64_t mc_samples, Rng& /*rng*/) {
  AssumptionReport report;
  const std::int64_t term_cap = mc_samples > 0 ? mc_samples : std::numeric_limits<std::int64_t>::max();
  bool p_gt1_zero = false;
  for (std::size_t i = 0; i < model.support().size(); ++i) {
    const auto& law = model.support()[i];
    const double w = model.weights()[i];
    if (w == 0.0) continue;
    const double m = law.mean();
    report.e_log_mean += w * std::log(m);
    const double p_gt1 = std::max(0.0, 1.0 - law.pmf(0) - law.pmf(1));
    if (p_gt1 <= 0.0) {
      p_gt1_zero = true;
      report.e_abs_log_p_gt1 = std::numeric_limits<double>::infinity();
    } else if (!p_gt1_zero) {
      report.e_abs_log_p_gt1 += w * std::abs(std::log(p_gt1));
    }
    const KsMoment ks = ks_moment(law, term_cap);
    report.kesten_stigum_term += w * ks.value / m;
    report.kesten_stigum_tail_bound += w * ks.tail_bound / m;
    report.n_samples += ks.terms;
  }

  if (p_gt1_zero) {
    report.reason = "some law has P(xi > 1) = 0, so E|log P(xi > 1)| is infinite";
  } else if (!(report.e_log_mean > 0.0)) {
    report.reason = "E log E(xi|Y0) <= 0: environment is not supercritical";
  } else if (!std::isfinite(report.kesten_stigum_term + report.kesten_stigum_tail_bound)) {
    report.reason = "Kesten-Stigum moment could not be certified finite";
  } else {
    report.verdict = AssumptionReport::Verdict::SupercriticalOK;
    return report;
  }
  report.verdict = AssumptionReport::Verdict::Violated;
  return report;
}

}  // namespace brwre

#include "brwre/limit_laws.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "brwre/errors.hpp"
#include "brwre/parallel.hpp"

namespace brwre {
namespace {

constexpr std::size_t kGrowthWindow = 8;
constexpr std::size_t kMinTerms = 4;
constexpr std::uint64_t kRejectionCap = 1'000'000;
constexpr double kFrozenPopulation = 0x1.0p40;

// Sums term(i) for i = 0, 1, ... where each term is at most
// bound_scale / pi_{i + offset}; the tail after index I is bounded by
// bound_scale / (pi_{I + offset} (g - 1)), g the smallest recent growth ratio.
template <class TermFn>
SeriesValue sum_series(QuenchedEnvironment& env, const LimitConfig& cfg, std::size_t offset, double bound_scale,
                       TermFn&& term) {
  SeriesValue out;
  for (std::size_t i = 0; i < cfg.max_terms; ++i) {
    const double t = term(i);
    out.terms.push_back(t);
    out.value += t;
    out.terms_used = i + 1;
    if (i + 1 < kMinTerms) continue;

    const std::size_t last = i + offset;
    const double inv_pi = 1.0 / env.pi(last);
    double tail = 0.0;
    if (bound_scale > 0.0 && inv_pi > 0.0) {
      double growth = std::numeric_limits<double>::infinity();
      const std::size_t first = last > kGrowthWindow ? last - kGrowthWindow : 0;
      for (std::size_t j = first; j < last; ++j) growth = std::min(growth, env.law(j).mean());
      tail = growth > 1.0 ? bound_scale * inv_pi / (growth - 1.0) : std::numeric_limits<double>::infinity();
    }
    if (tail == 0.0 || tail < cfg.series_tol * out.value) {
      out.tail_bound = tail;
      return out;
    }
  }
  fail(ErrorKind::NonGeometricGrowth,
       "series tail could not be certified within " + std::to_string(cfg.max_terms) + " terms");
}

std::size_t pick_index(const std::vector<double>& weights, double total, Rng& rng) {
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  // rounding: fall back to the last positive weight
  for (std::size_t i = weights.size(); i-- > 0;)
    if (weights[i] > 0.0) return i;
  return 0;
}

}  // namespace

void LimitConfig::validate() const {
  require(series_tol > 0.0 && series_tol < 1.0, "series_tol must lie in (0, 1)");
  require(max_terms >= kMinTerms, "max_terms too small");
  require(w_horizon >= 1, "w_horizon must be >= 1");
  require(degree_cap >= 1, "degree_cap must be >= 1");
  require(u_min > 0.0, "u_min must be > 0");
}

WDraw estimate_W(const EnvironmentModel& env_model, std::size_t m, bool condition_on_survival, Rng& rng) {
  require(m >= 1, "W horizon must be >= 1");
  for (std::uint64_t restarts = 0;; ++restarts) {
    std::uint64_t z = 1;
    double pi = 1.0;
    std::vector<double> history{1.0};
    bool died = false;
    for (std::size_t j = 0; j < m; ++j) {
      const OffspringLaw& law = env_model.support()[env_model.draw_index(rng)];
      pi *= law.mean();
      if (static_cast<double>(z) < kFrozenPopulation) {
        z = law.sample_sum(z, rng);
        if (z == 0) {
          died = true;
          break;
        }
        history.push_back(static_cast<double>(z) / pi);
      } else {
        history.push_back(history.back());
      }
    }
    if (died) {
      if (condition_on_survival) continue;
      return {0.0, 0.0, restarts};
    }
    WDraw out;
    out.w = history.back();
    out.drift = history.size() > 5 ? std::abs(history.back() - history[history.size() - 6]) : 0.0;
    out.restarts = restarts;
    return out;
  }
}

QuenchedEnvironment::QuenchedEnvironment(const EnvironmentModel& model, Rng env_rng, std::size_t degree_cap)
    : env_(model, std::move(env_rng)), degree_cap_(degree_cap) {
  require(degree_cap_ >= 1, "degree cap must be >= 1");
  extinct_.push_back(0.0);
  prob_one_.push_back(1.0);
}

void QuenchedEnvironment::extend_extinction(std::size_t i) {
  while (extinct_.size() <= i) {
    const std::size_t k = extinct_.size() - 1;
    const OffspringLaw& outer = env_.law(k);
    const double e = extinct_.back();
    prob_one_.push_back(outer.pgf_derivative(e) * prob_one_.back());
    extinct_.push_back(outer.pgf(e));
  }
}

double QuenchedEnvironment::extinct(std::size_t i) {
  extend_extinction(i);
  return extinct_[i];
}

double QuenchedEnvironment::prob_one(std::size_t i) {
  extend_extinction(i);
  return prob_one_[i];
}

const TruncatedPMF& QuenchedEnvironment::pmf(std::size_t i) {
  if (pmfs_.empty()) {
    TruncatedPMF base;
    base.probs.assign(degree_cap_ + 1, 0.0);
    base.probs[1] = 1.0;
    pmfs_.push_back(std::move(base));
  }
  while (pmfs_.size() <= i) {
    const std::size_t k = pmfs_.size() - 1;
    TruncatedPMF next;
    auto series = env_.law(k).compose_series(pmfs_.back().probs, degree_cap_);
    series.resize(degree_cap_ + 1, 0.0);
    next.probs = std::move(series);
    double assigned = 0.0;
    for (double p : next.probs) assigned += p;
    next.mass_beyond = std::max(0.0, 1.0 - assigned);
    pmfs_.push_back(std::move(next));
  }
  return pmfs_[i];
}

std::uint64_t QuenchedEnvironment::simulate_Z(std::size_t i, Rng& rng) {
  std::uint64_t z = 1;
  for (std::size_t j = i; j-- > 0 && z > 0;) z = env_.law(j).sample_sum(z, rng);
  return z;
}

std::uint64_t QuenchedEnvironment::draw_Z(std::size_t i, Rng& rng) { return simulate_Z(i, rng); }

std::uint64_t QuenchedEnvironment::draw_Z_positive(std::size_t i, Rng& rng) {
  for (std::uint64_t attempt = 0; attempt < kRejectionCap; ++attempt) {
    const std::uint64_t z = simulate_Z(i, rng);
    if (z > 0) return z;
  }
  fail(ErrorKind::RejectionCapExceeded, "generation size stayed zero for the whole rejection budget");
}

SeriesValue constant_C(Constant which, QuenchedEnvironment& env, const LimitConfig& cfg) {
  cfg.validate();
  switch (which) {
    case Constant::C0:
      return sum_series(env, cfg, 0, 1.0, [&](std::size_t i) { return 1.0 / env.pi(i); });
    case Constant::C3:
      return sum_series(env, cfg, 0, 1.0, [&](std::size_t i) { return (1.0 - env.extinct(i)) / env.pi(i); });
    case Constant::C1:
      // sum_v P(Z_1 = v | Y'_i) (1 - e0(i)^v) = 1 - f_{Y'_i}(e0(i))
      return sum_series(env, cfg, 1, 1.0, [&](std::size_t i) {
        return (1.0 - env.law(i).pgf(env.extinct(i))) / env.pi(i + 1);
      });
    case Constant::C2:
      return sum_series(env, cfg, 1, 1.0, [&](std::size_t i) { return (1.0 - env.law(i).pmf(0)) / env.pi(i + 1); });
  }
  fail(ErrorKind::InvalidArgument, "unknown constant");
}

std::uint64_t sample_cluster_R(QuenchedEnvironment& env, const SeriesValue& c3, Rng& rng) {
  const std::size_t gen = pick_index(c3.terms, c3.value, rng);
  return env.draw_Z_positive(gen, rng);
}

std::uint64_t sample_cluster_R(QuenchedEnvironment& env, const LimitConfig& cfg, Rng& rng) {
  const SeriesValue c3 = constant_C(Constant::C3, env, cfg);
  return sample_cluster_R(env, c3, rng);
}

ClusterVR sample_cluster_VR(QuenchedEnvironment& env, const SeriesValue& c1, Rng& rng) {
  ClusterVR out;
  out.generation = pick_index(c1.terms, c1.value, rng);
  const OffspringLaw& parent = env.law(out.generation);
  for (std::uint64_t attempt = 0; attempt < kRejectionCap; ++attempt) {
    const std::uint64_t v = parent.sample(rng);
    if (v == 0) continue;
    out.v = v;
    out.r.resize(v);
    bool any = false;
    for (auto& r : out.r) {
      r = env.draw_Z(out.generation, rng);
      any = any || r > 0;
    }
    if (any) return out;
  }
  fail(ErrorKind::RejectionCapExceeded, "cluster (V, R) rejection cap reached");
}

ClusterVR sample_cluster_VR(QuenchedEnvironment& env, const LimitConfig& cfg, Rng& rng) {
  const SeriesValue c1 = constant_C(Constant::C1, env, cfg);
  return sample_cluster_VR(env, c1, rng);
}

SeriesValue q_general_series(const DisplacementModel& disp, const EnvironmentModel& env_model, QuenchedEnvironment& env,
                             const LimitConfig& cfg) {
  cfg.validate();
  const auto progeny = env_model.max_progeny();
  if (!progeny)
    fail(ErrorKind::UnboundedProgenyInGeneralMode, "general Q needs offspring laws with bounded support");
  const std::size_t vmax = static_cast<std::size_t>(*progeny);
  if (disp.is_angular()) require(vmax <= disp.max_brood(), "offspring support exceeds angular dimension");

  std::vector<std::vector<double>> mass(vmax + 1);
  double bound_scale = 0.0;
  for (std::size_t v = 1; v <= vmax; ++v) {
    mass[v] = pattern_mass_by_ones(disp, v);
    double total = 0.0;
    for (double x : mass[v]) total += x;
    bound_scale = std::max(bound_scale, total);
  }

  return sum_series(env, cfg, 1, bound_scale, [&](std::size_t j) {
    const OffspringLaw& law = env.law(j);
    const double e0 = env.extinct(j);
    double acc = 0.0;
    for (std::size_t v = 1; v <= vmax; ++v) {
      const double pv = law.pmf(static_cast<std::int64_t>(v));
      if (pv == 0.0) continue;
      double inner = 0.0;
      double e_pow = 1.0;
      for (std::size_t k = 1; k <= v; ++k) {
        e_pow *= e0;
        inner += (1.0 - e_pow) * mass[v][k];
      }
      acc += pv * inner;
    }
    return acc / env.pi(j + 1);
  });
}

QSample sample_Q(const DisplacementModel& disp, const EnvironmentModel& env_model, const LimitConfig& cfg, Rng& rng,
                 QRoute route) {
  cfg.validate();
  const std::uint64_t w_seed = rng();
  const std::uint64_t env_seed = rng();
  Rng w_rng(w_seed);
  const WDraw w = estimate_W(env_model, cfg.w_horizon, true, w_rng);
  QuenchedEnvironment env(env_model, Rng(env_seed), cfg.degree_cap);

  SeriesValue factor;
  if (route == QRoute::General || disp.is_angular()) {
    factor = q_general_series(disp, env_model, env, cfg);
  } else {
    factor = constant_C(disp.is_iid() ? Constant::C3 : Constant::C1, env, cfg);
    factor.value *= disp.p();
    factor.tail_bound *= disp.p();
  }
  QSample out;
  out.w = w.w;
  out.env_factor = factor.value;
  out.q = w.w * factor.value;
  out.tail_bound = w.w * factor.tail_bound;
  out.env_prime_summary = env.law_indices();
  return out;
}

std::vector<QSample> sample_Q_batch(const DisplacementModel& disp, const EnvironmentModel& env_model,
                                    const LimitConfig& cfg, std::uint64_t seed, std::size_t count, QRoute route,
                                    unsigned threads) {
  std::vector<QSample> out(count);
  parallel_for(count, threads, [&](std::size_t i) {
    Rng rng = derive_rng(seed, i);
    out[i] = sample_Q(disp, env_model, cfg, rng, route);
  });
  return out;
}

double limit_max_cdf(const std::vector<QSample>& samples, double x, double alpha) {
  require(!samples.empty(), "limit CDF needs samples");
  require(x > 0.0, "limit CDF needs x > 0");
  const double scale = std::pow(x, -alpha);
  double acc = 0.0;
  for (const auto& s : samples) acc += std::exp(-scale * s.q);
  return acc / static_cast<double>(samples.size());
}

LimitDraw sample_limit_pp(const DisplacementModel& disp, const EnvironmentModel& env_model, const LimitConfig& cfg,
                          Rng& rng) {
  cfg.validate();
  const std::uint64_t w_seed = rng();
  const std::uint64_t env_seed = rng();
  Rng w_rng(w_seed);
  const WDraw w = estimate_W(env_model, cfg.w_horizon, true, w_rng);
  QuenchedEnvironment env(env_model, Rng(env_seed), cfg.degree_cap);

  const double alpha = disp.alpha();
  const SeriesValue constant = constant_C(disp.is_iid() ? Constant::C3 : Constant::C1, env, cfg);

  LimitDraw out;
  out.w = w.w;
  out.constant = constant.value;
  out.scale = std::pow(constant.value * w.w, 1.0 / alpha);

  const double intensity = disp.angular_mass() * std::pow(cfg.u_min, -alpha);
  const std::uint64_t points = std::poisson_distribution<std::uint64_t>(intensity)(rng);

  double min_component = 1.0;
  if (const auto* ang = std::get_if<AngularMode>(&disp.mode())) {
    min_component = std::numeric_limits<double>::infinity();
    for (const auto& atom : ang->atoms)
      for (double a : atom)
        if (a != 0.0) min_component = std::min(min_component, std::abs(a));
  }
  out.coverage = out.scale * cfg.u_min * min_component;

  std::vector<double> atom_cumulative;
  if (const auto* ang = std::get_if<AngularMode>(&disp.mode())) {
    double acc = 0.0;
    for (double wt : ang->weights) atom_cumulative.push_back(acc += wt);
  }

  for (std::uint64_t l = 0; l < points; ++l) {
    const double zeta = cfg.u_min * std::pow(uniform_pos(rng), -1.0 / alpha);
    if (disp.is_iid()) {
      const double sign = uniform01(rng) < disp.p() ? 1.0 : -1.0;
      out.measure.add(out.scale * sign * zeta, sample_cluster_R(env, constant, rng));
    } else if (disp.is_full_dependence()) {
      const double sign = uniform01(rng) < disp.p() ? 1.0 : -1.0;
      const ClusterVR cluster = sample_cluster_VR(env, constant, rng);
      std::uint64_t total = 0;
      for (auto r : cluster.r) total += r;
      out.measure.add(out.scale * sign * zeta, total);
    } else {
      const auto& ang = std::get<AngularMode>(disp.mode());
      const double u = uniform01(rng) * atom_cumulative.back();
      const auto it = std::upper_bound(atom_cumulative.begin(), atom_cumulative.end(), u);
      const std::size_t m =
          std::min<std::size_t>(static_cast<std::size_t>(it - atom_cumulative.begin()), ang.atoms.size() - 1);
      const ClusterVR cluster = sample_cluster_VR(env, constant, rng);
      for (std::size_t k = 0; k < cluster.v; ++k)
        if (cluster.r[k] > 0) out.measure.add(out.scale * zeta * ang.atoms[m][k], cluster.r[k]);
    }
  }
  out.measure.canonicalize();
  return out;
}

std::vector<LimitDraw> sample_limit_pp_batch(const DisplacementModel& disp, const EnvironmentModel& env_model,
                                             const LimitConfig& cfg, std::uint64_t seed, std::size_t count,
                                             unsigned threads) {
  std::vector<LimitDraw> out(count);
  parallel_for(count, threads, [&](std::size_t i) {
    Rng rng = derive_rng(seed, i);
    out[i] = sample_limit_pp(disp, env_model, cfg, rng);
  });
  return out;
}

WC3Sample sample_w_c3(const EnvironmentModel& env_model, const LimitConfig& cfg, Rng& rng) {
  const std::uint64_t w_seed = rng();
  const std::uint64_t env_seed = rng();
  Rng w_rng(w_seed);
  const WDraw w = estimate_W(env_model, cfg.w_horizon, true, w_rng);
  QuenchedEnvironment env(env_model, Rng(env_seed), cfg.degree_cap);
  const SeriesValue c3 = constant_C(Constant::C3, env, cfg);
  double ones = 0.0;
  for (std::size_t i = 0; i < c3.terms_used; ++i) ones += env.prob_one(i) / env.pi(i);
  return {w.w, c3.value, ones / c3.value};
}

std::vector<WC3Sample> sample_w_c3_batch(const EnvironmentModel& env_model, const LimitConfig& cfg,
                                         std::uint64_t seed, std::size_t count, unsigned threads) {
  std::vector<WC3Sample> out(count);
  parallel_for(count, threads, [&](std::size_t i) {
    Rng rng = derive_rng(seed, i);
    out[i] = sample_w_c3(env_model, cfg, rng);
  });
  return out;
}

double joint_min_max_cdf(const std::vector<WC3Sample>& samples, double x, double y, double alpha, double p) {
  require(!samples.empty(), "joint CDF needs samples");
  require(x > 0.0 && y > 0.0, "joint CDF needs x, y > 0");
  const double rate = p * std::pow(x, -alpha) + (1.0 - p) * std::pow(y, -alpha);
  double acc = 0.0;
  for (const auto& s : samples) acc += std::exp(-s.w * s.c3 * rate);
  return acc / static_cast<double>(samples.size());
}

namespace {

double top_two_impl(const std::vector<WC3Sample>& samples, double x, double y, double alpha, double p,
                    bool clustered) {
  require(!samples.empty(), "top-two CDF needs samples");
  require(x > 0.0 && y > 0.0, "top-two CDF needs x, y > 0");
  if (x > y) fail(ErrorKind::ArgumentOrder, "top-two CDF needs x <= y");
  const double x_rate = std::pow(x, -alpha);
  const double band = x_rate - std::pow(y, -alpha);
  double acc = 0.0;
  for (const auto& s : samples) {
    const double mass = s.w * s.c3;
    const double none = std::exp(-p * mass * x_rate);
    const double single = p * mass * band * none * (clustered ? s.r_one : 1.0);
    acc += none + single;
  }
  return acc / static_cast<double>(samples.size());
}

}  // namespace

double top_two_cdf(const std::vector<WC3Sample>& samples, double x, double y, double alpha, double p) {
  return top_two_impl(samples, x, y, alpha, p, false);
}

double top_two_cdf_clustered(const std::vector<WC3Sample>& samples, double x, double y, double alpha, double p) {
  return top_two_impl(samples, x, y, alpha, p, true);
}

}  // namespace brwre

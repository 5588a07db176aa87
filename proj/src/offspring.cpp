#include "brwre/offspring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "brwre/errors.hpp"

namespace brwre {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double binomial_pmf(std::uint32_t m, double q, std::int64_t k) {
  if (k < 0 || k > static_cast<std::int64_t>(m)) return 0.0;
  if (q == 0.0) return k == 0 ? 1.0 : 0.0;
  if (q == 1.0) return k == static_cast<std::int64_t>(m) ? 1.0 : 0.0;
  const double kd = static_cast<double>(k);
  const double md = static_cast<double>(m);
  const double log_choose = std::lgamma(md + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(md - kd + 1.0);
  return std::exp(log_choose + kd * std::log(q) + (md - kd) * std::log1p(-q));
}

// Sequential inversion for small means, one uniform per draw.
std::uint64_t poisson_sample(double lambda, Rng& rng) {
  if (lambda >= 30.0) return std::poisson_distribution<std::uint64_t>(lambda)(rng);
  const double u = uniform01(rng);
  double term = std::exp(-lambda);
  double cdf = term;
  std::uint64_t k = 0;
  while (u >= cdf && term > 0.0) {
    ++k;
    term *= lambda / static_cast<double>(k);
    cdf += term;
  }
  return k;
}

std::vector<std::size_t> nonzero_indices(std::span<const double> a) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != 0.0) idx.push_back(i);
  return idx;
}

std::vector<double> trim(std::vector<double> v) {
  while (v.size() > 1 && v.back() == 0.0) v.pop_back();
  return v;
}

// Horner evaluation of sum_k coef[k] g^k as a truncated series.
std::vector<double> horner_compose(std::span<const double> coef, std::span<const double> g, std::size_t cap) {
  std::vector<double> h{coef.back()};
  for (std::size_t k = coef.size() - 1; k-- > 0;) {
    h = multiply_series(h, g, cap);
    h[0] += coef[k];
  }
  return trim(std::move(h));
}

std::vector<double> power_series(std::span<const double> g, std::uint32_t k, std::size_t cap) {
  std::vector<double> result{1.0};
  std::vector<double> base(g.begin(), g.end());
  while (k > 0) {
    if (k & 1U) result = multiply_series(result, base, cap);
    k >>= 1U;
    if (k > 0) base = multiply_series(base, base, cap);
  }
  return trim(std::move(result));
}

}  // namespace

bool operator==(const Deterministic& a, const Deterministic& b) { return a.k == b.k; }
bool operator==(const Poisson& a, const Poisson& b) { return a.lambda == b.lambda; }
bool operator==(const Geometric& a, const Geometric& b) { return a.q == b.q; }
bool operator==(const Binomial& a, const Binomial& b) { return a.m == b.m && a.q == b.q; }
bool operator==(const Finite& a, const Finite& b) { return a.pmf == b.pmf; }
bool operator==(const OffspringLaw& a, const OffspringLaw& b) { return a.family_ == b.family_; }

OffspringLaw::OffspringLaw(Family family) : family_(std::move(family)) {
  mean_ = std::visit(overloaded{
                         [](const Deterministic& d) { return static_cast<double>(d.k); },
                         [](const Poisson& p) { return p.lambda; },
                         [](const Geometric& g) { return g.q / (1.0 - g.q); },
                         [](const Binomial& b) { return b.m * b.q; },
                         [](const Finite& f) {
                           double m = 0.0;
                           for (std::size_t k = 0; k < f.pmf.size(); ++k) m += static_cast<double>(k) * f.pmf[k];
                           return m;
                         },
                     },
                     family_);
  require(mean_ > 0.0, "offspring law must have positive mean");
}

OffspringLaw OffspringLaw::deterministic(std::uint32_t k) {
  require(k >= 1, "Deterministic(k) requires k >= 1");
  return OffspringLaw(Deterministic{k});
}

OffspringLaw OffspringLaw::poisson(double lambda) {
  require(std::isfinite(lambda) && lambda > 0.0, "Poisson(lambda) requires lambda > 0");
  return OffspringLaw(Poisson{lambda});
}

OffspringLaw OffspringLaw::geometric(double q) {
  require(q > 0.0 && q < 1.0, "Geometric(q) requires 0 < q < 1");
  return OffspringLaw(Geometric{q});
}

OffspringLaw OffspringLaw::binomial(std::uint32_t m, double q) {
  require(m >= 1, "Binomial(m, q) requires m >= 1");
  require(q > 0.0 && q < 1.0, "Binomial(m, q) requires 0 < q < 1");
  return OffspringLaw(Binomial{m, q});
}

OffspringLaw OffspringLaw::finite(std::vector<double> pmf) {
  require(!pmf.empty(), "Finite pmf must be nonempty");
  double total = 0.0;
  for (double p : pmf) {
    require(std::isfinite(p) && p >= 0.0, "Finite pmf entries must be nonnegative");
    total += p;
  }
  require(std::abs(total - 1.0) <= 1e-12, "Finite pmf must sum to 1 within 1e-12");
  return OffspringLaw(Finite{trim(std::move(pmf))});
}

std::string OffspringLaw::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&](const Deterministic& d) { os << "Deterministic(" << d.k << ")"; },
                 [&](const Poisson& p) { os << "Poisson(" << p.lambda << ")"; },
                 [&](const Geometric& g) { os << "Geometric(" << g.q << ")"; },
                 [&](const Binomial& b) { os << "Binomial(" << b.m << ", " << b.q << ")"; },
                 [&](const Finite& f) {
                   os << "Finite([";
                   for (std::size_t k = 0; k < f.pmf.size(); ++k) os << (k ? ", " : "") << f.pmf[k];
                   os << "])";
                 },
             },
             family_);
  return os.str();
}

double OffspringLaw::pmf(std::int64_t k) const {
  if (k < 0) return 0.0;
  return std::visit(overloaded{
                        [&](const Deterministic& d) { return k == static_cast<std::int64_t>(d.k) ? 1.0 : 0.0; },
                        [&](const Poisson& p) {
                          const double kd = static_cast<double>(k);
                          return std::exp(kd * std::log(p.lambda) - p.lambda - std::lgamma(kd + 1.0));
                        },
                        [&](const Geometric& g) { return (1.0 - g.q) * std::pow(g.q, static_cast<double>(k)); },
                        [&](const Binomial& b) { return binomial_pmf(b.m, b.q, k); },
                        [&](const Finite& f) {
                          return static_cast<std::size_t>(k) < f.pmf.size() ? f.pmf[static_cast<std::size_t>(k)] : 0.0;
                        },
                    },
                    family_);
}

double OffspringLaw::pgf(double s) const {
  require(s >= 0.0 && s <= 1.0, "pgf argument must lie in [0, 1]");
  return std::visit(overloaded{
                        [&](const Deterministic& d) { return std::pow(s, static_cast<double>(d.k)); },
                        [&](const Poisson& p) { return std::exp(p.lambda * (s - 1.0)); },
                        [&](const Geometric& g) { return (1.0 - g.q) / (1.0 - g.q * s); },
                        [&](const Binomial& b) { return std::pow(1.0 - b.q + b.q * s, static_cast<double>(b.m)); },
                        [&](const Finite& f) {
                          double acc = 0.0;
                          for (std::size_t k = f.pmf.size(); k-- > 0;) acc = acc * s + f.pmf[k];
                          return acc;
                        },
                    },
                    family_);
}

double OffspringLaw::pgf_derivative(double s) const {
  require(s >= 0.0 && s <= 1.0, "pgf argument must lie in [0, 1]");
  return std::visit(overloaded{
                        [&](const Deterministic& d) {
                          return static_cast<double>(d.k) * std::pow(s, static_cast<double>(d.k) - 1.0);
                        },
                        [&](const Poisson& p) { return p.lambda * std::exp(p.lambda * (s - 1.0)); },
                        [&](const Geometric& g) {
                          const double denom = 1.0 - g.q * s;
                          return (1.0 - g.q) * g.q / (denom * denom);
                        },
                        [&](const Binomial& b) {
                          return b.m * b.q * std::pow(1.0 - b.q + b.q * s, static_cast<double>(b.m) - 1.0);
                        },
                        [&](const Finite& f) {
                          double acc = 0.0;
                          for (std::size_t k = f.pmf.size(); k-- > 1;) acc = acc * s + static_cast<double>(k) * f.pmf[k];
                          return acc;
                        },
                    },
                    family_);
}

std::optional<std::uint64_t> OffspringLaw::max_support() const {
  return std::visit(overloaded{
                        [](const Deterministic& d) -> std::optional<std::uint64_t> { return d.k; },
                        [](const Poisson&) -> std::optional<std::uint64_t> { return std::nullopt; },
                        [](const Geometric&) -> std::optional<std::uint64_t> { return std::nullopt; },
                        [](const Binomial& b) -> std::optional<std::uint64_t> { return b.m; },
                        [](const Finite& f) -> std::optional<std::uint64_t> { return f.pmf.size() - 1; },
                    },
                    family_);
}

std::uint64_t OffspringLaw::sample(Rng& rng) const {
  return std::visit(overloaded{
                        [](const Deterministic& d) -> std::uint64_t { return d.k; },
                        [&](const Poisson& p) -> std::uint64_t {
                          return poisson_sample(p.lambda, rng);
                        },
                        [&](const Geometric& g) -> std::uint64_t {
                          return std::geometric_distribution<std::uint64_t>(1.0 - g.q)(rng);
                        },
                        [&](const Binomial& b) -> std::uint64_t {
                          return std::binomial_distribution<std::uint64_t>(b.m, b.q)(rng);
                        },
                        [&](const Finite& f) -> std::uint64_t {
                          const double u = uniform01(rng);
                          double acc = 0.0;
                          for (std::size_t k = 0; k + 1 < f.pmf.size(); ++k) {
                            acc += f.pmf[k];
                            if (u < acc) return k;
                          }
                          return f.pmf.size() - 1;
                        },
                    },
                    family_);
}

std::uint64_t OffspringLaw::sample_sum(std::uint64_t count, Rng& rng) const {
  if (count == 0) return 0;
  return std::visit(
      overloaded{
          [&](const Deterministic& d) -> std::uint64_t { return count * d.k; },
          [&](const Poisson& p) -> std::uint64_t {
            return std::poisson_distribution<std::uint64_t>(p.lambda * static_cast<double>(count))(rng);
          },
          [&](const Geometric& g) -> std::uint64_t {
            return std::negative_binomial_distribution<std::uint64_t>(count, 1.0 - g.q)(rng);
          },
          [&](const Binomial& b) -> std::uint64_t {
            return std::binomial_distribution<std::uint64_t>(count * b.m, b.q)(rng);
          },
          [&](const Finite& f) -> std::uint64_t {
            // multinomial split by successive conditional binomials
            std::uint64_t remaining = count;
            double remaining_mass = 1.0;
            std::uint64_t total = 0;
            for (std::size_t k = 0; k < f.pmf.size() && remaining > 0; ++k) {
              std::uint64_t here = remaining;
              if (k + 1 < f.pmf.size() && remaining_mass > 0.0) {
                const double prob = std::clamp(f.pmf[k] / remaining_mass, 0.0, 1.0);
                here = std::binomial_distribution<std::uint64_t>(remaining, prob)(rng);
              }
              total += here * k;
              remaining -= here;
              remaining_mass -= f.pmf[k];
            }
            return total;
          },
      },
      family_);
}

std::vector<double> multiply_series(std::span<const double> a, std::span<const double> b, std::size_t cap) {
  if (a.empty() || b.empty()) return {0.0};
  const std::size_t len = std::min(a.size() + b.size() - 1, cap + 1);
  std::vector<double> out(len, 0.0);
  const auto ia = nonzero_indices(a);
  const auto ib = nonzero_indices(b);
  for (std::size_t i : ia) {
    if (i >= len) break;
    const double ai = a[i];
    for (std::size_t j : ib) {
      if (i + j >= len) break;
      out[i + j] += ai * b[j];
    }
  }
  return out;
}

std::vector<double> OffspringLaw::compose_series(std::span<const double> inner, std::size_t cap) const {
  require(!inner.empty(), "inner series must be nonempty");
  std::vector<double> g(inner.begin(), inner.begin() + static_cast<std::ptrdiff_t>(std::min(inner.size(), cap + 1)));
  g = trim(std::move(g));
  const auto nz = nonzero_indices(g);
  const double g0 = g[0];

  return std::visit(
      overloaded{
          [&](const Deterministic& d) { return power_series(g, d.k, cap); },
          [&](const Finite& f) { return horner_compose(f.pmf, g, cap); },
          [&](const Binomial& b) {
            std::vector<double> coef(b.m + 1);
            for (std::uint32_t k = 0; k <= b.m; ++k) coef[k] = binomial_pmf(b.m, b.q, k);
            return horner_compose(coef, g, cap);
          },
          [&](const Poisson& p) {
            // h = exp(lambda (g - 1)) satisfies n h_n = lambda sum_k k g_k h_{n-k}
            const std::size_t len = (g.size() == 1) ? 1 : cap + 1;
            std::vector<double> h(len, 0.0);
            h[0] = std::exp(p.lambda * (g0 - 1.0));
            for (std::size_t n = 1; n < len; ++n) {
              double acc = 0.0;
              for (std::size_t k : nz) {
                if (k == 0) continue;
                if (k > n) break;
                acc += static_cast<double>(k) * g[k] * h[n - k];
              }
              h[n] = p.lambda * acc / static_cast<double>(n);
            }
            return trim(std::move(h));
          },
          [&](const Geometric& geo) {
            // h (1 - q g) = 1 - q
            const std::size_t len = (g.size() == 1) ? 1 : cap + 1;
            std::vector<double> h(len, 0.0);
            const double denom = 1.0 - geo.q * g0;
            h[0] = (1.0 - geo.q) / denom;
            for (std::size_t n = 1; n < len; ++n) {
              double acc = 0.0;
              for (std::size_t k : nz) {
                if (k == 0) continue;
                if (k > n) break;
                acc += g[k] * h[n - k];
              }
              h[n] = geo.q * acc / denom;
            }
            return trim(std::move(h));
          },
      },
      family_);
}

double extinct_prob_by_gen(std::span<const OffspringLaw> env_rev) {
  double s = 0.0;
  for (std::size_t j = env_rev.size(); j-- > 0;) s = env_rev[j].pgf(s);
  return s;
}

TruncatedPMF pmf_Zi(std::span<const OffspringLaw> env_rev, std::size_t degree_cap) {
  require(degree_cap >= 1, "degree cap must be >= 1");
  std::vector<double> g{0.0, 1.0};
  for (std::size_t j = env_rev.size(); j-- > 0;) g = env_rev[j].compose_series(g, degree_cap);
  TruncatedPMF out;
  out.probs.assign(degree_cap + 1, 0.0);
  std::copy_n(g.begin(), std::min(g.size(), degree_cap + 1), out.probs.begin());
  const double assigned = std::accumulate(out.probs.begin(), out.probs.end(), 0.0);
  out.mass_beyond = std::max(0.0, 1.0 - assigned);
  return out;
}

}  // namespace brwre

#include "brwre/displacement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "brwre/errors.hpp"

namespace brwre {
namespace {

constexpr double kMarginalTol = 1e-9;
constexpr std::size_t kMaxEnumeratedBrood = 20;

double signed_pareto(double alpha, double p, Rng& rng) {
  const double u = uniform_pos(rng);
  const double magnitude = alpha == 2.0 ? 1.0 / std::sqrt(u) : std::pow(u, -1.0 / alpha);
  if (p >= 1.0) return magnitude;
  if (p <= 0.0) return -magnitude;
  return uniform01(rng) < p ? magnitude : -magnitude;
}

}  // namespace

std::size_t Pattern::ones() const noexcept {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

Pattern Pattern::from_mask(std::uint64_t mask, std::size_t v) {
  Pattern pattern;
  pattern.bits.resize(v);
  for (std::size_t j = 0; j < v; ++j) pattern.bits[j] = static_cast<std::uint8_t>((mask >> j) & 1U);
  return pattern;
}

bool operator==(const DisplacementModel& a, const DisplacementModel& b) {
  return a.alpha_ == b.alpha_ && a.p_ == b.p_ && a.mode_ == b.mode_;
}

DisplacementModel::DisplacementModel(double alpha, double p, DependenceMode mode)
    : alpha_(alpha), p_(p), mode_(std::move(mode)) {
  require(std::isfinite(alpha_) && alpha_ > 0.0, "tail index alpha must be > 0");
  require(p_ >= 0.0 && p_ <= 1.0, "balance p must lie in [0, 1]");
  if (const auto* ang = std::get_if<AngularMode>(&mode_)) {
    c0_ = 0.0;
    for (double w : ang->weights) {
      c0_ += w;
      atom_cumulative_.push_back(c0_);
    }
    r0_ = std::pow(c0_, 1.0 / alpha_);
  }
}

DisplacementModel DisplacementModel::iid(double alpha, double p) { return DisplacementModel(alpha, p, IidMode{}); }

DisplacementModel DisplacementModel::full_dependence(double alpha, double p) {
  return DisplacementModel(alpha, p, FullDepMode{});
}

DisplacementModel DisplacementModel::angular(double alpha, std::vector<std::vector<double>> atoms,
                                             std::vector<double> weights) {
  require(std::isfinite(alpha) && alpha > 0.0, "tail index alpha must be > 0");
  require(!atoms.empty(), "angular mode needs at least one atom");
  require(atoms.size() == weights.size(), "angular weights must match atoms");
  const std::size_t dim = atoms.front().size();
  require(dim >= 1, "angular atoms must have dimension >= 1");
  for (std::size_t m = 0; m < atoms.size(); ++m) {
    require(atoms[m].size() == dim, "angular atoms must share one dimension");
    require(std::isfinite(weights[m]) && weights[m] > 0.0, "angular weights must be positive");
    double norm2 = 0.0;
    for (double a : atoms[m]) norm2 += a * a;
    require(std::abs(std::sqrt(norm2) - 1.0) <= kMarginalTol, "angular atoms must have unit Euclidean norm");
  }

  const auto coordinate_mass = [&](std::size_t j, bool positive_only) {
    double total = 0.0;
    for (std::size_t m = 0; m < atoms.size(); ++m) {
      const double a = atoms[m][j];
      if (positive_only && a <= 0.0) continue;
      total += weights[m] * std::pow(std::abs(a), alpha);
    }
    return total;
  };

  const double first = coordinate_mass(0, false);
  require(first > 0.0, "first coordinate must carry tail mass");
  for (double& w : weights) w /= first;

  const double p = coordinate_mass(0, true);
  for (std::size_t j = 1; j < dim; ++j) {
    require(std::abs(coordinate_mass(j, false) - 1.0) <= kMarginalTol,
            "angular measure must have identical marginal tail masses");
    require(std::abs(coordinate_mass(j, true) - p) <= kMarginalTol,
            "angular measure must have identical marginal balance");
  }
  return DisplacementModel(alpha, std::clamp(p, 0.0, 1.0), AngularMode{dim, std::move(atoms), std::move(weights)});
}

std::size_t DisplacementModel::max_brood() const noexcept {
  if (const auto* ang = std::get_if<AngularMode>(&mode_)) return ang->dim;
  return 0;
}

double DisplacementModel::marginal_floor() const noexcept {
  if (const auto* ang = std::get_if<AngularMode>(&mode_)) {
    double top = 0.0;
    for (const auto& atom : ang->atoms) top = std::max(top, std::abs(atom[0]));
    return r0_ * top;
  }
  return 1.0;
}

void DisplacementModel::sample_brood(std::span<double> out, Rng& rng) const {
  require(!out.empty(), "brood size must be >= 1");
  if (is_iid()) {
    for (double& x : out) x = signed_pareto(alpha_, p_, rng);
    return;
  }
  if (is_full_dependence()) {
    std::fill(out.begin(), out.end(), signed_pareto(alpha_, p_, rng));
    return;
  }
  const auto& ang = std::get<AngularMode>(mode_);
  require(out.size() <= ang.dim, "brood size exceeds angular dimension");
  const double u = uniform01(rng) * c0_;
  const auto it = std::upper_bound(atom_cumulative_.begin(), atom_cumulative_.end(), u);
  const std::size_t m =
      std::min<std::size_t>(static_cast<std::size_t>(it - atom_cumulative_.begin()), ang.atoms.size() - 1);
  const double radius = r0_ * std::pow(uniform_pos(rng), -1.0 / alpha_);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = radius * ang.atoms[m][j];
}

std::vector<double> DisplacementModel::sample_brood(std::size_t v, Rng& rng) const {
  std::vector<double> out(v);
  sample_brood(std::span<double>(out), rng);
  return out;
}

double b_n(double pi_n, double alpha) {
  require(pi_n > 0.0, "pi_n must be positive");
  require(alpha > 0.0, "alpha must be positive");
  return std::max(1.0, std::pow(pi_n, 1.0 / alpha));
}

double nu_H(const DisplacementModel& model, const Pattern& pattern) {
  const std::size_t v = pattern.size();
  require(v >= 1, "pattern length must be >= 1");
  const std::size_t ones = pattern.ones();
  if (ones == 0) return std::numeric_limits<double>::infinity();
  if (model.is_iid()) return ones == 1 ? model.p() : 0.0;
  if (model.is_full_dependence()) return ones == v ? model.p() : 0.0;

  const auto& ang = std::get<AngularMode>(model.mode());
  require(v <= ang.dim, "pattern length exceeds angular dimension");
  const double alpha = model.alpha();
  double total = 0.0;
  for (std::size_t m = 0; m < ang.atoms.size(); ++m) {
    const auto& a = ang.atoms[m];
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    bool feasible = true;
    for (std::size_t j = 0; j < v; ++j) {
      if (pattern.bits[j]) {
        if (a[j] <= 0.0) {
          feasible = false;
          break;
        }
        lo = std::max(lo, 1.0 / a[j]);
      } else if (a[j] > 0.0) {
        hi = std::min(hi, 1.0 / a[j]);
      }
    }
    if (!feasible || !(hi > lo)) continue;
    const double upper = std::isinf(hi) ? 0.0 : std::pow(hi, -alpha);
    total += ang.weights[m] * (std::pow(lo, -alpha) - upper);
  }
  return total;
}

std::vector<double> pattern_mass_by_ones(const DisplacementModel& model, std::size_t v) {
  std::vector<double> mass(v + 1, 0.0);
  if (v == 0) return mass;
  if (v > kMaxEnumeratedBrood) {
    require(!model.is_angular(), "pattern length exceeds angular dimension");
    // beyond enumeration range: the two axis/diagonal measures in closed form
    if (model.is_iid()) mass[1] = static_cast<double>(v) * model.p();
    else mass[v] = model.p();
    return mass;
  }
  const std::uint64_t count = std::uint64_t{1} << v;
  for (std::uint64_t mask = 1; mask < count; ++mask) {
    const Pattern pattern = Pattern::from_mask(mask, v);
    mass[pattern.ones()] += nu_H(model, pattern);
  }
  return mass;
}

}  // namespace brwre

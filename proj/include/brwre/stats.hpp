#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "brwre/point_measure.hpp"

namespace brwre {

class Ecdf {
 public:
  explicit Ecdf(std::vector<double> values);

  /// Fraction of samples <= x.
  double operator()(double x) const;
  const std::vector<double>& sorted_values() const noexcept { return sorted_; }
  std::size_t n() const noexcept { return sorted_.size(); }

 private:
  std::vector<double> sorted_;
};

/// sup over the grid of |ECDF(x) - oracle(x)|; throws on an empty grid.
double ks_distance(const Ecdf& ecdf, const std::function<double(double)>& oracle, std::span<const double> grid);

struct KsTwoSample {
  double statistic = 0.0;
  /// Asymptotic Kolmogorov p-value.
  double p_value = 1.0;
};

KsTwoSample ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Kolmogorov survival function P(K > lambda).
double kolmogorov_survival(double lambda);

inline constexpr std::uint64_t kCountCap = 64;

/// Total-variation distance between the empirical pmfs of two count samples;
/// counts above kCountCap share one overflow bucket.
double count_distribution_tv(std::span<const std::uint64_t> counts_a, std::span<const std::uint64_t> counts_b);

/// Test functions supported away from the origin.
struct TestFunction {
  enum class Kind { IndicatorAbove, IndicatorBelow, Bump };

  Kind kind = Kind::IndicatorAbove;
  /// IndicatorAbove: threshold x. IndicatorBelow: y (for locations < -y). Bump: inner radius.
  double a = 1.0;
  /// Bump outer radius (ramp reaches theta at |x| = b).
  double b = 2.0;
  double theta = 1.0;

  static TestFunction above(double x, double theta = 1.0);
  static TestFunction below(double y, double theta = 1.0);
  static TestFunction bump(double a, double b, double theta = 1.0);

  double operator()(double location) const;
  /// Smallest |location| where f can be nonzero.
  double support_floor() const noexcept { return a; }
};

/// Mean over measures of exp(-sum multiplicity * f(location)). Throws
/// Error(SupportBelowRetention) when f reaches below `retention_floor`.
double laplace_estimate(const std::vector<PointMeasure>& measures, const TestFunction& f, double retention_floor);

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
};

/// Pearson goodness of fit. Cells are merged left to right until each has
/// expected count >= min_expected; probabilities need not sum to one (the
/// remainder forms a final cell, whose count may be passed as one extra
/// entry of `observed`).
ChiSquareResult chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> probs,
                               double min_expected = 5.0);

}  // namespace brwre

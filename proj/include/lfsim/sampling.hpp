#pragma once

#include <cstddef>
#include <vector>

#include "lfsim/grid.hpp"

namespace lfsim {

struct GaussianSpec {
  double mu = 0.0;
  double sigma = 0.5;
  double weight = 1.0;
  /// Leader target paired with this component. Unused for followers.
  double target = 0.0;
};

/// Finite Gaussian mixture. Weights must sum to 1 (or be empty/all zero for
/// the zero density used in tests).
struct MixtureSpec {
  std::vector<GaussianSpec> components;

  double total_weight() const;
  void validate() const;
};

double gaussian_density(const GaussianSpec& spec, double x);
double gaussian_cdf(const GaussianSpec& spec, double x);
double mixture_density(const MixtureSpec& spec, double x);
double mixture_cdf(const MixtureSpec& spec, double x);

/// Standard normal quantile by bisection on the erfc-based CDF.
/// Lower-tail levels are solved directly; upper-tail levels are mirrored.
double standard_normal_quantile(double q);

struct Sample {
  double position;
  std::size_t component;
};

/// Deterministic inverse-transform sample with component labels.
/// Counts are split across components by largest remainder; inside component
/// p the k-th particle sits at the quantile of level (k - 1/2) / count_p.
/// Result is sorted by position.
std::vector<Sample> sample_components(const MixtureSpec& spec, std::size_t count);

/// Positions only (sorted ascending).
std::vector<double> sample_inverse_transform(const MixtureSpec& spec, std::size_t count);

/// Midpoint cell values of the mixture density.
std::vector<double> discretize_density(const MixtureSpec& spec, const Grid1D& grid);

/// Piecewise-constant profile: sum of values over half-open intervals [a, b).
class IndicatorProfile {
 public:
  struct Interval {
    double a;
    double b;
    double value;
  };

  IndicatorProfile() = default;
  explicit IndicatorProfile(std::vector<Interval> intervals);

  double operator()(double x) const;
  const std::vector<Interval>& intervals() const { return intervals_; }
  bool empty() const { return intervals_.empty(); }

 private:
  std::vector<Interval> intervals_;
};

inline double indicator_velocity(const IndicatorProfile& profile, double x) { return profile(x); }

}  // namespace lfsim

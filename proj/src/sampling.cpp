#include "lfsim/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace lfsim {

double MixtureSpec::total_weight() const {
  double w = 0.0;
  for (const auto& c : components) w += c.weight;
  return w;
}

void MixtureSpec::validate() const {
  for (const auto& c : components) {
    if (!(c.sigma > 0.0)) throw std::invalid_argument("Gaussian component: sigma must be positive");
    if (!(c.weight >= 0.0 && c.weight <= 1.0))
      throw std::invalid_argument("Gaussian component: weight must lie in [0, 1]");
  }
  if (!components.empty() && std::fabs(total_weight() - 1.0) > 1e-12)
    throw std::invalid_argument("mixture weights must sum to 1");
}

double gaussian_density(const GaussianSpec& spec, double x) {
  const double z = (x - spec.mu) / spec.sigma;
  return spec.weight / (spec.sigma * std::sqrt(2.0 * std::numbers::pi)) * std::exp(-0.5 * z * z);
}

double gaussian_cdf(const GaussianSpec& spec, double x) {
  const double z = (x - spec.mu) / spec.sigma;
  return spec.weight * 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double mixture_density(const MixtureSpec& spec, double x) {
  double sum = 0.0;
  for (const auto& c : spec.components) sum += gaussian_density(c, x);
  return sum;
}

double mixture_cdf(const MixtureSpec& spec, double x) {
  double sum = 0.0;
  for (const auto& c : spec.components) sum += gaussian_cdf(c, x);
  return sum;
}

double standard_normal_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::domain_error("normal quantile: level must lie in (0, 1)");
  if (q == 0.5) return 0.0;
  if (q > 0.5) return -standard_normal_quantile(1.0 - q);
  auto cdf = [](double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); };
  double lo = -40.0;
  double hi = 0.0;
  if (!(cdf(lo) <= q && cdf(hi) >= q)) throw std::runtime_error("normal quantile: bracket does not contain level");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (cdf(mid) < q) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace {

std::vector<std::size_t> split_counts(const MixtureSpec& spec, std::size_t count) {
  const std::size_t p = spec.components.size();
  std::vector<std::size_t> counts(p, 0);
  std::vector<double> remainder(p, 0.0);
  std::size_t assigned = 0;
  const double total = spec.total_weight();
  for (std::size_t i = 0; i < p; ++i) {
    const double exact = static_cast<double>(count) * spec.components[i].weight / total;
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    remainder[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < count; ++k, ++assigned) ++counts[order[k % p]];
  return counts;
}

}  // namespace

std::vector<Sample> sample_components(const MixtureSpec& spec, std::size_t count) {
  if (count == 0) throw std::invalid_argument("sample_inverse_transform: count must be >= 1");
  spec.validate();
  if (spec.components.empty() || !(spec.total_weight() > 0.0))
    throw std::invalid_argument("sample_inverse_transform: mixture has no mass");
  const auto counts = split_counts(spec, count);
  std::vector<Sample> out;
  out.reserve(count);
  for (std::size_t p = 0; p < counts.size(); ++p) {
    const auto& c = spec.components[p];
    const std::size_t n = counts[p];
    std::vector<double> z(n);
    for (std::size_t k = 0; k < n; ++k) {
      // Mirror the upper half so the sample is exactly symmetric about mu.
      if (2 * k + 1 > n) {
        z[k] = -z[n - 1 - k];
      } else {
        z[k] = standard_normal_quantile((static_cast<double>(k) + 0.5) / static_cast<double>(n));
      }
    }
    for (std::size_t k = 0; k < n; ++k) out.push_back({c.mu + c.sigma * z[k], p});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Sample& a, const Sample& b) { return a.position < b.position; });
  return out;
}

std::vector<double> sample_inverse_transform(const MixtureSpec& spec, std::size_t count) {
  const auto samples = sample_components(spec, count);
  std::vector<double> out(samples.size());
  std::transform(samples.begin(), samples.end(), out.begin(), [](const Sample& s) { return s.position; });
  return out;
}

std::vector<double> discretize_density(const MixtureSpec& spec, const Grid1D& grid) {
  std::vector<double> rho(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) rho[j] = mixture_density(spec, grid.center(j));
  return rho;
}

IndicatorProfile::IndicatorProfile(std::vector<Interval> intervals) : intervals_(std::move(intervals)) {
  for (const auto& iv : intervals_)
    if (!(iv.b > iv.a)) throw std::invalid_argument("indicator interval must satisfy a < b");
  for (std::size_t i = 0; i < intervals_.size(); ++i)
    for (std::size_t k = i + 1; k < intervals_.size(); ++k) {
      const auto& p = intervals_[i];
      const auto& q = intervals_[k];
      if (p.a < q.b && q.a < p.b) throw std::invalid_argument("indicator intervals overlap");
    }
}

double IndicatorProfile::operator()(double x) const {
  double v = 0.0;
  for (const auto& iv : intervals_)
    if (x >= iv.a && x < iv.b) v += iv.value;
  return v;
}

}  // namespace lfsim

#include "lfsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lfsim/pairwise.hpp"

namespace lfsim {

namespace {

// Integral over an interval of length len of |d(x)| where d is linear from
// d0 to d1.
double abs_linear_integral(double d0, double d1, double len) {
  const double a0 = std::fabs(d0);
  const double a1 = std::fabs(d1);
  if ((d0 >= 0.0 && d1 >= 0.0) || (d0 <= 0.0 && d1 <= 0.0)) return 0.5 * (a0 + a1) * len;
  return len * (d0 * d0 + d1 * d1) / (2.0 * (a0 + a1));
}

// Normalised CDF at the n+1 cell faces.
std::vector<double> face_cdf(std::span<const double> density, const char* who) {
  std::vector<double> cdf(density.size() + 1, 0.0);
  for (std::size_t k = 0; k < density.size(); ++k) cdf[k + 1] = cdf[k] + density[k];
  const double total = cdf.back();
  if (!(total > 0.0)) throw std::domain_error(std::string(who) + ": density has zero mass");
  for (double& c : cdf) c /= total;
  return cdf;
}

}  // namespace

double w1_empirical_vs_density(std::span<const double> points, std::span<const double> density, const Grid1D& grid) {
  if (points.empty()) throw std::invalid_argument("w1_empirical_vs_density: no points");
  if (density.size() != grid.size()) throw std::invalid_argument("w1_empirical_vs_density: grid mismatch");
  const auto cdf = face_cdf(density, "w1_empirical_vs_density");
  std::vector<double> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end());

  const double m = static_cast<double>(sorted.size());
  const double dx = grid.dx();
  std::size_t idx = 0;
  while (idx < sorted.size() && sorted[idx] < grid.x_min()) ++idx;

  double total = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double a = grid.left_face(k);
    const double b = k + 1 == grid.size() ? grid.x_max() : grid.left_face(k + 1);
    const double c0 = cdf[k];
    const double slope = (cdf[k + 1] - cdf[k]) / dx;
    double s = a;
    double e_value = static_cast<double>(idx) / m;
    while (idx < sorted.size() && sorted[idx] < b) {
      const double p = sorted[idx];
      total += abs_linear_integral(e_value - (c0 + slope * (s - a)), e_value - (c0 + slope * (p - a)), p - s);
      s = p;
      ++idx;
      e_value = static_cast<double>(idx) / m;
    }
    total += abs_linear_integral(e_value - (c0 + slope * (s - a)), e_value - cdf[k + 1], b - s);
  }
  return total;
}

double w1_density_vs_density(std::span<const double> a, std::span<const double> b, const Grid1D& grid) {
  if (a.size() != grid.size() || b.size() != grid.size())
    throw std::invalid_argument("w1_density_vs_density: grid mismatch");
  const auto ca = face_cdf(a, "w1_density_vs_density");
  const auto cb = face_cdf(b, "w1_density_vs_density");
  double total = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k)
    total += abs_linear_integral(ca[k] - cb[k], ca[k + 1] - cb[k + 1], grid.dx());
  return total;
}

double modulated_energy_followers(const ParticleState& followers, const FluidState& fluid, const Grid1D& grid) {
  const std::size_t m = followers.size();
  if (m == 0) return 0.0;
  const auto u = fluid.velocities();
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double d = followers.velocities[i] - interpolate(u, grid, followers.positions[i]);
    sum += d * d;
  }
  return sum / static_cast<double>(m);
}

double modulated_energy_leaders(const ParticleState& leaders, std::span<const FluidState> slices,
                                const TargetMixture& mixture, const Grid1D& grid) {
  if (slices.size() != mixture.size()) throw std::invalid_argument("modulated_energy_leaders: slice count mismatch");
  const std::size_t n = leaders.size();
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t p = 0; p < slices.size(); ++p) {
    const auto u = slices[p].velocities();
    double part = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = leaders.velocities[i] - interpolate(u, grid, leaders.positions[i]);
      part += d * d;
    }
    sum += mixture.weights[p] * part;
  }
  return sum / static_cast<double>(n);
}

FunctionalF functional_F(const MicroSystem& micro, const HybridSystem& hybrid) {
  const std::size_t n = micro.leaders.size();
  if (n != hybrid.leaders.size()) throw std::invalid_argument("functional_F: leader counts differ");
  FunctionalF f;
  const double w1 = w1_empirical_vs_density(micro.followers.positions, hybrid.follower.rho, hybrid.grid);
  f.f1 = w1 * w1;
  f.f2 = modulated_energy_followers(micro.followers, hybrid.follower, hybrid.grid);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = micro.leaders.positions[i] - hybrid.leaders.positions[i];
    const double dv = micro.leaders.velocities[i] - hybrid.leaders.velocities[i];
    sum += dx * dx + dv * dv;
  }
  f.f3 = n == 0 ? 0.0 : sum / static_cast<double>(n);
  return f;
}

FunctionalG functional_G(const HybridSystem& hybrid, std::span<const std::size_t> leader_labels,
                         const MacMacSystem& macmac) {
  if (!(hybrid.grid == macmac.grid)) throw std::invalid_argument("functional_G: grids differ");
  if (leader_labels.size() != hybrid.leaders.size())
    throw std::invalid_argument("functional_G: one label per leader required");
  const auto& grid = macmac.grid;
  FunctionalG g;
  g.g1 = modulated_energy_leaders(hybrid.leaders, macmac.leader_slices, macmac.mixture, grid);

  for (std::size_t p = 0; p < macmac.mixture.size(); ++p) {
    std::vector<double> members;
    for (std::size_t i = 0; i < leader_labels.size(); ++i)
      if (leader_labels[i] == p) members.push_back(hybrid.leaders.positions[i]);
    if (members.empty()) continue;
    const double w1 = w1_empirical_vs_density(members, macmac.leader_slices[p].rho, grid);
    g.g2 += macmac.mixture.weights[p] * w1 * w1;
  }

  const auto& fh = hybrid.follower;
  const auto& fm = macmac.follower;
  g.g3 = folded_sum(grid.size(), [&](std::size_t j) {
           const double d = fh.velocity(j) - fm.velocity(j);
           return fh.rho[j] * d * d;
         }) *
         grid.dx();
  const double w1 = w1_density_vs_density(fh.rho, fm.rho, grid);
  g.g4 = w1 * w1;
  return g;
}

BinnedMoments bin_momentum(const ParticleState& particles, const Grid1D& grid) {
  const std::size_t n = grid.size();
  BinnedMoments out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  const std::size_t m = particles.size();
  if (m == 0) return out;
  std::vector<double> count(n, 0.0);
  std::vector<double> velocity_sum(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double s = (particles.positions[i] - grid.x_min()) / grid.dx();
    if (!(s >= 0.0) || s >= static_cast<double>(n)) continue;
    const auto k = static_cast<std::size_t>(s);
    count[k] += 1.0;
    velocity_sum[k] += particles.velocities[i];
  }
  const double scale = 1.0 / (static_cast<double>(m) * grid.dx());
  for (std::size_t k = 0; k < n; ++k) {
    out.density[k] = count[k] * scale;
    if (count[k] > 0.0) out.momentum[k] = out.density[k] * (velocity_sum[k] / count[k]);
  }
  return out;
}

RateFit fit_rate(std::span<const double> sizes, std::span<const double> values) {
  if (sizes.size() != values.size()) throw std::invalid_argument("fit_rate: sizes and values differ in length");
  if (sizes.size() < 2) throw std::invalid_argument("fit_rate: regression needs at least two points");
  const std::size_t n = sizes.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(sizes[i] > 0.0)) throw std::invalid_argument("fit_rate: sizes must be positive");
    if (!(values[i] > 0.0)) throw std::invalid_argument("fit_rate: values must be positive");
    lx[i] = std::log(sizes[i]);
  }
  for (std::size_t i = 0; i < n; ++i) ly[i] = std::log(values[i] / values[0]);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_rate: sizes must not all be equal");
  RateFit fit;
  fit.sizes.assign(sizes.begin(), sizes.end());
  fit.values.assign(values.begin(), values.end());
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss_res += r * r;
  }
  fit.intercept += std::log(values[0]);
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

void write_diagnostics_csv(std::ostream& out, std::span<const DiagnosticsRow> rows) {
  const bool with_f = !rows.empty() && rows.front().F.has_value();
  const bool with_g = !rows.empty() && rows.front().G.has_value();
  out << "t,mass_F,com_F,max_rho_F,min_rho_F,boundary_flux";
  if (with_f) out << ",F1,F2,F3,Fsum";
  if (with_g) out << ",G1,G2,G3,G4,Gsum";
  out << '\n';
  const auto old_precision = out.precision(17);
  for (const auto& r : rows) {
    out << r.t << ',' << r.mass_F << ',' << r.com_F << ',' << r.max_rho_F << ',' << r.min_rho_F << ','
        << r.boundary_flux;
    if (with_f) {
      const FunctionalF f = r.F.value_or(FunctionalF{});
      out << ',' << f.f1 << ',' << f.f2 << ',' << f.f3 << ',' << f.sum();
    }
    if (with_g) {
      const FunctionalG g = r.G.value_or(FunctionalG{});
      out << ',' << g.g1 << ',' << g.g2 << ',' << g.g3 << ',' << g.g4 << ',' << g.sum();
    }
    out << '\n';
  }
  out.precision(old_precision);
}

DiagnosticsRow fluid_diagnostics(double t, const FluidState& fluid, const Grid1D& grid, double boundary_flux) {
  DiagnosticsRow row;
  row.t = t;
  row.mass_F = fluid.mass(grid);
  row.com_F = fluid_com(fluid, grid);
  row.max_rho_F = *std::max_element(fluid.rho.begin(), fluid.rho.end());
  row.min_rho_F = *std::min_element(fluid.rho.begin(), fluid.rho.end());
  row.boundary_flux = boundary_flux;
  return row;
}

DiagnosticsRow particle_diagnostics(double t, const ParticleState& followers, const Grid1D& grid) {
  const auto binned = bin_momentum(followers, grid);
  DiagnosticsRow row;
  row.t = t;
  row.mass_F = folded_sum(binned.density.size(), [&](std::size_t k) { return binned.density[k]; }) * grid.dx();
  row.com_F = followers.mean_position();
  row.max_rho_F = *std::max_element(binned.density.begin(), binned.density.end());
  row.min_rho_F = *std::min_element(binned.density.begin(), binned.density.end());
  return row;
}

}  // namespace lfsim

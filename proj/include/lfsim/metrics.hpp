#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "lfsim/fluid.hpp"
#include "lfsim/grid.hpp"
#include "lfsim/hybrid.hpp"
#include "lfsim/macmac.hpp"
#include "lfsim/micro.hpp"

namespace lfsim {

/// Round-off slacks for the W1 axioms on unit-mass densities: identity
/// (d(a, a) and d(a, c a)) and the triangle inequality.
inline constexpr double kW1IdentitySlack = 1e-12;
inline constexpr double kW1TriangleSlack = 1e-10;

/// W1 between the uniform empirical measure on `points` and the
/// piecewise-constant density on `grid` (renormalised to unit mass).
/// Exact integral of |F_emp - F_grid| over [x_min, x_max].
double w1_empirical_vs_density(std::span<const double> points, std::span<const double> density, const Grid1D& grid);

/// W1 between two piecewise-constant densities on the same grid, both
/// renormalised to unit mass.
double w1_density_vs_density(std::span<const double> a, std::span<const double> b, const Grid1D& grid);

/// (1/M) sum_i |w_i - u(y_i)|^2 with u interpolated from the fluid.
/// The modulated kinetic energy is half this value.
double modulated_energy_followers(const ParticleState& followers, const FluidState& fluid, const Grid1D& grid);

/// (1/N) sum_i sum_p a_p |v_i - u_p(x_i)|^2 (twice the averaged modulated energy).
double modulated_energy_leaders(const ParticleState& leaders, std::span<const FluidState> slices,
                                const TargetMixture& mixture, const Grid1D& grid);

struct FunctionalF {
  double f1 = 0.0;  // W1(follower positions, follower fluid)^2
  double f2 = 0.0;  // follower velocity mismatch
  double f3 = 0.0;  // index-paired leader mismatch
  double sum() const { return f1 + f2 + f3; }
};

struct FunctionalG {
  double g1 = 0.0;  // leader velocity mismatch against the slice fields
  double g2 = 0.0;  // per-target W1(leaders, slice)^2, a-weighted
  double g3 = 0.0;  // follower kinetic mismatch between the two fluids
  double g4 = 0.0;  // W1(follower fluids)^2
  double sum() const { return g1 + g2 + g3 + g4; }
};

/// Particle system against particle-fluid system (same leader count).
FunctionalF functional_F(const MicroSystem& micro, const HybridSystem& hybrid);

/// Particle-fluid system against two-fluid system. `leader_labels[i]` is the
/// mixture index of leader i's target.
FunctionalG functional_G(const HybridSystem& hybrid, std::span<const std::size_t> leader_labels,
                         const MacMacSystem& macmac);

struct BinnedMoments {
  std::vector<double> density;
  std::vector<double> momentum;
};

/// Histogram density (count / (M dx)) and density times mean bin velocity.
/// Particles outside the domain are dropped.
BinnedMoments bin_momentum(const ParticleState& particles, const Grid1D& grid);

struct RateFit {
  std::vector<double> sizes;
  std::vector<double> values;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double rate() const { return -slope; }
};

/// Least-squares fit of log(value) against log(size).
RateFit fit_rate(std::span<const double> sizes, std::span<const double> values);

/// One diagnostics record. Optional blocks are omitted from CSV when absent.
struct DiagnosticsRow {
  double t = 0.0;
  double mass_F = 0.0;
  double com_F = 0.0;
  double max_rho_F = 0.0;
  double min_rho_F = 0.0;
  double boundary_flux = 0.0;
  std::optional<FunctionalF> F;
  std::optional<FunctionalG> G;
};

/// Writes rows as CSV: t, mass_F, com_F, max_rho_F, min_rho_F,
/// boundary_flux, then F1..Fsum or G1..Gsum if the first row carries them.
void write_diagnostics_csv(std::ostream& out, std::span<const DiagnosticsRow> rows);

/// Follower summary of a fluid state.
DiagnosticsRow fluid_diagnostics(double t, const FluidState& fluid, const Grid1D& grid, double boundary_flux);

/// Follower summary of a particle ensemble (density moments from binning).
DiagnosticsRow particle_diagnostics(double t, const ParticleState& followers, const Grid1D& grid);

}  // namespace lfsim

#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lfsim/grid.hpp"
#include "lfsim/kernels.hpp"

namespace lfsim {

/// Densities below this carry no velocity.
inline constexpr double kVacuumDensity = 1e-12;

/// Cell averages of density and momentum for one pressureless fluid.
struct FluidState {
  std::vector<double> rho;
  std::vector<double> mom;

  FluidState() = default;
  explicit FluidState(std::size_t n) : rho(n, 0.0), mom(n, 0.0) {}
  FluidState(std::vector<double> density, std::vector<double> momentum);

  std::size_t size() const { return rho.size(); }
  double velocity(std::size_t j) const { return rho[j] >= kVacuumDensity ? mom[j] / rho[j] : 0.0; }
  std::vector<double> velocities() const;
  double mass(const Grid1D& grid) const;
  double max_speed() const;

  /// Zeroes momentum in vacuum cells.
  void enforce_vacuum();
};

struct CflConfig {
  double cfl = 0.9;
  double dt_max = 1e-2;
  double lambda_floor = 1e-8;

  void validate() const;
};

struct FluxPair {
  double mass;
  double momentum;
};

/// Rusanov flux for the pressureless system with local speed max(|u_L|, |u_R|).
FluxPair rusanov_flux(double rho_l, double mom_l, double rho_r, double mom_r);

/// min(dt_max, cfl * dx / max(lambda_max, lambda_floor)) over all given fluids.
double cfl_dt(std::span<const FluidState* const> states, const Grid1D& grid, const CflConfig& cfg);
double cfl_dt(const FluidState& state, const Grid1D& grid, const CflConfig& cfg);

class FluidStepError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// First-order conservative update with zero-gradient ghost cells.
/// Returns the net mass inflow through the two boundaries over the step
/// (dt * (F_left - F_right)).
double hyperbolic_step(FluidState& state, const Grid1D& grid, double dt);

/// mom_j += dt * rho_j * accel_j.
void source_step(FluidState& state, std::span<const double> accel, double dt);

/// Kernel values tabulated on the difference grid: value(m) = W'(m dx) for
/// m in (-n, n). All grid convolutions go through this table.
class DifferenceTable {
 public:
  DifferenceTable() = default;
  template <class Fn>
  DifferenceTable(std::size_t n, double dx, Fn&& fn) : n_(n), values_(2 * n - 1) {
    for (std::size_t i = 0; i < values_.size(); ++i) {
      const double m = static_cast<double>(static_cast<long>(i) - static_cast<long>(n) + 1);
      values_[i] = fn(m * dx);
    }
  }
  static DifferenceTable of(const KernelSpec& kernel, const Grid1D& grid);
  static DifferenceTable of(const WeightSpec& weight, const Grid1D& grid);

  /// Value at x_k - x_j.
  double at(std::size_t k, std::size_t j) const { return values_[k + n_ - 1 - j]; }
  const double* row(std::size_t j) const { return values_.data() + n_ - 1 - j; }
  std::size_t cells() const { return n_; }
  std::span<const double> values() const { return values_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

/// (W' * rho)(x_j) = sum_k W'(x_j - x_k) rho_k dx.
std::vector<double> convolve_grid(const KernelSpec& kernel, std::span<const double> density, const Grid1D& grid);

/// Pulled force sum_k table(x_k - x_j) weight_k dx, i.e. -(W' * weight)(x_j)
/// for an odd kernel. Accumulated into out. Long tables go through an FFT
/// (round-off instead of exact pairing).
void accumulate_pull(const DifferenceTable& table, std::span<const double> weight, double dx, double scale,
                     std::span<double> out);

/// accumulate_pull for an interaction kernel. Linear kernels use the first
/// two moments of `weight` instead of the table.
void accumulate_kernel_pull(const KernelSpec& kernel, const Grid1D& grid, std::span<const double> weight, double scale,
                            std::span<double> out);

/// Piecewise-linear interpolation of cell-centre values, clamped at the ends.
double interpolate(std::span<const double> values, const Grid1D& grid, double x);

}  // namespace lfsim

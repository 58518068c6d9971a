#include "lfsim/hybrid.hpp"

#include <algorithm>
#include <cmath>

#include "lfsim/pairwise.hpp"

namespace lfsim {

void HybridSystem::validate() const {
  leaders.validate();
  control.validate();
  if (control.targets.size() != leaders.size())
    throw std::invalid_argument("HybridSystem: one target per leader required");
  if (follower.size() != grid.size()) throw std::invalid_argument("HybridSystem: fluid does not match grid");
  if (!(follower.mass(grid) > 0.0)) throw std::invalid_argument("HybridSystem: follower fluid has no mass");
}

double fluid_com(const FluidState& state, const Grid1D& grid) {
  const std::size_t n = state.size();
  const double mass = folded_sum(n, [&](std::size_t k) { return state.rho[k]; });
  if (!(mass > 0.0)) throw std::domain_error("fluid_com: fluid has zero mass");
  const double first = folded_sum(n, [&](std::size_t k) { return grid.center(k) * state.rho[k]; });
  return first / mass;
}

void leader_rhs_hybrid(const HybridSystem& system, double com, std::span<const double> state,
                       std::span<double> out) {
  const std::size_t n = system.leaders.size();
  const auto x = state.subspan(0, n);
  const auto v = state.subspan(n, n);
  const auto force = self_interaction(system.kernels.leader, x);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = v[i];
    out[n + i] = leader_acceleration(x[i], v[i], system.control.targets[i], com, system.control.alpha, force[i]);
  }
}

namespace {

template <class K, class W>
void leader_pull_on_cells(K cross, W phi, const ParticleState& leaders, const Grid1D& grid,
                          std::span<const double> u, std::span<double> out) {
  const std::size_t n = leaders.size();
  const std::size_t half = n / 2;
  const double inv_n = 1.0 / static_cast<double>(n);
  // Mirror partners laid out side by side so the pair terms vectorise; the
  // reduction order is the same as folded_sum.
  std::vector<double> xa(half), va(half), xb(half), vb(half), pair(half);
  for (std::size_t k = 0; k < half; ++k) {
    xa[k] = leaders.positions[k];
    va[k] = leaders.velocities[k];
    xb[k] = leaders.positions[n - 1 - k];
    vb[k] = leaders.velocities[n - 1 - k];
  }
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double xj = grid.center(j);
    const double uj = u[j];
    for (std::size_t k = 0; k < half; ++k) {
      const double ra = xa[k] - xj;
      const double rb = xb[k] - xj;
      pair[k] = (cross(ra) + phi(ra) * (va[k] - uj)) + (cross(rb) + phi(rb) * (vb[k] - uj));
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < half; ++k) sum += pair[k];
    if (n % 2 == 1) {
      const double r = leaders.positions[half] - xj;
      sum += cross(r) + phi(r) * (leaders.velocities[half] - uj);
    }
    out[j] += sum * inv_n;
  }
}

}  // namespace

std::vector<double> follower_source_hybrid(const FluidState& fluid, const Grid1D& grid, const ParticleState& leaders,
                                           const InteractionKernels& kernels) {
  std::vector<double> accel(grid.size(), 0.0);
  if (!kernels.follower.is_zero())
    accumulate_kernel_pull(kernels.follower, grid, fluid.rho, 1.0, accel);
  if (leaders.size() > 0 && !(kernels.cross.is_zero() && kernels.phi.is_zero())) {
    const auto u = fluid.velocities();
    visit_kernel(kernels.cross, [&](auto cross) {
      visit_weight(kernels.phi, [&](auto phi) { leader_pull_on_cells(cross, phi, leaders, grid, u, accel); });
    });
  }
  return accel;
}

StepReport hybrid_step(HybridSystem& system, const CflConfig& cfg, double dt_cap) {
  double dt = std::min(cfl_dt(system.follower, system.grid, cfg), dt_cap);
  const double com = fluid_com(system.follower, system.grid);

  FluidState fluid;
  double inflow = 0.0;
  for (int attempt = 0;; ++attempt) {
    fluid = system.follower;
    try {
      inflow = hyperbolic_step(fluid, system.grid, dt);
      const auto accel = follower_source_hybrid(fluid, system.grid, system.leaders, system.kernels);
      source_step(fluid, accel, dt);
      break;
    } catch (const FluidStepError&) {
      if (attempt >= 5) throw;
      dt *= 0.5;
    }
  }

  const RhsFunction rhs = [&system, com](std::span<const double> s, double, std::span<double> out) {
    leader_rhs_hybrid(system, com, s, out);
  };
  const std::size_t n = system.leaders.size();
  if (n > 0) {
    std::vector<double> state(2 * n);
    std::copy(system.leaders.positions.begin(), system.leaders.positions.end(), state.begin());
    std::copy(system.leaders.velocities.begin(), system.leaders.velocities.end(), state.begin() + n);
    state = rk4_step(rhs, state, 0.0, dt);
    std::copy(state.begin(), state.begin() + n, system.leaders.positions.begin());
    std::copy(state.begin() + n, state.end(), system.leaders.velocities.begin());
  }
  system.follower = std::move(fluid);
  return {dt, {inflow}};
}

HybridSimulation::HybridSimulation(HybridSystem system, CflConfig cfg) : system_(std::move(system)), cfg_(cfg) {
  cfg_.validate();
  system_.validate();
}

void HybridSimulation::advance_to(double t_target, const std::function<void(const HybridSimulation&)>& after_step) {
  while (time_ < t_target) {
    StepReport report;
    try {
      report = hybrid_step(system_, cfg_, t_target - time_);
    } catch (const IntegrationError& e) {
      throw IntegrationError(e.what(), time_);
    } catch (const FluidStepError& e) {
      throw IntegrationError(e.what(), time_);
    }
    inflow_ += report.boundary_inflow[0];
    ++steps_;
    // Land exactly on the target when the cap was the binding constraint.
    time_ = report.dt >= t_target - time_ ? t_target : time_ + report.dt;
    if (after_step) after_step(*this);
  }
}

}  // namespace lfsim

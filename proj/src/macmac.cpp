#include "lfsim/macmac.hpp"

#include <algorithm>
#include <cmath>

namespace lfsim {

void TargetMixture::validate() const {
  if (targets.size() != weights.size()) throw std::invalid_argument("TargetMixture: length mismatch");
  if (targets.empty()) throw std::invalid_argument("TargetMixture: empty");
  double sum = 0.0;
  for (double a : weights) {
    if (!(a > 0.0)) throw std::invalid_argument("TargetMixture: weights must be positive");
    sum += a;
  }
  if (std::fabs(sum - 1.0) > 1e-12) throw std::invalid_argument("TargetMixture: weights must sum to 1");
}

void MacMacSystem::validate() const {
  mixture.validate();
  if (leader_slices.size() != mixture.size())
    throw std::invalid_argument("MacMacSystem: one leader slice per target required");
  if (follower.size() != grid.size()) throw std::invalid_argument("MacMacSystem: follower does not match grid");
  for (const auto& s : leader_slices)
    if (s.size() != grid.size()) throw std::invalid_argument("MacMacSystem: leader slice does not match grid");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("MacMacSystem: alpha must lie in [0, 1]");
}

std::vector<double> MacMacSystem::mixed_leader_density() const {
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t p = 0; p < leader_slices.size(); ++p)
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += mixture.weights[p] * leader_slices[p].rho[j];
  return out;
}

std::vector<double> MacMacSystem::mixed_leader_momentum() const {
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t p = 0; p < leader_slices.size(); ++p) {
    const auto& s = leader_slices[p];
    for (std::size_t j = 0; j < out.size(); ++j)
      if (s.rho[j] >= kVacuumDensity) out[j] += mixture.weights[p] * s.mom[j];
  }
  return out;
}

namespace {

// Leader acceleration without the slice-specific terms: the mixed-density
// interaction, shared by every slice.
std::vector<double> leader_interaction(const MacMacSystem& system) {
  std::vector<double> out(system.grid.size(), 0.0);
  if (!system.kernels.leader.is_zero())
    accumulate_kernel_pull(system.kernels.leader, system.grid, system.mixed_leader_density(), 1.0, out);
  return out;
}

std::vector<double> slice_source(const MacMacSystem& system, std::size_t p, double com,
                                 const std::vector<double>& interaction) {
  const auto& grid = system.grid;
  const auto& slice = system.leader_slices[p];
  const double xi = system.mixture.targets[p];
  std::vector<double> a(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j)
    a[j] = leader_acceleration(grid.center(j), slice.velocity(j), xi, com, system.alpha, interaction[j]);
  return a;
}

}  // namespace

std::vector<double> leader_source_macmac(const MacMacSystem& system, std::size_t p) {
  if (p >= system.leader_slices.size()) throw std::out_of_range("leader_source_macmac: slice index");
  const double com = fluid_com(system.follower, system.grid);
  return slice_source(system, p, com, leader_interaction(system));
}

std::vector<double> follower_source_macmac(const MacMacSystem& system) {
  const auto& grid = system.grid;
  const double dx = grid.dx();
  const auto& k = system.kernels;
  std::vector<double> accel(grid.size(), 0.0);
  if (!k.follower.is_zero())
    accumulate_kernel_pull(k.follower, grid, system.follower.rho, 1.0, accel);
  const auto leader_rho = system.mixed_leader_density();
  accumulate_kernel_pull(k.cross, grid, leader_rho, 1.0, accel);
  if (!k.phi.is_zero()) {
    // sum_k phi(x_k - x_j) (u_k - u_j) rho_k dx, split into two pulls.
    const auto phi = DifferenceTable::of(k.phi, grid);
    std::vector<double> carried(grid.size(), 0.0);
    std::vector<double> weight(grid.size(), 0.0);
    accumulate_pull(phi, system.mixed_leader_momentum(), dx, 1.0, carried);
    accumulate_pull(phi, leader_rho, dx, 1.0, weight);
    for (std::size_t j = 0; j < grid.size(); ++j)
      accel[j] += carried[j] - system.follower.velocity(j) * weight[j];
  }
  return accel;
}

StepReport macmac_step(MacMacSystem& system, const CflConfig& cfg, double dt_cap) {
  std::vector<const FluidState*> all{&system.follower};
  for (const auto& s : system.leader_slices) all.push_back(&s);
  double dt = std::min(cfl_dt(all, system.grid, cfg), dt_cap);

  for (int attempt = 0;; ++attempt) {
    MacMacSystem next = system;
    try {
      StepReport report{dt, {}};
      report.boundary_inflow.push_back(hyperbolic_step(next.follower, next.grid, dt));
      for (auto& s : next.leader_slices) report.boundary_inflow.push_back(hyperbolic_step(s, next.grid, dt));

      const double com = fluid_com(next.follower, next.grid);
      const auto interaction = leader_interaction(next);
      std::vector<std::vector<double>> slice_accel;
      for (std::size_t p = 0; p < next.leader_slices.size(); ++p)
        slice_accel.push_back(slice_source(next, p, com, interaction));
      const auto follower_accel = follower_source_macmac(next);

      source_step(next.follower, follower_accel, dt);
      for (std::size_t p = 0; p < next.leader_slices.size(); ++p)
        source_step(next.leader_slices[p], slice_accel[p], dt);
      system = std::move(next);
      return report;
    } catch (const FluidStepError&) {
      if (attempt >= 5) throw;
      dt *= 0.5;
    }
  }
}

MacMacSimulation::MacMacSimulation(MacMacSystem system, CflConfig cfg)
    : system_(std::move(system)), cfg_(cfg), inflow_(1 + system_.leader_slices.size(), 0.0) {
  cfg_.validate();
  system_.validate();
}

void MacMacSimulation::advance_to(double t_target, const std::function<void(const MacMacSimulation&)>& after_step) {
  while (time_ < t_target) {
    StepReport report;
    try {
      report = macmac_step(system_, cfg_, t_target - time_);
    } catch (const FluidStepError& e) {
      throw IntegrationError(e.what(), time_);
    }
    for (std::size_t i = 0; i < inflow_.size(); ++i) inflow_[i] += report.boundary_inflow[i];
    ++steps_;
    time_ = report.dt >= t_target - time_ ? t_target : time_ + report.dt;
    if (after_step) after_step(*this);
  }
}

}  // namespace lfsim

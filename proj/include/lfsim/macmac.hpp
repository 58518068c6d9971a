#pragma once

#include <functional>
#include <vector>

#include "lfsim/fluid.hpp"
#include "lfsim/hybrid.hpp"
#include "lfsim/micro.hpp"

namespace lfsim {

/// Target distribution g = sum_p a_p delta_{xi_p}.
struct TargetMixture {
  std::vector<double> targets;
  std::vector<double> weights;

  std::size_t size() const { return targets.size(); }
  void validate() const;
};

/// Leader fluid split into one slice per target (each slice is the
/// conditional density given xi_p, unit mass initially) plus one follower
/// fluid, all on one grid.
struct MacMacSystem {
  std::vector<FluidState> leader_slices;
  FluidState follower;
  TargetMixture mixture;
  double alpha = 0.5;
  InteractionKernels kernels;
  Grid1D grid;

  void validate() const;
  /// sum_p a_p rho_p
  std::vector<double> mixed_leader_density() const;
  /// sum_p a_p rho_p u_p
  std::vector<double> mixed_leader_momentum() const;
};

/// Acceleration of leader slice p at every cell centre.
std::vector<double> leader_source_macmac(const MacMacSystem& system, std::size_t p);

/// Acceleration of the follower fluid at every cell centre.
std::vector<double> follower_source_macmac(const MacMacSystem& system);

/// One step of every fluid with a common dt from all characteristic speeds.
/// boundary_inflow lists the follower first, then the slices in order.
StepReport macmac_step(MacMacSystem& system, const CflConfig& cfg, double dt_cap = 1e300);

class MacMacSimulation {
 public:
  MacMacSimulation(MacMacSystem system, CflConfig cfg);

  void advance_to(double t_target, const std::function<void(const MacMacSimulation&)>& after_step = {});

  double time() const { return time_; }
  std::size_t steps() const { return steps_; }
  /// Accumulated net inflow: follower first, then slices.
  const std::vector<double>& boundary_inflow() const { return inflow_; }
  const MacMacSystem& system() const { return system_; }

 private:
  MacMacSystem system_;
  CflConfig cfg_;
  double time_ = 0.0;
  std::vector<double> inflow_;
  std::size_t steps_ = 0;
};

}  // namespace lfsim

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "lfsim/fluid.hpp"
#include "lfsim/micro.hpp"

namespace lfsim {

/// Leader particles coupled to a follower fluid on a fixed grid.
struct HybridSystem {
  ParticleState leaders;
  ControlParams control;  // targets: one per leader
  FluidState follower;
  Grid1D grid;
  InteractionKernels kernels;

  void validate() const;
};

/// Centre of mass normalised by the current discrete mass.
double fluid_com(const FluidState& state, const Grid1D& grid);

/// Derivative of the packed leader state [x..., v...] with the fluid centre
/// of mass held at `com`.
void leader_rhs_hybrid(const HybridSystem& system, double com, std::span<const double> state,
                       std::span<double> out);

/// Per-cell follower acceleration: self repulsion through the grid, pull
/// toward the leaders, and alignment with the leader velocities.
std::vector<double> follower_source_hybrid(const FluidState& fluid, const Grid1D& grid, const ParticleState& leaders,
                                           const InteractionKernels& kernels);

struct StepReport {
  double dt = 0.0;
  /// Net mass inflow through the boundary, per fluid (follower first).
  std::vector<double> boundary_inflow;
};

/// One coupled step with dt = min(cfl_dt(follower), dt_cap). Leaders see the
/// pre-step fluid; the fluid sees the pre-step leaders. A non-finite fluid
/// update is retried with half the step, up to five times.
StepReport hybrid_step(HybridSystem& system, const CflConfig& cfg, double dt_cap = 1e300);

class HybridSimulation {
 public:
  HybridSimulation(HybridSystem system, CflConfig cfg);

  /// Steps until time() == t_target, shortening the last step.
  /// `after_step` runs after every step.
  void advance_to(double t_target, const std::function<void(const HybridSimulation&)>& after_step = {});

  double time() const { return time_; }
  std::size_t steps() const { return steps_; }
  double boundary_inflow() const { return inflow_; }
  const HybridSystem& system() const { return system_; }

 private:
  HybridSystem system_;
  CflConfig cfg_;
  double time_ = 0.0;
  double inflow_ = 0.0;
  std::size_t steps_ = 0;
};

}  // namespace lfsim

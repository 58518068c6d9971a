#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lfsim/kernels.hpp"

namespace lfsim {

/// Positions and velocities of one particle population.
struct ParticleState {
  std::vector<double> positions;
  std::vector<double> velocities;

  ParticleState() = default;
  ParticleState(std::vector<double> x, std::vector<double> v);

  std::size_t size() const { return positions.size(); }
  double mean_position() const;
  void validate() const;
};

/// alpha weights cohesion with the followers, 1 - alpha the pull to each
/// leader's own target; gamma penalises control effort.
struct ControlParams {
  double alpha = 0.5;
  double gamma = 1.0;
  std::vector<double> targets;

  double beta() const { return 1.0 - alpha; }
  void validate() const;
};

struct InteractionKernels {
  KernelSpec leader;    // W_L'
  KernelSpec follower;  // W_F'
  KernelSpec cross;     // W_C'
  WeightSpec phi;

  /// Prints the analytical-class notice once per non-Lipschitz role.
  void report_analytical_class() const;
};

struct MicroSystem {
  ParticleState leaders;
  ParticleState followers;
  ControlParams control;
  InteractionKernels kernels;

  void validate() const;
};

/// Thrown when an integrator produces non-finite values.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double time) : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

double feedback_control(double x, double com_followers, double x_d, const ControlParams& params);

/// Control that minimises the one-step cost over a horizon h with a
/// semi-implicit position update.
double greedy_control(double x, double v, double interaction, double com_followers, double x_d, double h,
                      double alpha, double beta, double gamma);

/// Leader acceleration with the feedback control inlined (gamma = 1).
/// Shared by the particle and the particle-fluid tiers.
inline double leader_acceleration(double x, double v, double x_d, double com, double alpha, double interaction) {
  return -(1.0 - alpha) * (x - x_d) - alpha * (x - com) - v + interaction;
}

/// (1/n) sum_j W'(x_j - x_i) for every i.
std::vector<double> self_interaction(const KernelSpec& kernel, std::span<const double> x);

/// Flat state layout for the integrator: [x..., v..., y..., w...].
std::vector<double> pack(const MicroSystem& system);
void unpack(std::span<const double> state, MicroSystem& system);

/// Time derivative of the packed state.
void micro_rhs(const MicroSystem& system, std::span<const double> state, std::span<double> out);

using RhsFunction = std::function<void(std::span<const double>, double, std::span<double>)>;

/// Classical fourth-order Runge-Kutta step. Throws IntegrationError on
/// non-finite stage values.
std::vector<double> rk4_step(const RhsFunction& rhs, std::span<const double> state, double t, double dt);

/// Called with (time, step index, system).
using MicroObserver = std::function<void(double, std::size_t, const MicroSystem&)>;

/// Integrates with a fixed step; the last step is shortened to end on t_end.
/// The observer runs at t=0, every `observe_every` steps and at t_end.
void simulate_micro(MicroSystem& system, double t_end, double dt, const MicroObserver& observer = {},
                    std::size_t observe_every = 1);

/// Stateful wrapper used by the drivers to step between sample times.
class MicroSimulation {
 public:
  MicroSimulation(MicroSystem system, double dt);

  void advance_to(double t_target);
  double time() const { return time_; }
  std::size_t steps() const { return steps_; }
  const MicroSystem& system() const { return system_; }

 private:
  MicroSystem system_;
  double dt_;
  double time_ = 0.0;
  std::size_t steps_ = 0;
};

}  // namespace lfsim

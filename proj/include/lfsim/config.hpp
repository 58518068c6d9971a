#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "lfsim/fluid.hpp"
#include "lfsim/hybrid.hpp"
#include "lfsim/kernels.hpp"
#include "lfsim/macmac.hpp"
#include "lfsim/micro.hpp"
#include "lfsim/sampling.hpp"

namespace lfsim {

enum class Model { Micro, Hybrid, MacMac };

std::string to_string(Model model);
Model parse_model(const std::string& text);

/// Everything needed to build and run one simulation. Serialised as a flat
/// "key = value" file; see README for the key list.
struct ExperimentConfig {
  std::string preset = "custom";
  Model model = Model::Micro;
  double x_min = -8.0;
  double x_max = 8.0;
  double t_end = 15.0;
  double dx = 0.005;
  double cfl = 0.9;
  double dt_max = 1e-2;
  double lambda_floor = 1e-8;
  double dt_micro = 1e-3;
  double alpha = 0.5;
  double gamma = 1.0;
  KernelSpec kernel_leader;
  KernelSpec kernel_follower;
  KernelSpec kernel_cross;
  WeightSpec weight;
  std::size_t leaders = 100;
  std::size_t followers = 100;
  /// One cluster per target; `target` is the leader destination.
  std::vector<GaussianSpec> leader_clusters;
  std::vector<GaussianSpec> follower_clusters;
  IndicatorProfile leader_velocity;
  IndicatorProfile follower_velocity;
  std::size_t observer_period = 100;
  std::size_t snapshot_period = 0;
  /// Time between paired samples in convergence studies.
  double sample_interval = 0.05;
  std::string out_dir = "out";

  void validate() const;

  Grid1D grid() const;
  CflConfig cfl_config() const;
  InteractionKernels kernels() const;
  MixtureSpec leader_mixture() const;
  MixtureSpec follower_mixture() const;
  TargetMixture target_mixture() const;

  /// Ordered key/value pairs, every field explicit.
  std::vector<std::pair<std::string, std::string>> to_entries() const;
  void write(std::ostream& out) const;
  /// Applies "key = value" lines on top of *this.
  void apply(const std::map<std::string, std::string>& entries);
};

/// Parses "key = value" lines; '#' starts a comment.
std::map<std::string, std::string> parse_key_values(std::istream& in);
ExperimentConfig load_config(const std::string& path);

/// Parameters of the named benchmark (test1, test2, test3).
ExperimentConfig preset(const std::string& name);

/// Particle systems sampled consistently with the densities of `config`.
struct InitialLeaders {
  ParticleState state;
  std::vector<double> targets;
  std::vector<std::size_t> labels;  // cluster index per leader
};
InitialLeaders make_leaders(const ExperimentConfig& config, std::size_t count);
ParticleState make_followers(const ExperimentConfig& config, std::size_t count);
FluidState make_follower_fluid(const ExperimentConfig& config, const Grid1D& grid);

MicroSystem make_micro(const ExperimentConfig& config);
HybridSystem make_hybrid(const ExperimentConfig& config);
MacMacSystem make_macmac(const ExperimentConfig& config);

}  // namespace lfsim

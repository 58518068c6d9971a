#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "lfsim/config.hpp"
#include "lfsim/metrics.hpp"

namespace lfsim {

struct RunResult {
  bool ok = true;
  double final_time = 0.0;
  double failure_time = 0.0;
  std::string message;
  std::size_t steps = 0;
};

/// Runs config.model and writes into config.out_dir:
///   diagnostics.csv      every observer_period steps and at the end
///   final_grid.csv       x, rho_F, mom_F, rho_L, mom_L (+ per-slice columns for macmac)
///   final_particles.csv  population, index, x, v
///   trajectories.csv     particle series every observer_period steps (micro, hybrid)
///   snapshots.csv        grid series every snapshot_period steps (when > 0)
///   manifest.txt         resolved config plus run status
/// A solver blow-up is reported in the result and the manifest, not thrown.
RunResult run(const ExperimentConfig& config);

enum class Tier { MicroVsHybrid, HybridVsMacMac };

std::string to_string(Tier tier);
Tier parse_tier(const std::string& text);

/// Errors are measured against the reference-size run: error(t) = |C^n(t) - C^ref(t)|
/// for each component C, then reduced by sup over t or by the L2 norm in t.
struct ConvergenceReport {
  Tier tier = Tier::MicroVsHybrid;
  std::vector<std::string> components;  // e.g. F1, F2, F3, Fsum
  std::vector<std::size_t> sizes;       // studied sizes, reference excluded
  std::size_t reference = 0;
  std::vector<double> times;
  /// series[r][k][c]: run r (sizes then reference), sample k, component c.
  std::vector<std::vector<std::vector<double>>> series;

  static constexpr const char* kMeasures[] = {"sup", "l2", "sup_error", "l2_error"};

  /// value(measure, size index, component index)
  double value(const std::string& measure, std::size_t run, std::size_t component) const;
  /// Least-squares rate over the studied sizes; throws when a value is not positive.
  RateFit fit(const std::string& measure, std::size_t component) const;
  std::size_t component_index(const std::string& name) const;
};

/// Paired runs of the two tiers on a common time grid of spacing
/// base.sample_interval up to base.t_end. For MicroVsHybrid the size is the
/// follower count M; for HybridVsMacMac it is the leader count N.
ConvergenceReport convergence_study(Tier tier, const std::vector<std::size_t>& sizes, std::size_t reference,
                                    const ExperimentConfig& base);

/// convergence_series.csv, convergence_summary.csv, convergence_rates.csv.
void write_convergence(const ConvergenceReport& report, const std::filesystem::path& dir);

}  // namespace lfsim

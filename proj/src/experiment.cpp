#include "lfsim/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <stdexcept>

namespace lfsim {

namespace fs = std::filesystem;

namespace {

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << std::setprecision(17);
  return out;
}

void close_output(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

struct GridColumns {
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;

  void add(std::string name, std::vector<double> v) {
    names.push_back(std::move(name));
    values.push_back(std::move(v));
  }
};

void write_grid_header(std::ostream& out, const GridColumns& cols, bool with_time) {
  if (with_time) out << "t,";
  out << 'x';
  for (const auto& n : cols.names) out << ',' << n;
  out << '\n';
}

void write_grid_rows(std::ostream& out, const Grid1D& grid, const GridColumns& cols, const double* t) {
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (t) out << *t << ',';
    out << grid.center(j);
    for (const auto& v : cols.values) out << ',' << v[j];
    out << '\n';
  }
}

void write_particles(std::ostream& out, const char* population, const ParticleState& p, const double* t) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (t) out << *t << ',';
    out << population << ',' << i << ',' << p.positions[i] << ',' << p.velocities[i] << '\n';
  }
}

GridColumns micro_columns(const MicroSystem& s, const Grid1D& grid) {
  GridColumns cols;
  auto f = bin_momentum(s.followers, grid);
  auto l = bin_momentum(s.leaders, grid);
  cols.add("rho_F", std::move(f.density));
  cols.add("mom_F", std::move(f.momentum));
  cols.add("rho_L", std::move(l.density));
  cols.add("mom_L", std::move(l.momentum));
  return cols;
}

GridColumns hybrid_columns(const HybridSystem& s) {
  GridColumns cols;
  auto l = bin_momentum(s.leaders, s.grid);
  cols.add("rho_F", s.follower.rho);
  cols.add("mom_F", s.follower.mom);
  cols.add("rho_L", std::move(l.density));
  cols.add("mom_L", std::move(l.momentum));
  return cols;
}

GridColumns macmac_columns(const MacMacSystem& s) {
  GridColumns cols;
  cols.add("rho_F", s.follower.rho);
  cols.add("mom_F", s.follower.mom);
  cols.add("rho_L", s.mixed_leader_density());
  cols.add("mom_L", s.mixed_leader_momentum());
  for (std::size_t p = 0; p < s.leader_slices.size(); ++p) {
    cols.add("rho_L" + std::to_string(p), s.leader_slices[p].rho);
    cols.add("mom_L" + std::to_string(p), s.leader_slices[p].mom);
  }
  return cols;
}

// Output sinks shared by the three model drivers.
class RunWriter {
 public:
  RunWriter(const ExperimentConfig& config, bool particles)
      : config_(config), dir_(config.out_dir), grid_(config.grid()) {
    fs::create_directories(dir_);
    if (particles) {
      trajectories_ = open_output(dir_ / "trajectories.csv");
      trajectories_ << "t,population,index,x,v\n";
    }
    if (config.snapshot_period > 0) snapshots_ = open_output(dir_ / "snapshots.csv");
  }

  bool due(std::size_t step, std::size_t period) const { return period > 0 && step % period == 0; }

  void observe(double t, std::size_t step, bool last, const DiagnosticsRow& row,
               const std::function<void(std::ostream&, const double*)>& particles,
               const std::function<GridColumns()>& columns) {
    if (last || due(step, config_.observer_period)) {
      rows_.push_back(row);
      if (trajectories_.is_open()) particles(trajectories_, &t);
    }
    if (snapshots_.is_open() && (last || due(step, config_.snapshot_period))) {
      const auto cols = columns();
      if (!snapshot_header_) {
        write_grid_header(snapshots_, cols, true);
        snapshot_header_ = true;
      }
      write_grid_rows(snapshots_, grid_, cols, &t);
    }
  }

  void finish(const RunResult& result, const std::function<void(std::ostream&, const double*)>& particles,
              const GridColumns& cols) {
    {
      const auto path = dir_ / "diagnostics.csv";
      auto out = open_output(path);
      write_diagnostics_csv(out, rows_);
      close_output(out, path);
    }
    {
      const auto path = dir_ / "final_grid.csv";
      auto out = open_output(path);
      write_grid_header(out, cols, false);
      write_grid_rows(out, grid_, cols, nullptr);
      close_output(out, path);
    }
    {
      const auto path = dir_ / "final_particles.csv";
      auto out = open_output(path);
      out << "population,index,x,v\n";
      particles(out, nullptr);
      close_output(out, path);
    }
    if (trajectories_.is_open()) close_output(trajectories_, dir_ / "trajectories.csv");
    if (snapshots_.is_open()) close_output(snapshots_, dir_ / "snapshots.csv");

    const auto path = dir_ / "manifest.txt";
    auto out = open_output(path);
    config_.write(out);
    out << "status = " << (result.ok ? "ok" : "failed") << '\n';
    out << "final_time = " << result.final_time << '\n';
    out << "steps = " << result.steps << '\n';
    if (!result.ok) {
      out << "failure_time = " << result.failure_time << '\n';
      out << "failure = " << result.message << '\n';
    }
    close_output(out, path);
  }

 private:
  const ExperimentConfig& config_;
  fs::path dir_;
  Grid1D grid_;
  std::vector<DiagnosticsRow> rows_;
  std::ofstream trajectories_;
  std::ofstream snapshots_;
  bool snapshot_header_ = false;
};

RunResult run_micro(const ExperimentConfig& config) {
  RunWriter writer(config, true);
  const Grid1D grid = config.grid();
  auto system = make_micro(config);
  system.kernels.report_analytical_class();
  RunResult result;
  double last_t = 0.0;
  const auto emit_particles = [&](const MicroSystem& s) {
    return [&s](std::ostream& out, const double* t) {
      write_particles(out, "leader", s.leaders, t);
      write_particles(out, "follower", s.followers, t);
    };
  };
  const auto n_steps = static_cast<std::size_t>(std::ceil(config.t_end / config.dt_micro - 1e-9));
  try {
    simulate_micro(
        system, config.t_end, config.dt_micro,
        [&](double t, std::size_t step, const MicroSystem& s) {
          last_t = t;
          result.steps = step;
          const bool last = step >= n_steps;
          writer.observe(t, step, last, particle_diagnostics(t, s.followers, grid), emit_particles(s),
                         [&] { return micro_columns(s, grid); });
        },
        1);
    result.final_time = config.t_end;
  } catch (const IntegrationError& e) {
    result.ok = false;
    result.failure_time = e.time();
    result.final_time = last_t;
    result.message = e.what();
  }
  writer.finish(result, emit_particles(system), micro_columns(system, grid));
  return result;
}

RunResult run_hybrid(const ExperimentConfig& config) {
  RunWriter writer(config, true);
  HybridSimulation sim(make_hybrid(config), config.cfl_config());
  sim.system().kernels.report_analytical_class();
  const auto emit_particles = [&sim](std::ostream& out, const double* t) {
    write_particles(out, "leader", sim.system().leaders, t);
  };
  const auto observe = [&](const HybridSimulation& s) {
    const auto& sys = s.system();
    const bool last = s.time() >= config.t_end;
    writer.observe(s.time(), s.steps(), last,
                   fluid_diagnostics(s.time(), sys.follower, sys.grid, s.boundary_inflow()), emit_particles,
                   [&] { return hybrid_columns(sys); });
  };
  RunResult result;
  try {
    observe(sim);
    sim.advance_to(config.t_end, observe);
  } catch (const IntegrationError& e) {
    result.ok = false;
    result.failure_time = e.time();
    result.message = e.what();
  }
  result.final_time = sim.time();
  result.steps = sim.steps();
  writer.finish(result, emit_particles, hybrid_columns(sim.system()));
  return result;
}

RunResult run_macmac(const ExperimentConfig& config) {
  RunWriter writer(config, false);
  MacMacSimulation sim(make_macmac(config), config.cfl_config());
  sim.system().kernels.report_analytical_class();
  const auto no_particles = [](std::ostream&, const double*) {};
  const auto observe = [&](const MacMacSimulation& s) {
    const auto& sys = s.system();
    const bool last = s.time() >= config.t_end;
    writer.observe(s.time(), s.steps(), last,
                   fluid_diagnostics(s.time(), sys.follower, sys.grid, s.boundary_inflow().front()), no_particles,
                   [&] { return macmac_columns(sys); });
  };
  RunResult result;
  try {
    observe(sim);
    sim.advance_to(config.t_end, observe);
  } catch (const IntegrationError& e) {
    result.ok = false;
    result.failure_time = e.time();
    result.message = e.what();
  }
  result.final_time = sim.time();
  result.steps = sim.steps();
  writer.finish(result, no_particles, macmac_columns(sim.system()));
  return result;
}

}  // namespace

RunResult run(const ExperimentConfig& config) {
  config.validate();
  switch (config.model) {
    case Model::Micro:
      return run_micro(config);
    case Model::Hybrid:
      return run_hybrid(config);
    case Model::MacMac:
      return run_macmac(config);
  }
  throw std::logic_error("run: unknown model");
}

std::string to_string(Tier tier) {
  return tier == Tier::MicroVsHybrid ? "micro_vs_hybrid" : "hybrid_vs_macmac";
}

Tier parse_tier(const std::string& text) {
  if (text == "micro_vs_hybrid") return Tier::MicroVsHybrid;
  if (text == "hybrid_vs_macmac") return Tier::HybridVsMacMac;
  throw std::invalid_argument("unknown tier '" + text + "' (expected micro_vs_hybrid or hybrid_vs_macmac)");
}

std::size_t ConvergenceReport::component_index(const std::string& name) const {
  const auto it = std::find(components.begin(), components.end(), name);
  if (it == components.end()) throw std::invalid_argument("unknown component '" + name + "'");
  return static_cast<std::size_t>(it - components.begin());
}

double ConvergenceReport::value(const std::string& measure, std::size_t run, std::size_t component) const {
  if (run >= series.size() || component >= components.size())
    throw std::out_of_range("ConvergenceReport::value: index");
  const bool error = measure == "sup_error" || measure == "l2_error";
  const bool sup = measure == "sup" || measure == "sup_error";
  if (!error && !sup && measure != "l2") throw std::invalid_argument("unknown measure '" + measure + "'");
  const auto& s = series[run];
  const auto& ref = series.back();
  double acc = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double e = error ? std::fabs(s[k][component] - ref[k][component]) : std::fabs(s[k][component]);
    if (sup) {
      acc = std::max(acc, e);
    } else if (k > 0) {
      const double prev = error ? std::fabs(s[k - 1][component] - ref[k - 1][component]) : std::fabs(s[k - 1][component]);
      acc += 0.5 * (times[k] - times[k - 1]) * (e * e + prev * prev);
    }
  }
  return sup ? acc : std::sqrt(acc);
}

RateFit ConvergenceReport::fit(const std::string& measure, std::size_t component) const {
  std::vector<double> x, y;
  for (std::size_t r = 0; r < sizes.size(); ++r) {
    x.push_back(static_cast<double>(sizes[r]));
    y.push_back(value(measure, r, component));
  }
  return fit_rate(x, y);
}

namespace {

std::vector<double> sample_times(double t_end, double interval) {
  std::vector<double> times;
  const auto n = static_cast<std::size_t>(std::floor(t_end / interval + 1e-9));
  for (std::size_t k = 0; k <= n; ++k) times.push_back(static_cast<double>(k) * interval);
  if (t_end - times.back() > 1e-12) times.push_back(t_end);
  return times;
}

}  // namespace

ConvergenceReport convergence_study(Tier tier, const std::vector<std::size_t>& sizes, std::size_t reference,
                                    const ExperimentConfig& base) {
  if (sizes.size() < 2) throw std::invalid_argument("convergence_study: regression needs at least two sizes");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] < 1) throw std::invalid_argument("convergence_study: sizes must be positive");
    if (i > 0 && sizes[i] <= sizes[i - 1]) throw std::invalid_argument("convergence_study: sizes must ascend");
  }
  if (reference <= sizes.back()) throw std::invalid_argument("convergence_study: reference must exceed every size");
  base.validate();

  ConvergenceReport report;
  report.tier = tier;
  report.sizes = sizes;
  report.reference = reference;
  report.times = sample_times(base.t_end, base.sample_interval);
  std::vector<std::size_t> all = sizes;
  all.push_back(reference);
  report.series.resize(all.size());

  if (tier == Tier::MicroVsHybrid) {
    report.components = {"F1", "F2", "F3", "Fsum"};
    HybridSimulation limit(make_hybrid(base), base.cfl_config());
    std::vector<MicroSimulation> runs;
    for (std::size_t m : all) {
      ExperimentConfig c = base;
      c.followers = m;
      runs.emplace_back(make_micro(c), c.dt_micro);
    }
    for (double t : report.times) {
      limit.advance_to(t);
      for (std::size_t r = 0; r < runs.size(); ++r) {
        runs[r].advance_to(t);
        const auto f = functional_F(runs[r].system(), limit.system());
        report.series[r].push_back({f.f1, f.f2, f.f3, f.sum()});
      }
    }
  } else {
    report.components = {"G1", "G2", "G3", "G4", "Gsum"};
    MacMacSimulation limit(make_macmac(base), base.cfl_config());
    std::vector<HybridSimulation> runs;
    std::vector<std::vector<std::size_t>> labels;
    for (std::size_t n : all) {
      ExperimentConfig c = base;
      c.leaders = n;
      runs.emplace_back(make_hybrid(c), c.cfl_config());
      labels.push_back(make_leaders(c, n).labels);
    }
    for (double t : report.times) {
      limit.advance_to(t);
      for (std::size_t r = 0; r < runs.size(); ++r) {
        runs[r].advance_to(t);
        const auto g = functional_G(runs[r].system(), labels[r], limit.system());
        report.series[r].push_back({g.g1, g.g2, g.g3, g.g4, g.sum()});
      }
    }
  }
  return report;
}

void write_convergence(const ConvergenceReport& report, const fs::path& dir) {
  fs::create_directories(dir);
  std::vector<std::size_t> all = report.sizes;
  all.push_back(report.reference);
  {
    const auto path = dir / "convergence_series.csv";
    auto out = open_output(path);
    out << "t,size,reference";
    for (const auto& c : report.components) out << ',' << c;
    out << '\n';
    for (std::size_t r = 0; r < all.size(); ++r)
      for (std::size_t k = 0; k < report.times.size(); ++k) {
        out << report.times[k] << ',' << all[r] << ',' << (r + 1 == all.size() ? 1 : 0);
        for (double v : report.series[r][k]) out << ',' << v;
        out << '\n';
      }
    close_output(out, path);
  }
  {
    const auto path = dir / "convergence_summary.csv";
    auto out = open_output(path);
    out << "size,component,sup,l2,sup_error,l2_error\n";
    for (std::size_t r = 0; r < report.sizes.size(); ++r)
      for (std::size_t c = 0; c < report.components.size(); ++c) {
        out << report.sizes[r] << ',' << report.components[c];
        for (const char* m : ConvergenceReport::kMeasures) out << ',' << report.value(m, r, c);
        out << '\n';
      }
    close_output(out, path);
  }
  const auto path = dir / "convergence_rates.csv";
  auto out = open_output(path);
  out << "component,measure,rate,intercept,r_squared\n";
  for (std::size_t c = 0; c < report.components.size(); ++c)
    for (const char* m : ConvergenceReport::kMeasures) {
      out << report.components[c] << ',' << m << ',';
      try {
        const auto fit = report.fit(m, c);
        out << fit.rate() << ',' << fit.intercept << ',' << fit.r_squared << '\n';
      } catch (const std::invalid_argument&) {
        out << "nan,nan,nan\n";
      }
    }
  close_output(out, path);
}

}  // namespace lfsim

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "lfsim/config.hpp"
#include "lfsim/experiment.hpp"

namespace {

struct Source {
  std::string preset;
  std::string config_file;
  std::vector<std::string> overrides;
};

void add_source_options(CLI::App* cmd, Source& src) {
  cmd->add_option("--preset", src.preset, "test1, test2 or test3");
  cmd->add_option("--config", src.config_file, "key = value file (applied after its preset)");
  cmd->add_option("--set", src.overrides, "extra key=value override, repeatable");
}

lfsim::ExperimentConfig resolve(const Source& src) {
  lfsim::ExperimentConfig config;
  if (!src.config_file.empty()) config = lfsim::load_config(src.config_file);
  else if (!src.preset.empty()) config = lfsim::preset(src.preset);
  else throw std::invalid_argument("either --preset or --config is required");
  if (!src.config_file.empty() && !src.preset.empty() && config.preset != src.preset)
    throw std::invalid_argument("--preset disagrees with the preset named in --config");
  std::map<std::string, std::string> extra;
  for (const auto& kv : src.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    extra[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  config.apply(extra);
  return config;
}

void print_report(const lfsim::ConvergenceReport& report) {
  std::printf("%-8s %-6s %14s %14s %14s %14s\n", "size", "comp", "sup", "l2", "sup_error", "l2_error");
  for (std::size_t r = 0; r < report.sizes.size(); ++r)
    for (std::size_t c = 0; c < report.components.size(); ++c)
      std::printf("%-8zu %-6s %14.6e %14.6e %14.6e %14.6e\n", report.sizes[r], report.components[c].c_str(),
                  report.value("sup", r, c), report.value("l2", r, c), report.value("sup_error", r, c),
                  report.value("l2_error", r, c));
  std::printf("\nrates (-slope of log value vs log size)\n");
  for (std::size_t c = 0; c < report.components.size(); ++c) {
    std::printf("%-6s", report.components[c].c_str());
    for (const char* m : lfsim::ConvergenceReport::kMeasures) {
      try {
        std::printf("  %s %.3f", m, report.fit(m, c).rate());
      } catch (const std::invalid_argument&) {
        std::printf("  %s n/a", m);
      }
    }
    std::printf("\n");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiscale leader-follower simulator"};
  app.require_subcommand(1);

  Source sim_src;
  std::string model;
  double alpha = -1.0;
  std::string out_dir;
  auto* simulate = app.add_subcommand("simulate", "run one model and write CSV output");
  add_source_options(simulate, sim_src);
  simulate->add_option("--model", model, "micro, hybrid or macmac");
  simulate->add_option("--alpha", alpha, "control coupling in [0, 1]");
  simulate->add_option("--out", out_dir, "output directory");

  Source conv_src;
  std::string tier;
  std::string sizes_text;
  std::size_t reference = 2000;
  std::string conv_out;
  auto* converge = app.add_subcommand("converge", "cross-tier convergence study");
  add_source_options(converge, conv_src);
  converge->add_option("--tier", tier, "micro_vs_hybrid or hybrid_vs_macmac")->required();
  converge->add_option("--sizes", sizes_text, "comma-separated ascending sizes")->required();
  converge->add_option("--reference", reference, "reference size (default 2000)");
  converge->add_option("--out", conv_out, "output directory");

  std::string show;
  auto* preset_cmd = app.add_subcommand("preset", "print a resolved preset");
  preset_cmd->add_option("--show", show, "preset name")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      auto config = resolve(sim_src);
      if (!model.empty()) config.model = lfsim::parse_model(model);
      if (alpha >= 0.0) config.alpha = alpha;
      if (!out_dir.empty()) config.out_dir = out_dir;
      const auto result = lfsim::run(config);
      if (!result.ok) {
        std::cerr << "simulation failed at t = " << result.failure_time << ": " << result.message << '\n';
        return 2;
      }
      std::cout << "wrote " << config.out_dir << " (" << result.steps << " steps)\n";
      return 0;
    }
    if (converge->parsed()) {
      auto config = resolve(conv_src);
      std::vector<std::size_t> sizes;
      std::size_t pos = 0;
      while (pos <= sizes_text.size()) {
        const auto comma = sizes_text.find(',', pos);
        const auto item = sizes_text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (item.empty()) throw std::invalid_argument("--sizes: empty entry");
        sizes.push_back(std::stoul(item));
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
      const auto t = lfsim::parse_tier(tier);
      std::printf("# %s on %s\n", lfsim::to_string(t).c_str(), config.preset.c_str());
      std::printf("# published study: sizes 10,100,1000,10000 against reference 10000\n");
      std::printf("# this run: sizes %s against reference %zu, dx %g, sample interval %g\n", sizes_text.c_str(),
                  reference, config.dx, config.sample_interval);
      const auto report = lfsim::convergence_study(t, sizes, reference, config);
      const std::string dir = conv_out.empty() ? config.out_dir + "/" + lfsim::to_string(t) : conv_out;
      lfsim::write_convergence(report, dir);
      print_report(report);
      std::printf("\nwrote %s\n", dir.c_str());
      return 0;
    }
    if (preset_cmd->parsed()) {
      lfsim::preset(show).write(std::cout);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

#include "lfsim/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace lfsim {

namespace {

std::string fmt(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("cannot format number");
  return std::string(buf, end);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
    throw std::invalid_argument("config key '" + key + "': expected a number, got '" + text + "'");
  return v;
}

std::size_t parse_count(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
    throw std::invalid_argument("config key '" + key + "': expected a non-negative integer, got '" + text + "'");
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

// "k1=v1 k2=v2" -> map
std::map<std::string, double> parse_fields(const std::string& key, const std::string& text) {
  std::map<std::string, double> out;
  std::istringstream in(text);
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config key '" + key + "': malformed field '" + token + "'");
    out[token.substr(0, eq)] = parse_double(key, token.substr(eq + 1));
  }
  return out;
}

double field(const std::map<std::string, double>& fields, const std::string& name, const std::string& key,
             std::optional<double> fallback = std::nullopt) {
  auto it = fields.find(name);
  if (it != fields.end()) return it->second;
  if (fallback) return *fallback;
  throw std::invalid_argument("config key '" + key + "': missing field '" + name + "'");
}

std::vector<GaussianSpec> parse_clusters(const std::string& key, const std::string& text) {
  std::vector<GaussianSpec> out;
  if (trim(text) == "none") return out;
  for (const auto& part : split(text, ';')) {
    const auto f = parse_fields(key, part);
    for (const auto& [name, value] : f)
      if (name != "mu" && name != "sigma" && name != "weight" && name != "target")
        throw std::invalid_argument("config key '" + key + "': unknown field '" + name + "'");
    out.push_back({field(f, "mu", key), field(f, "sigma", key, 0.5), field(f, "weight", key, 1.0),
                   field(f, "target", key, 0.0)});
  }
  return out;
}

std::string clusters_to_string(const std::vector<GaussianSpec>& clusters, bool with_target) {
  if (clusters.empty()) return "none";
  std::string s;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    const auto& c = clusters[i];
    if (i) s += "; ";
    s += "mu=" + fmt(c.mu) + " sigma=" + fmt(c.sigma) + " weight=" + fmt(c.weight);
    if (with_target) s += " target=" + fmt(c.target);
  }
  return s;
}

IndicatorProfile parse_profile(const std::string& key, const std::string& text) {
  if (trim(text) == "none" || trim(text).empty()) return {};
  std::vector<IndicatorProfile::Interval> intervals;
  for (const auto& part : split(text, ';')) {
    const auto f = parse_fields(key, part);
    intervals.push_back({field(f, "a", key), field(f, "b", key), field(f, "value", key)});
  }
  return IndicatorProfile(std::move(intervals));
}

std::string profile_to_string(const IndicatorProfile& profile) {
  if (profile.empty()) return "none";
  std::string s;
  for (std::size_t i = 0; i < profile.intervals().size(); ++i) {
    const auto& iv = profile.intervals()[i];
    if (i) s += "; ";
    s += "a=" + fmt(iv.a) + " b=" + fmt(iv.b) + " value=" + fmt(iv.value);
  }
  return s;
}

MixtureSpec mixture_of(const std::vector<GaussianSpec>& clusters) {
  MixtureSpec m;
  m.components = clusters;
  return m;
}

}  // namespace

std::string to_string(Model model) {
  switch (model) {
    case Model::Micro:
      return "micro";
    case Model::Hybrid:
      return "hybrid";
    case Model::MacMac:
      return "macmac";
  }
  return "micro";
}

Model parse_model(const std::string& text) {
  if (text == "micro") return Model::Micro;
  if (text == "hybrid") return Model::Hybrid;
  if (text == "macmac") return Model::MacMac;
  throw std::invalid_argument("unknown model '" + text + "' (expected micro, hybrid or macmac)");
}

void ExperimentConfig::validate() const {
  if (!(x_max > x_min)) throw std::invalid_argument("config: x_max must exceed x_min");
  if (!(t_end >= 0.0)) throw std::invalid_argument("config: t_end must be non-negative");
  if (!(dx > 0.0)) throw std::invalid_argument("config: dx must be positive");
  const double cells = (x_max - x_min) / dx;
  if (std::fabs(cells - std::round(cells)) > 1e-6 * std::max(1.0, cells))
    throw std::invalid_argument("config: dx does not divide the domain");
  if (!(sample_interval > 0.0)) throw std::invalid_argument("config: sample_interval must be positive");
  if (!(dt_micro > 0.0)) throw std::invalid_argument("config: dt_micro must be positive");
  cfl_config().validate();
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("config: alpha must lie in [0, 1]");
  if (!(gamma > 0.0)) throw std::invalid_argument("config: gamma must be positive");
  if (leader_clusters.empty()) throw std::invalid_argument("config: leader_clusters must not be empty");
  if (follower_clusters.empty()) throw std::invalid_argument("config: follower_clusters must not be empty");
  leader_mixture().validate();
  follower_mixture().validate();
  if (model != Model::MacMac && leaders < 1) throw std::invalid_argument("config: leaders must be >= 1");
  if (model == Model::Micro && followers < 1) throw std::invalid_argument("config: followers must be >= 1");
}

Grid1D ExperimentConfig::grid() const { return Grid1D::with_spacing(x_min, x_max, dx); }

CflConfig ExperimentConfig::cfl_config() const { return CflConfig{cfl, dt_max, lambda_floor}; }

InteractionKernels ExperimentConfig::kernels() const {
  return InteractionKernels{kernel_leader, kernel_follower, kernel_cross, weight};
}

MixtureSpec ExperimentConfig::leader_mixture() const { return mixture_of(leader_clusters); }
MixtureSpec ExperimentConfig::follower_mixture() const { return mixture_of(follower_clusters); }

TargetMixture ExperimentConfig::target_mixture() const {
  TargetMixture g;
  for (const auto& c : leader_clusters) {
    g.targets.push_back(c.target);
    g.weights.push_back(c.weight);
  }
  return g;
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::to_entries() const {
  return {
      {"preset", preset},
      {"model", to_string(model)},
      {"x_min", fmt(x_min)},
      {"x_max", fmt(x_max)},
      {"t_end", fmt(t_end)},
      {"dx", fmt(dx)},
      {"cfl", fmt(cfl)},
      {"dt_max", fmt(dt_max)},
      {"lambda_floor", fmt(lambda_floor)},
      {"dt_micro", fmt(dt_micro)},
      {"alpha", fmt(alpha)},
      {"gamma", fmt(gamma)},
      {"kernel_leader", kernel_leader.to_string()},
      {"kernel_follower", kernel_follower.to_string()},
      {"kernel_cross", kernel_cross.to_string()},
      {"weight", weight.to_string()},
      {"leaders", std::to_string(leaders)},
      {"followers", std::to_string(followers)},
      {"leader_clusters", clusters_to_string(leader_clusters, true)},
      {"follower_clusters", clusters_to_string(follower_clusters, false)},
      {"leader_velocity", profile_to_string(leader_velocity)},
      {"follower_velocity", profile_to_string(follower_velocity)},
      {"observer_period", std::to_string(observer_period)},
      {"snapshot_period", std::to_string(snapshot_period)},
      {"sample_interval", fmt(sample_interval)},
      {"out_dir", out_dir},
  };
}

void ExperimentConfig::write(std::ostream& out) const {
  for (const auto& [k, v] : to_entries()) out << k << " = " << v << '\n';
}

void ExperimentConfig::apply(const std::map<std::string, std::string>& entries) {
  for (const auto& [key, value] : entries) {
    if (key == "preset") preset = value;
    else if (key == "model") model = parse_model(value);
    else if (key == "x_min") x_min = parse_double(key, value);
    else if (key == "x_max") x_max = parse_double(key, value);
    else if (key == "t_end") t_end = parse_double(key, value);
    else if (key == "dx") dx = parse_double(key, value);
    else if (key == "cfl") cfl = parse_double(key, value);
    else if (key == "dt_max") dt_max = parse_double(key, value);
    else if (key == "lambda_floor") lambda_floor = parse_double(key, value);
    else if (key == "dt_micro") dt_micro = parse_double(key, value);
    else if (key == "alpha") alpha = parse_double(key, value);
    else if (key == "gamma") gamma = parse_double(key, value);
    else if (key == "kernel_leader") kernel_leader = KernelSpec::parse(value);
    else if (key == "kernel_follower") kernel_follower = KernelSpec::parse(value);
    else if (key == "kernel_cross") kernel_cross = KernelSpec::parse(value);
    else if (key == "weight") weight = WeightSpec::parse(value);
    else if (key == "leaders") leaders = parse_count(key, value);
    else if (key == "followers") followers = parse_count(key, value);
    else if (key == "leader_clusters") leader_clusters = parse_clusters(key, value);
    else if (key == "follower_clusters") follower_clusters = parse_clusters(key, value);
    else if (key == "leader_velocity") leader_velocity = parse_profile(key, value);
    else if (key == "follower_velocity") follower_velocity = parse_profile(key, value);
    else if (key == "observer_period") observer_period = parse_count(key, value);
    else if (key == "snapshot_period") snapshot_period = parse_count(key, value);
    else if (key == "sample_interval") sample_interval = parse_double(key, value);
    else if (key == "out_dir") out_dir = value;
    else throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

std::map<std::string, std::string> parse_key_values(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(number) + ": expected 'key = value'");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  const auto entries = parse_key_values(in);
  ExperimentConfig config;
  if (auto it = entries.find("preset"); it != entries.end() && it->second != "custom") config = preset(it->second);
  config.apply(entries);
  config.validate();
  return config;
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.preset = name;
  c.cfl = 0.9;
  c.dt_max = 1e-2;
  c.dt_micro = 1e-3;
  c.dx = 0.005;
  c.gamma = 1.0;
  if (name == "test1") {
    c.x_min = -8.0;
    c.x_max = 8.0;
    c.t_end = 15.0;
    c.alpha = 0.5;
    c.kernel_leader = KernelSpec::linear(-1.0);
    c.kernel_follower = KernelSpec::linear(-1.0);
    c.kernel_cross = KernelSpec::linear(2.0);
    c.weight = WeightSpec::power(0.5);
    c.leaders = 100;
    c.followers = 100;
    c.leader_clusters = {{-3.0, 0.5, 1.0, 0.0}};
    c.follower_clusters = {{5.0, 0.5, 1.0, 0.0}};
  } else if (name == "test2") {
    c.x_min = -15.0;
    c.x_max = 15.0;
    c.t_end = 10.0;
    c.alpha = 0.5;
    c.kernel_leader = KernelSpec::regularized_singular(-2.0, KernelSpec::kDefaultSingularEps, 2.5);
    c.kernel_follower = KernelSpec::sign(-1.0);
    c.kernel_cross = KernelSpec::truncated_linear(1.0, 4.0);
    c.weight = WeightSpec::power(0.005);
    c.leaders = 150;
    c.followers = 150;
    c.leader_clusters = {{-3.0, 0.5, 0.5, -5.0}, {3.0, 0.5, 0.5, 5.0}};
    c.follower_clusters = {{0.0, 0.5, 1.0, 0.0}};
    c.follower_velocity = IndicatorProfile({{-2.0, 0.0, -1.0}, {0.0, 2.0, 1.0}});
  } else if (name == "test3") {
    c.x_min = -10.0;
    c.x_max = 10.0;
    c.t_end = 10.0;
    c.alpha = 0.5;
    c.kernel_leader = KernelSpec::linear(1.0);
    c.kernel_follower = KernelSpec::linear(-0.5);
    c.kernel_cross = KernelSpec::linear(1.0);
    c.weight = WeightSpec::power(0.5);
    c.leaders = 150;
    c.followers = 150;
    c.leader_clusters = {{-7.0, 0.5, 0.5, 6.0}, {7.0, 0.5, 0.5, -6.0}};
    c.follower_clusters = {{-5.0, 0.5, 0.5, 0.0}, {5.0, 0.5, 0.5, 0.0}};
    c.follower_velocity = IndicatorProfile({{-10.0, 0.0, -1.0}, {0.0, 10.0, 1.0}});
  } else {
    throw std::invalid_argument("unknown preset '" + name + "' (expected test1, test2 or test3)");
  }
  c.out_dir = "out/" + name;
  return c;
}

InitialLeaders make_leaders(const ExperimentConfig& config, std::size_t count) {
  const auto samples = sample_components(config.leader_mixture(), count);
  InitialLeaders out;
  for (const auto& s : samples) {
    out.state.positions.push_back(s.position);
    out.state.velocities.push_back(config.leader_velocity(s.position));
    out.targets.push_back(config.leader_clusters[s.component].target);
    out.labels.push_back(s.component);
  }
  return out;
}

ParticleState make_followers(const ExperimentConfig& config, std::size_t count) {
  ParticleState p;
  p.positions = sample_inverse_transform(config.follower_mixture(), count);
  for (double y : p.positions) p.velocities.push_back(config.follower_velocity(y));
  return p;
}

FluidState make_follower_fluid(const ExperimentConfig& config, const Grid1D& grid) {
  auto rho = discretize_density(config.follower_mixture(), grid);
  std::vector<double> mom(rho.size());
  for (std::size_t j = 0; j < rho.size(); ++j) mom[j] = rho[j] * config.follower_velocity(grid.center(j));
  return FluidState(std::move(rho), std::move(mom));
}

MicroSystem make_micro(const ExperimentConfig& config) {
  auto leaders = make_leaders(config, config.leaders);
  MicroSystem s;
  s.leaders = std::move(leaders.state);
  s.followers = make_followers(config, config.followers);
  s.control = ControlParams{config.alpha, config.gamma, std::move(leaders.targets)};
  s.kernels = config.kernels();
  return s;
}

HybridSystem make_hybrid(const ExperimentConfig& config) {
  auto leaders = make_leaders(config, config.leaders);
  HybridSystem s;
  s.grid = config.grid();
  s.leaders = std::move(leaders.state);
  s.control = ControlParams{config.alpha, config.gamma, std::move(leaders.targets)};
  s.follower = make_follower_fluid(config, s.grid);
  s.kernels = config.kernels();
  return s;
}

MacMacSystem make_macmac(const ExperimentConfig& config) {
  MacMacSystem s;
  s.grid = config.grid();
  s.mixture = config.target_mixture();
  s.alpha = config.alpha;
  s.kernels = config.kernels();
  s.follower = make_follower_fluid(config, s.grid);
  for (const auto& c : config.leader_clusters) {
    // Conditional density of the leaders heading to this target: unit mass.
    MixtureSpec single;
    single.components = {{c.mu, c.sigma, 1.0, c.target}};
    auto rho = discretize_density(single, s.grid);
    std::vector<double> mom(rho.size());
    for (std::size_t j = 0; j < rho.size(); ++j) mom[j] = rho[j] * config.leader_velocity(s.grid.center(j));
    s.leader_slices.emplace_back(std::move(rho), std::move(mom));
  }
  return s;
}

}  // namespace lfsim

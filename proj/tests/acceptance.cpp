#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "lfsim/config.hpp"
#include "lfsim/experiment.hpp"
#include "lfsim/hybrid.hpp"
#include "lfsim/macmac.hpp"
#include "lfsim/metrics.hpp"
#include "lfsim/micro.hpp"

using namespace lfsim;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

Outcome rate_check(Tier tier, const std::string& sum) {
  auto cfg = preset("test1");
  cfg.dx = 0.02;
  cfg.leaders = 100;
  cfg.followers = 100;
  const auto report = convergence_study(tier, {10, 100, 1000}, 2000, cfg);
  const std::size_t c = report.component_index(sum);
  std::vector<double> errs;
  for (std::size_t r = 0; r < report.sizes.size(); ++r) errs.push_back(report.value("sup_error", r, c));
  const double rate = report.fit("sup_error", c).rate();
  const double l2 = report.fit("l2_error", c).rate();
  const bool ok = strictly_decreasing(errs) && std::fabs(rate - 1.0) <= 0.4;
  return {ok, fmt("%s sup_t error %.3e %.3e %.3e, rate %.3f (time-L2 rate %.3f), want 1.0 +- 0.4", sum.c_str(),
                  errs[0], errs[1], errs[2], rate, l2)};
}

Outcome criterion1() { return rate_check(Tier::MicroVsHybrid, "Fsum"); }
Outcome criterion2() { return rate_check(Tier::HybridVsMacMac, "Gsum"); }

Outcome criterion3() {
  const RhsFunction rhs = [](std::span<const double> y, double, std::span<double> out) { out[0] = -y[0]; };
  std::vector<double> dts, errs;
  for (double dt : {1e-1, 1e-2, 1e-3}) {
    const int steps = static_cast<int>(std::lround(1.0 / dt));
    std::vector<double> y{1.0};
    for (int i = 0; i < steps; ++i) y = rk4_step(rhs, y, i * dt, dt);
    dts.push_back(dt);
    errs.push_back(std::fabs(y[0] - std::exp(-1.0)));
  }
  const double order = fit_rate(dts, errs).slope;
  return {std::fabs(order - 4.0) <= 0.1,
          fmt("errors %.3e %.3e %.3e, order %.3f, want 4.0 +- 0.1", errs[0], errs[1], errs[2], order)};
}

Outcome criterion4() {
  std::vector<double> hs, errs;
  for (std::size_t n : {200u, 400u, 800u, 1600u, 3200u}) {
    const Grid1D g(-4.0, 4.0, n);
    FluidState s(n);
    const auto cdf = [](double x, double mu) { return 0.5 * std::erfc(-(x - mu) / (0.4 * std::sqrt(2.0))); };
    for (std::size_t j = 0; j < n; ++j) {
      const double a = g.left_face(j);
      s.rho[j] = (cdf(a + g.dx(), -1.0) - cdf(a, -1.0)) / g.dx();
      s.mom[j] = s.rho[j];
    }
    const double dt = 0.5 * g.dx();
    const long steps = std::lround(2.0 / dt);
    for (long i = 0; i < steps; ++i) hyperbolic_step(s, g, dt);
    double err = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double a = g.left_face(j);
      err += std::fabs(s.rho[j] - (cdf(a + g.dx(), 1.0) - cdf(a, 1.0)) / g.dx()) * g.dx();
    }
    hs.push_back(g.dx());
    errs.push_back(err);
  }
  const double order = fit_rate(hs, errs).slope;
  return {order >= 0.7 && order <= 1.1,
          fmt("L1 errors %.3e .. %.3e over 5 grids, order %.3f, want [0.7, 1.1]", errs.front(), errs.back(), order)};
}

Outcome criterion5() {
  const auto cfg = preset("test1");
  MacMacSimulation sim(make_macmac(cfg), cfg.cfl_config());
  const auto& s0 = sim.system();
  std::vector<double> m0{s0.follower.mass(s0.grid)};
  for (const auto& sl : s0.leader_slices) m0.push_back(sl.mass(s0.grid));
  double follower = 0.0, slices = 0.0;
  sim.advance_to(cfg.t_end, [&](const MacMacSimulation& m) {
    const auto& s = m.system();
    follower = std::max(follower, std::fabs(s.follower.mass(s.grid) - m0[0] - m.boundary_inflow()[0]));
    for (std::size_t p = 0; p < s.leader_slices.size(); ++p)
      slices = std::max(slices, std::fabs(s.leader_slices[p].mass(s.grid) - m0[p + 1] - m.boundary_inflow()[p + 1]));
  });
  return {follower <= 1e-10 && slices <= 1e-10 && sim.time() == cfg.t_end,
          fmt("dx %.3g, %zu steps to T=%g, max mass drift follower %.2e, slices %.2e, want <= 1e-10", cfg.dx,
              sim.steps(), sim.time(), follower, slices)};
}

Outcome criterion6() {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Grid1D g(-5.0, 5.0, 400);
  const auto density = [&] {
    std::vector<double> r(g.size());
    for (auto& x : r) x = u(rng) < 0.25 ? 0.0 : u(rng);
    r[g.size() / 3] += 0.05;
    return r;
  };
  int failures = 0;
  double worst_identity = 0.0, worst_triangle = -1e300;
  for (int t = 0; t < 100; ++t) {
    const auto a = density(), b = density(), c = density();
    const double ab = w1_density_vs_density(a, b, g), ba = w1_density_vs_density(b, a, g);
    const double aa = w1_density_vs_density(a, a, g);
    const double tri = ab - w1_density_vs_density(a, c, g) - w1_density_vs_density(c, b, g);
    worst_identity = std::max(worst_identity, aa);
    worst_triangle = std::max(worst_triangle, tri);
    if (!(ab >= 0.0) || !(ab > kW1IdentitySlack) || ab != ba || aa > kW1IdentitySlack || tri > kW1TriangleSlack)
      ++failures;
  }
  return {failures == 0, fmt("100 pairs, %d violations, max d(a,a) %.1e (slack %.0e), max triangle excess %.1e (slack %.0e)",
                             failures, worst_identity, kW1IdentitySlack, worst_triangle, kW1TriangleSlack)};
}

struct Moments {
  double mass, com, var;
};

Moments moments(const std::vector<double>& rho, const Grid1D& g) {
  double m = 0.0, first = 0.0, second = 0.0;
  for (std::size_t j = 0; j < rho.size(); ++j) {
    const double x = g.center(j);
    m += rho[j] * g.dx();
    first += x * rho[j] * g.dx();
    second += x * x * rho[j] * g.dx();
  }
  const double com = first / m;
  return {m, com, second / m - com * com};
}

// Local maxima of the 5-cell moving average that reach 10% of its peak.
std::vector<double> peaks(const std::vector<double>& rho, const Grid1D& g) {
  const std::size_t n = rho.size();
  std::vector<double> s(n, 0.0);
  for (std::size_t j = 2; j + 2 < n; ++j) s[j] = (rho[j - 2] + rho[j - 1] + rho[j] + rho[j + 1] + rho[j + 2]) / 5.0;
  const double top = *std::max_element(s.begin(), s.end());
  std::vector<double> out;
  for (std::size_t j = 1; j + 1 < n; ++j)
    if (s[j] >= 0.1 * top && s[j] > s[j - 1] && s[j] >= s[j + 1]) out.push_back(g.center(j));
  return out;
}

Outcome criterion7() {
  auto cfg = preset("test2");
  cfg.dx = 0.02;
  cfg.alpha = 1.0;
  HybridSimulation joined(make_hybrid(cfg), cfg.cfl_config());
  const auto m0 = moments(joined.system().follower.rho, joined.system().grid);
  joined.advance_to(cfg.t_end);
  const auto m1 = moments(joined.system().follower.rho, joined.system().grid);

  cfg.alpha = 0.0;
  HybridSimulation split(make_hybrid(cfg), cfg.cfl_config());
  split.advance_to(cfg.t_end);
  const auto p = peaks(split.system().follower.rho, split.system().grid);
  const double spread = p.empty() ? 0.0 : p.back() - p.front();
  const bool ok = m1.var <= 0.2 * m0.var && std::fabs(m1.com) <= 0.5 && p.size() >= 2 && spread >= 2.0;
  return {ok, fmt("alpha=1: variance %.4f -> %.4f (ratio %.3f, want <= 0.2), |com| %.2e; alpha=0: %zu maxima, outermost %.2f apart (want >= 2)",
                  m0.var, m1.var, m1.var / m0.var, std::fabs(m1.com), p.size(), spread)};
}

Outcome criterion8() {
  const auto cfg = preset("test3");
  const auto leaders = make_leaders(cfg, cfg.leaders);
  auto micro = make_micro(cfg);
  const std::size_t half = micro.followers.size() / 2;
  double closest = 1e300, closest_t = -1.0, cross_t = -1.0;
  double prev_gap = 0.0;
  simulate_micro(micro, 4.5, cfg.dt_micro, [&](double t, std::size_t, const MicroSystem& s) {
    double a = 0.0, b = 0.0;
    std::size_t na = 0, nb = 0;
    for (std::size_t i = 0; i < s.leaders.size(); ++i)
      (leaders.labels[i] == 0 ? (++na, a) : (++nb, b)) += s.leaders.positions[i];
    const double gap = a / na - b / nb;
    if (cross_t < 0.0 && t > 0.0 && gap * prev_gap <= 0.0) cross_t = t;
    prev_gap = gap;
    if (t >= 3.0) {
      double l = 0.0, r = 0.0;
      for (std::size_t i = 0; i < half; ++i) l += s.followers.positions[i];
      for (std::size_t i = half; i < s.followers.size(); ++i) r += s.followers.positions[i];
      const double d = std::fabs(r / (s.followers.size() - half) - l / half);
      if (d < closest) closest = d, closest_t = t;
    }
  });

  MacMacSimulation macmac(make_macmac(cfg), cfg.cfl_config());
  const auto& f = macmac.system().follower.rho;
  const double peak0 = *std::max_element(f.begin(), f.end());
  macmac.advance_to(3.5);
  const auto& f1 = macmac.system().follower.rho;
  const double peak1 = *std::max_element(f1.begin(), f1.end());

  const bool ok = closest <= 0.2 && cross_t >= 1.0 && cross_t <= 2.5 && peak1 >= 3.0 * peak0;
  return {ok, fmt("follower centroids %.3f apart at t=%.3f (want <= 0.2 in [3, 4.5]); leader centroids cross at t=%.3f "
                  "(want [1, 2.5]); macmac max rho_F %.3f -> %.3f at t=3.5 (x%.2f, want >= 3)",
                  closest, closest_t, cross_t, peak0, peak1, peak1 / peak0)};
}

Outcome criterion9() {
  const double x = 1.3, v = -0.8, inter = 0.4, com = -0.5, xd = 2.0, alpha = 0.3;
  const double fb = feedback_control(x, com, xd, {alpha, 1.0, {}});
  std::vector<double> hs, errs;
  for (double h : {1e-1, 1e-2, 1e-3, 1e-4}) {
    hs.push_back(h);
    errs.push_back(std::fabs(greedy_control(x, v, inter, com, xd, h, alpha / h, (1 - alpha) / h, 1.0) - fb));
  }
  const double slope = fit_rate(hs, errs).slope;
  return {slope >= 0.9, fmt("|greedy - feedback| %.2e .. %.2e, slope %.3f in h, want >= 0.9", errs.front(), errs.back(), slope)};
}

// The hybrid picks its own CFL steps; the particle system is replayed on the
// same step sequence.
Outcome criterion10() {
  auto cfg = preset("test1");
  cfg.alpha = 0.0;
  cfg.kernel_cross = KernelSpec::zero();
  cfg.weight = WeightSpec::constant(0.0);
  cfg.dx = 0.02;
  auto micro = make_micro(cfg);
  auto hybrid = make_hybrid(cfg);
  const std::size_t n = micro.leaders.size();
  const RhsFunction rhs = [&](std::span<const double> y, double, std::span<double> out) { micro_rhs(micro, y, out); };
  auto y = pack(micro);
  double t = 0.0;
  std::size_t steps = 0, mismatched = 0;
  while (t < cfg.t_end) {
    const double dt = hybrid_step(hybrid, cfg.cfl_config(), cfg.t_end - t).dt;
    y = rk4_step(rhs, y, t, dt);
    unpack(y, micro);
    t += dt;
    ++steps;
    if (micro.leaders.positions != hybrid.leaders.positions || micro.leaders.velocities != hybrid.leaders.velocities)
      ++mismatched;
  }
  return {mismatched == 0 && steps > 0,
          fmt("%zu leaders over %zu adaptive steps to T=%g, %zu steps with any bit difference", n, steps, t, mismatched)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                       criterion6, criterion7, criterion8, criterion9, criterion10};
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("criterion %2d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "lfsim/config.hpp"
#include "lfsim/metrics.hpp"
#include "oracle.hpp"

using namespace lfsim;

namespace {

std::vector<double> random_density(std::mt19937& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> rho(n);
  for (auto& r : rho) r = u(rng) < 0.3 ? 0.0 : u(rng);
  rho[n / 2] += 0.1;
  return rho;
}

// Linear interpolation between cell centres, clamped, written independently.
double lerp_centres(const std::vector<double>& v, double lo, double dx, double x) {
  const double s = (x - lo) / dx - 0.5;
  if (s <= 0) return v.front();
  if (s >= v.size() - 1) return v.back();
  const auto k = static_cast<std::size_t>(s);
  return v[k] + (s - k) * (v[k + 1] - v[k]);
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("empirical against uniform") {
    const Grid1D g(0.0, 2.0, 200);
    std::vector<double> rho(200, 0.0);
    for (std::size_t j = 50; j < 150; ++j) rho[j] = 1.0;
    std::vector<double> pts;
    for (int i = 0; i < 10; ++i) pts.push_back(0.05 + 0.1 * i);
    const double d = w1_empirical_vs_density(pts, rho, g);
    CHECK(d == doctest::Approx(0.5).epsilon(0.1));
    const double want = oracle::cdf_area([&](double x) { return oracle::empirical_cdf(pts, x); },
                                         [&](double x) { return oracle::grid_cdf(rho, 0.0, 0.01, x); }, 0.0, 2.0);
    CHECK(d == doctest::Approx(want).epsilon(1e-4));
  }

  TEST_CASE("dirac against a single cell") {
    const Grid1D g(-4.0, 4.0, 80);
    std::vector<double> rho(80, 0.0);
    rho[61] = 5.0;
    const std::vector<double> pt{-1.23};
    CHECK(std::fabs(w1_empirical_vs_density(pt, rho, g) - std::fabs(-1.23 - g.center(61))) <= g.dx());
    CHECK_THROWS(w1_empirical_vs_density(pt, std::vector<double>(80, 0.0), g));
    CHECK_THROWS(w1_empirical_vs_density(std::vector<double>{}, rho, g));
  }

  TEST_CASE("shifted gaussians") {
    const Grid1D g(-8.0, 8.0, 1600);
    std::vector<double> a(g.size()), b(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
      a[j] = oracle::normal_pdf(g.center(j), 0.0, 0.5);
      b[j] = oracle::normal_pdf(g.center(j), 1.0, 0.5);
    }
    CHECK(std::fabs(w1_density_vs_density(a, b, g) - 1.0) <= 2 * g.dx());
    CHECK(w1_density_vs_density(a, a, g) == 0.0);
    CHECK(w1_density_vs_density(a, b, g) == w1_density_vs_density(b, a, g));
  }

  TEST_CASE("metric axioms on random pairs") {
    std::mt19937 rng(11);
    const Grid1D g(-3.0, 3.0, 120);
    for (int t = 0; t < 100; ++t) {
      const auto a = random_density(rng, g.size());
      const auto b = random_density(rng, g.size());
      const auto c = random_density(rng, g.size());
      const double ab = w1_density_vs_density(a, b, g);
      CHECK(ab >= 0.0);
      CHECK(ab > 1e-12);
      CHECK(ab == w1_density_vs_density(b, a, g));
      CHECK(w1_density_vs_density(a, a, g) <= kW1IdentitySlack);
      auto scaled = a;
      for (auto& x : scaled) x *= 3.7;
      CHECK(w1_density_vs_density(a, scaled, g) <= kW1IdentitySlack);
      CHECK(ab <= w1_density_vs_density(a, c, g) + w1_density_vs_density(c, b, g) + kW1TriangleSlack);
      const double want = oracle::cdf_area([&](double x) { return oracle::grid_cdf(a, -3.0, 0.05, x); },
                                           [&](double x) { return oracle::grid_cdf(b, -3.0, 0.05, x); }, -3.0, 3.0, 24000);
      CHECK(ab == doctest::Approx(want).epsilon(1e-6));
    }
  }

  TEST_CASE("translation") {
    const Grid1D g(-10.0, 10.0, 2000);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int t = 0; t < 10; ++t) {
      const double c = u(rng);
      std::vector<double> a(g.size()), b(g.size());
      for (std::size_t j = 0; j < g.size(); ++j) {
        const double x = g.center(j);
        a[j] = oracle::normal_pdf(x, 0.0, 0.8) + 0.5 * oracle::normal_pdf(x, 1.5, 0.3);
        b[j] = oracle::normal_pdf(x - c, 0.0, 0.8) + 0.5 * oracle::normal_pdf(x - c, 1.5, 0.3);
      }
      CHECK(std::fabs(w1_density_vs_density(a, b, g) - std::fabs(c)) <= 2 * g.dx());
    }
  }

  TEST_CASE("follower modulated energy") {
    const Grid1D g(-2.0, 2.0, 40);
    FluidState f(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
      f.rho[j] = 1.0;
      f.mom[j] = std::sin(g.center(j));
    }
    ParticleState p({-1.03, 0.2, 1.77}, {0.0, 0.0, 0.0});
    for (std::size_t i = 0; i < 3; ++i) p.velocities[i] = interpolate(f.velocities(), g, p.positions[i]);
    CHECK(modulated_energy_followers(p, f, g) == 0.0);

    ParticleState one({0.33}, {interpolate(f.velocities(), g, 0.33) + 1.0});
    CHECK(modulated_energy_followers(one, f, g) == doctest::Approx(1.0).epsilon(1e-14));

    std::mt19937 rng(2);
    std::uniform_real_distribution<double> u(-2.5, 2.5);
    for (int t = 0; t < 20; ++t) {
      ParticleState r;
      for (int i = 0; i < 15; ++i) {
        r.positions.push_back(u(rng));
        r.velocities.push_back(u(rng));
      }
      auto doubled = r;
      const auto vel = f.velocities();
      double energy = 0.0;
      for (std::size_t i = 0; i < r.size(); ++i) {
        const double ui = lerp_centres(vel, -2.0, 0.1, r.positions[i]);
        doubled.velocities[i] = ui + 2.0 * (r.velocities[i] - ui);
        energy += 0.5 * (r.velocities[i] - ui) * (r.velocities[i] - ui) / r.size();
      }
      const double f2 = modulated_energy_followers(r, f, g);
      CHECK(f2 == doctest::Approx(2.0 * energy).epsilon(1e-12));
      CHECK(modulated_energy_followers(doubled, f, g) == doctest::Approx(4.0 * f2).epsilon(1e-12));
    }
  }

  TEST_CASE("leader modulated energy") {
    const Grid1D g(-2.0, 2.0, 40);
    FluidState s1(g.size()), s2(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
      s1.rho[j] = s2.rho[j] = 1.0;
      s1.mom[j] = 0.5;
      s2.mom[j] = 2.5;
    }
    const TargetMixture mix{{-1.0, 1.0}, {0.5, 0.5}};
    const std::vector<FluidState> slices{s1, s2};
    const ParticleState p({0.1}, {0.5});
    CHECK(modulated_energy_leaders(p, slices, mix, g) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(modulated_energy_leaders(ParticleState({0.1}, {0.5}), std::vector<FluidState>{s1}, TargetMixture{{0.0}, {1.0}}, g) == 0.0);

    const ParticleState q({-0.4, 0.9, 1.3}, {0.2, -1.0, 3.0});
    CHECK(modulated_energy_leaders(q, std::vector<FluidState>{s2}, TargetMixture{{0.0}, {1.0}}, g) ==
          modulated_energy_followers(q, s2, g));
    CHECK_THROWS(modulated_energy_leaders(q, std::vector<FluidState>{s2}, mix, g));
  }

  TEST_CASE("functional F at the initial time") {
    auto cfg = preset("test1");
    cfg.dx = 0.02;
    double prev = 1e300;
    for (std::size_t m : {10u, 100u, 1000u}) {
      cfg.followers = m;
      const auto micro = make_micro(cfg);
      const auto hybrid = make_hybrid(cfg);
      const auto f = functional_F(micro, hybrid);
      CHECK(f.f2 == 0.0);
      CHECK(f.f3 == 0.0);
      CHECK(f.f1 < prev);
      CHECK(f.sum() == f.f1 + f.f2 + f.f3);
      prev = f.f1;
      const double w = w1_empirical_vs_density(micro.followers.positions, hybrid.follower.rho, hybrid.grid);
      CHECK(f.f1 == w * w);
    }
    auto micro = make_micro(cfg);
    cfg.leaders = 99;
    CHECK_THROWS(functional_F(micro, make_hybrid(cfg)));
  }

  TEST_CASE("functional F pairs leaders by index") {
    auto cfg = preset("test1");
    cfg.dx = 0.05;
    cfg.leaders = 4;
    auto micro = make_micro(cfg);
    auto hybrid = make_hybrid(cfg);
    hybrid.leaders.positions[2] += 0.5;
    hybrid.leaders.velocities[0] -= 1.0;
    CHECK(functional_F(micro, hybrid).f3 == doctest::Approx((0.25 + 1.0) / 4.0));
  }

  TEST_CASE("functional G") {
    auto cfg = preset("test2");
    cfg.dx = 0.05;
    for (std::size_t n : {1u, 10u, 150u}) {
      cfg.leaders = n;
      const auto hybrid = make_hybrid(cfg);
      const auto macmac = make_macmac(cfg);
      const auto labels = make_leaders(cfg, n).labels;
      const auto g = functional_G(hybrid, labels, macmac);
      CHECK(g.g1 == 0.0);
      CHECK(g.g3 == 0.0);
      CHECK(g.g4 == 0.0);
      CHECK(std::isfinite(g.g2));
      CHECK(g.sum() == g.g1 + g.g2 + g.g3 + g.g4);
      double want = 0.0;
      for (std::size_t p = 0; p < 2; ++p) {
        std::vector<double> pts;
        for (std::size_t i = 0; i < n; ++i)
          if (labels[i] == p) pts.push_back(hybrid.leaders.positions[i]);
        if (pts.empty()) continue;
        const double w = w1_empirical_vs_density(pts, macmac.leader_slices[p].rho, macmac.grid);
        want += macmac.mixture.weights[p] * w * w;
      }
      CHECK(g.g2 == doctest::Approx(want).epsilon(1e-14));
    }
    cfg.leaders = 10;
    auto other = cfg;
    other.dx = 0.1;
    CHECK_THROWS(functional_G(make_hybrid(cfg), make_leaders(cfg, 10).labels, make_macmac(other)));
  }

  TEST_CASE("binning") {
    const Grid1D g(0.0, 1.0, 10);
    const ParticleState same({0.51, 0.52, 0.55}, {3.0, 3.0, 3.0});
    const auto b = bin_momentum(same, g);
    for (std::size_t j = 0; j < 10; ++j) {
      CHECK(b.density[j] == (j == 5 ? doctest::Approx(10.0) : doctest::Approx(0.0)));
      CHECK(b.momentum[j] == doctest::Approx(b.density[j] * 3.0));
    }
    const ParticleState spread({0.05, 0.5, 0.93, 0.94, 1.5}, {1.0, 2.0, 1.0, 3.0, 0.0});
    const auto c = bin_momentum(spread, g);
    double mass = 0.0;
    for (double d : c.density) mass += d * g.dx();
    CHECK(mass == doctest::Approx(0.8));
    CHECK(c.momentum[9] == doctest::Approx(c.density[9] * 2.0));

    const Grid1D big(-8.0, 8.0, 3200);
    const MixtureSpec g0{{{0.0, 0.5, 1.0}}};
    const auto pts = sample_inverse_transform(g0, 10000);
    const auto binned = bin_momentum(ParticleState(pts, std::vector<double>(pts.size(), 0.0)), big);
    double total = 0.0;
    for (double d : binned.density) total += d * big.dx();
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(w1_density_vs_density(binned.density, discretize_density(g0, big), big) <= 2 * big.dx());
  }

  TEST_CASE("rate fits") {
    const std::vector<double> sizes{10, 100, 1000};
    auto fit = fit_rate(sizes, std::vector<double>{0.3, 0.03, 0.003});
    CHECK(fit.rate() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(fit_rate(sizes, std::vector<double>{1e-2, 1e-4, 1e-6}).rate() == doctest::Approx(2.0).epsilon(1e-12));

    std::mt19937 rng(17);
    std::uniform_real_distribution<double> noise(0.9, 1.1);
    for (int t = 0; t < 200; ++t) {
      const std::vector<double> v{2.0 / 10 * noise(rng), 2.0 / 100 * noise(rng), 2.0 / 1000 * noise(rng)};
      const auto f = fit_rate(sizes, v);
      CHECK(std::fabs(f.rate() - 1.0) <= 0.15);
      CHECK(f.slope == doctest::Approx(oracle::loglog_slope(sizes, v)).epsilon(1e-12));
      auto scaled = v;
      for (auto& x : scaled) x *= 64.0;
      CHECK(fit_rate(sizes, scaled).slope == f.slope);
    }
    CHECK_THROWS(fit_rate(std::vector<double>{10}, std::vector<double>{1.0}));
    CHECK_THROWS(fit_rate(sizes, std::vector<double>{1.0, 0.0, 1.0}));
    CHECK_THROWS(fit_rate(sizes, std::vector<double>{1.0, 1.0}));
    CHECK_THROWS(fit_rate(std::vector<double>{5, 5}, std::vector<double>{1.0, 2.0}));
  }

  TEST_CASE("diagnostics csv") {
    std::vector<DiagnosticsRow> rows(2);
    rows[1].t = 0.5;
    rows[0].F = FunctionalF{0.1, 0.2, 0.3};
    rows[1].F = FunctionalF{0.1, 0.2, 0.4};
    std::ostringstream out;
    write_diagnostics_csv(out, rows);
    std::istringstream in(out.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,mass_F,com_F,max_rho_F,min_rho_F,boundary_flux,F1,F2,F3,Fsum");

    rows[0].F.reset();
    rows[1].F.reset();
    rows[0].G = FunctionalG{};
    std::ostringstream g;
    write_diagnostics_csv(g, rows);
    CHECK(g.str().rfind("t,mass_F,com_F,max_rho_F,min_rho_F,boundary_flux,G1,G2,G3,G4,Gsum\n", 0) == 0);

    rows[0].G.reset();
    std::ostringstream plain;
    write_diagnostics_csv(plain, rows);
    CHECK(plain.str().rfind("t,mass_F,com_F,max_rho_F,min_rho_F,boundary_flux\n", 0) == 0);
  }

  TEST_CASE("fluid diagnostics") {
    const Grid1D g(-1.0, 1.0, 4);
    const FluidState f({0.0, 1.0, 3.0, 0.0}, {0.0, 0.0, 0.0, 0.0});
    const auto row = fluid_diagnostics(2.0, f, g, -0.25);
    CHECK(row.t == 2.0);
    CHECK(row.mass_F == doctest::Approx(2.0));
    CHECK(row.com_F == doctest::Approx((-0.25 + 3 * 0.25) / 4.0));
    CHECK(row.max_rho_F == 3.0);
    CHECK(row.min_rho_F == 0.0);
    CHECK(row.boundary_flux == -0.25);
  }
}

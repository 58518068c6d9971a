#include "lfsim/micro.hpp"

#include <cmath>
#include <stdexcept>

#include "lfsim/pairwise.hpp"

namespace lfsim {

ParticleState::ParticleState(std::vector<double> x, std::vector<double> v)
    : positions(std::move(x)), velocities(std::move(v)) {
  validate();
}

double ParticleState::mean_position() const {
  if (positions.empty()) return 0.0;
  return folded_sum(positions.size(), [&](std::size_t k) { return positions[k]; }) /
         static_cast<double>(positions.size());
}

void ParticleState::validate() const {
  if (positions.size() != velocities.size())
    throw std::invalid_argument("ParticleState: positions and velocities differ in length");
  for (std::size_t i = 0; i < positions.size(); ++i)
    if (!std::isfinite(positions[i]) || !std::isfinite(velocities[i]))
      throw std::invalid_argument("ParticleState: non-finite entry");
}

void ControlParams::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("ControlParams: alpha must lie in [0, 1]");
  if (!(gamma > 0.0)) throw std::invalid_argument("ControlParams: gamma must be positive");
}

void InteractionKernels::report_analytical_class() const {
  warn_if_non_lipschitz(leader, "leader");
  warn_if_non_lipschitz(follower, "follower");
  warn_if_non_lipschitz(cross, "cross");
}

void MicroSystem::validate() const {
  leaders.validate();
  followers.validate();
  control.validate();
  if (control.targets.size() != leaders.size())
    throw std::invalid_argument("MicroSystem: one target per leader required");
}

double feedback_control(double x, double com_followers, double x_d, const ControlParams& params) {
  return (-params.alpha * (x - com_followers) - (1.0 - params.alpha) * (x - x_d)) / params.gamma;
}

double greedy_control(double x, double v, double interaction, double com_followers, double x_d, double h,
                      double alpha, double beta, double gamma) {
  if (!(h > 0.0) || !(gamma > 0.0)) throw std::invalid_argument("greedy_control: h and gamma must be positive");
  const double x_plus = x + h * v + h * h * interaction;
  return -h / (gamma + h * h * h * (alpha + beta)) * (alpha * (x_plus - com_followers) + beta * (x_plus - x_d));
}

namespace {

template <class K>
void self_interaction_impl(K kernel, std::span<const double> x, std::span<double> out) {
  const std::size_t n = x.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    out[i] = folded_sum(n, [&](std::size_t j) { return kernel(x[j] - xi); }) * inv_n;
  }
}

// Acceleration of followers from the leaders: attraction plus alignment.
// Mirror partners are laid out side by side so the pair terms vectorise; the
// reduction order is the same as folded_sum.
template <class K, class W>
void leader_pull_impl(K cross, W phi, std::span<const double> x, std::span<const double> v,
                      std::span<const double> y, std::span<const double> w, std::span<double> out) {
  const std::size_t n = x.size();
  const std::size_t half = n / 2;
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> xa(half), va(half), xb(half), vb(half), pair(half);
  for (std::size_t k = 0; k < half; ++k) {
    xa[k] = x[k];
    va[k] = v[k];
    xb[k] = x[n - 1 - k];
    vb[k] = v[n - 1 - k];
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double yi = y[i];
    const double wi = w[i];
    for (std::size_t k = 0; k < half; ++k) {
      const double ra = xa[k] - yi;
      const double rb = xb[k] - yi;
      pair[k] = (cross(ra) + phi(ra) * (va[k] - wi)) + (cross(rb) + phi(rb) * (vb[k] - wi));
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < half; ++k) sum += pair[k];
    if (n % 2 == 1) {
      const double r = x[half] - yi;
      sum += cross(r) + phi(r) * (v[half] - wi);
    }
    out[i] += sum * inv_n;
  }
}

}  // namespace

std::vector<double> self_interaction(const KernelSpec& kernel, std::span<const double> x) {
  std::vector<double> out(x.size(), 0.0);
  if (x.empty() || kernel.is_zero()) return out;
  if (kernel.family() == KernelSpec::Family::Linear) {
    // (1/n) sum_j c (x_j - x_i) = c (mean - x_i)
    const double mean = folded_sum(x.size(), [&](std::size_t k) { return x[k]; }) / static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = kernel.coefficient() * (mean - x[i]);
    return out;
  }
  visit_kernel(kernel, [&](auto k) { self_interaction_impl(k, x, out); });
  return out;
}

std::vector<double> pack(const MicroSystem& system) {
  const auto& L = system.leaders;
  const auto& F = system.followers;
  std::vector<double> s;
  s.reserve(2 * (L.size() + F.size()));
  s.insert(s.end(), L.positions.begin(), L.positions.end());
  s.insert(s.end(), L.velocities.begin(), L.velocities.end());
  s.insert(s.end(), F.positions.begin(), F.positions.end());
  s.insert(s.end(), F.velocities.begin(), F.velocities.end());
  return s;
}

void unpack(std::span<const double> state, MicroSystem& system) {
  const std::size_t n = system.leaders.size();
  const std::size_t m = system.followers.size();
  if (state.size() != 2 * (n + m)) throw std::invalid_argument("unpack: state size mismatch");
  auto it = state.begin();
  std::copy(it, it + n, system.leaders.positions.begin());
  std::copy(it + n, it + 2 * n, system.leaders.velocities.begin());
  std::copy(it + 2 * n, it + 2 * n + m, system.followers.positions.begin());
  std::copy(it + 2 * n + m, it + 2 * (n + m), system.followers.velocities.begin());
}

void micro_rhs(const MicroSystem& system, std::span<const double> state, std::span<double> out) {
  const std::size_t n = system.leaders.size();
  const std::size_t m = system.followers.size();
  const auto x = state.subspan(0, n);
  const auto v = state.subspan(n, n);
  const auto y = state.subspan(2 * n, m);
  const auto w = state.subspan(2 * n + m, m);
  auto dx = out.subspan(0, n);
  auto dv = out.subspan(n, n);
  auto dy = out.subspan(2 * n, m);
  auto dw = out.subspan(2 * n + m, m);

  const double com =
      m == 0 ? 0.0 : folded_sum(m, [&](std::size_t k) { return y[k]; }) / static_cast<double>(m);
  const auto& k = system.kernels;
  const double alpha = system.control.alpha;

  const auto leader_force = self_interaction(k.leader, x);
  for (std::size_t i = 0; i < n; ++i) {
    dx[i] = v[i];
    dv[i] = leader_acceleration(x[i], v[i], system.control.targets[i], com, alpha, leader_force[i]);
  }

  const auto follower_force = self_interaction(k.follower, y);
  for (std::size_t i = 0; i < m; ++i) {
    dy[i] = w[i];
    dw[i] = follower_force[i];
  }
  if (n > 0 && !(k.cross.is_zero() && k.phi.is_zero())) {
    visit_kernel(k.cross, [&](auto cross) {
      visit_weight(k.phi, [&](auto phi) { leader_pull_impl(cross, phi, x, v, y, w, dw); });
    });
  }
}

std::vector<double> rk4_step(const RhsFunction& rhs, std::span<const double> state, double t, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be positive");
  const std::size_t n = state.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  auto check = [&](const std::vector<double>& stage) {
    for (double value : stage)
      if (!std::isfinite(value)) throw IntegrationError("rk4_step: non-finite stage value", t);
  };

  rhs(state, t, k1);
  check(k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * dt * k1[i];
  rhs(tmp, t + 0.5 * dt, k2);
  check(k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * dt * k2[i];
  rhs(tmp, t + 0.5 * dt, k3);
  check(k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + dt * k3[i];
  rhs(tmp, t + dt, k4);
  check(k4);

  std::vector<double> next(n);
  for (std::size_t i = 0; i < n; ++i)
    next[i] = state[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  check(next);
  return next;
}

namespace {

// Number of fixed steps to cover span; the last one may be shorter.
std::size_t steps_for(double span, double dt) {
  const double ratio = span / dt;
  auto n = static_cast<std::size_t>(std::ceil(ratio - 1e-9));
  return n == 0 ? 1 : n;
}

}  // namespace

void simulate_micro(MicroSystem& system, double t_end, double dt, const MicroObserver& observer,
                    std::size_t observe_every) {
  if (!(t_end >= 0.0)) throw std::invalid_argument("simulate_micro: t_end must be non-negative");
  if (!(dt > 0.0)) throw std::invalid_argument("simulate_micro: dt must be positive");
  system.validate();
  if (observer) observer(0.0, 0, system);
  if (t_end == 0.0) return;

  const RhsFunction rhs = [&system](std::span<const double> s, double, std::span<double> out) {
    micro_rhs(system, s, out);
  };
  auto state = pack(system);
  const std::size_t n_steps = steps_for(t_end, dt);
  for (std::size_t step = 1; step <= n_steps; ++step) {
    const double t0 = static_cast<double>(step - 1) * dt;
    const double h = step == n_steps ? t_end - t0 : dt;
    state = rk4_step(rhs, state, t0, h);
    unpack(state, system);
    const double t = step == n_steps ? t_end : static_cast<double>(step) * dt;
    if (observer && (step == n_steps || (observe_every > 0 && step % observe_every == 0)))
      observer(t, step, system);
  }
}

MicroSimulation::MicroSimulation(MicroSystem system, double dt) : system_(std::move(system)), dt_(dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("MicroSimulation: dt must be positive");
  system_.validate();
}

void MicroSimulation::advance_to(double t_target) {
  if (t_target <= time_) return;
  const RhsFunction rhs = [this](std::span<const double> s, double, std::span<double> out) {
    micro_rhs(system_, s, out);
  };
  auto state = pack(system_);
  const double t0 = time_;
  const std::size_t n_steps = steps_for(t_target - t0, dt_);
  for (std::size_t step = 1; step <= n_steps; ++step) {
    const double ts = t0 + static_cast<double>(step - 1) * dt_;
    const double h = step == n_steps ? t_target - ts : dt_;
    state = rk4_step(rhs, state, ts, h);
    ++steps_;
  }
  unpack(state, system_);
  time_ = t_target;
}

}  // namespace lfsim

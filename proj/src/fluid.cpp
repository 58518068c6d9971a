#include "lfsim/fluid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>

#include "lfsim/pairwise.hpp"

namespace lfsim {

namespace {

// Tables at least this long are applied through FFT correlation.
constexpr std::size_t kFftCells = 256;

std::size_t fft_length(std::size_t minimum) {
  std::size_t len = 1;
  while (len < minimum) len *= 2;
  return len;
}

// Plans and buffers for one transform length. FFTW planning is not
// re-entrant, so the cache and the buffers are used under one lock.
struct FftWorkspace {
  std::size_t len;
  double* real;
  fftw_complex* a;
  fftw_complex* b;
  fftw_plan forward;
  fftw_plan backward;

  explicit FftWorkspace(std::size_t n) : len(n) {
    real = fftw_alloc_real(len);
    a = fftw_alloc_complex(len / 2 + 1);
    b = fftw_alloc_complex(len / 2 + 1);
    forward = fftw_plan_dft_r2c_1d(static_cast<int>(len), real, a, FFTW_ESTIMATE);
    backward = fftw_plan_dft_c2r_1d(static_cast<int>(len), a, real, FFTW_ESTIMATE);
  }
  ~FftWorkspace() {
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
    fftw_free(real);
    fftw_free(a);
    fftw_free(b);
  }
  FftWorkspace(const FftWorkspace&) = delete;
  FftWorkspace& operator=(const FftWorkspace&) = delete;
};

std::mutex fft_mutex;

FftWorkspace& fft_workspace(std::size_t len) {
  static std::map<std::size_t, std::unique_ptr<FftWorkspace>> cache;
  auto& slot = cache[len];
  if (!slot) slot = std::make_unique<FftWorkspace>(len);
  return *slot;
}

// out[j] += factor * sum_k h[k - j + n - 1] w[k], as the linear convolution
// of w with the reversed table read at n - 1 + j.
void fft_pull(std::span<const double> table, std::span<const double> w, double factor, std::span<double> out) {
  const std::size_t n = w.size();
  const std::size_t len = fft_length(2 * n - 1);
  std::lock_guard lock(fft_mutex);
  auto& ws = fft_workspace(len);

  std::fill(ws.real, ws.real + len, 0.0);
  for (std::size_t m = 0; m < table.size(); ++m) ws.real[m] = table[table.size() - 1 - m];
  fftw_execute(ws.forward);
  std::copy(ws.a[0], ws.a[0] + 2 * (len / 2 + 1), ws.b[0]);

  std::fill(ws.real, ws.real + len, 0.0);
  std::copy(w.begin(), w.end(), ws.real);
  fftw_execute(ws.forward);
  for (std::size_t i = 0; i <= len / 2; ++i) {
    const double re = ws.a[i][0] * ws.b[i][0] - ws.a[i][1] * ws.b[i][1];
    const double im = ws.a[i][0] * ws.b[i][1] + ws.a[i][1] * ws.b[i][0];
    ws.a[i][0] = re;
    ws.a[i][1] = im;
  }
  fftw_execute(ws.backward);
  const double scale = factor / static_cast<double>(len);
  for (std::size_t j = 0; j < n; ++j) out[j] += scale * ws.real[n - 1 + j];
}

}  // namespace

Grid1D Grid1D::with_spacing(double x_min, double x_max, double dx) {
  if (!(dx > 0.0)) throw std::invalid_argument("Grid1D: dx must be positive");
  const double cells = std::round((x_max - x_min) / dx);
  if (cells < 2.0) throw std::invalid_argument("Grid1D: dx too large for the domain");
  return Grid1D(x_min, x_max, static_cast<std::size_t>(cells));
}

FluidState::FluidState(std::vector<double> density, std::vector<double> momentum)
    : rho(std::move(density)), mom(std::move(momentum)) {
  if (rho.size() != mom.size()) throw std::invalid_argument("FluidState: rho and mom differ in length");
  for (double r : rho)
    if (!(r >= 0.0)) throw std::invalid_argument("FluidState: density must be non-negative");
  enforce_vacuum();
}

std::vector<double> FluidState::velocities() const {
  std::vector<double> u(rho.size());
  for (std::size_t j = 0; j < rho.size(); ++j) u[j] = velocity(j);
  return u;
}

double FluidState::mass(const Grid1D& grid) const {
  return folded_sum(rho.size(), [&](std::size_t k) { return rho[k]; }) * grid.dx();
}

double FluidState::max_speed() const {
  double m = 0.0;
  for (std::size_t j = 0; j < rho.size(); ++j) m = std::max(m, std::fabs(velocity(j)));
  return m;
}

void FluidState::enforce_vacuum() {
  for (std::size_t j = 0; j < rho.size(); ++j)
    if (rho[j] < kVacuumDensity) mom[j] = 0.0;
}

void CflConfig::validate() const {
  if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("CflConfig: cfl must lie in (0, 1]");
  if (!(dt_max > 0.0)) throw std::invalid_argument("CflConfig: dt_max must be positive");
  if (!(lambda_floor > 0.0)) throw std::invalid_argument("CflConfig: lambda_floor must be positive");
}

FluxPair rusanov_flux(double rho_l, double mom_l, double rho_r, double mom_r) {
  const double u_l = rho_l >= kVacuumDensity ? mom_l / rho_l : 0.0;
  const double u_r = rho_r >= kVacuumDensity ? mom_r / rho_r : 0.0;
  const double m_l = rho_l >= kVacuumDensity ? mom_l : 0.0;
  const double m_r = rho_r >= kVacuumDensity ? mom_r : 0.0;
  const double lambda = std::max(std::fabs(u_l), std::fabs(u_r));
  return {0.5 * (m_l + m_r) - 0.5 * lambda * (rho_r - rho_l),
          0.5 * (u_l * m_l + u_r * m_r) - 0.5 * lambda * (m_r - m_l)};
}

double cfl_dt(std::span<const FluidState* const> states, const Grid1D& grid, const CflConfig& cfg) {
  if (states.empty()) throw std::invalid_argument("cfl_dt: no fluid states");
  double lambda = 0.0;
  for (const FluidState* s : states) lambda = std::max(lambda, s->max_speed());
  return std::min(cfg.dt_max, cfg.cfl * grid.dx() / std::max(lambda, cfg.lambda_floor));
}

double cfl_dt(const FluidState& state, const Grid1D& grid, const CflConfig& cfg) {
  const FluidState* one[] = {&state};
  return cfl_dt(one, grid, cfg);
}

double hyperbolic_step(FluidState& state, const Grid1D& grid, double dt) {
  const std::size_t n = state.size();
  if (n != grid.size()) throw std::invalid_argument("hyperbolic_step: state does not match grid");
  std::vector<FluxPair> flux(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const std::size_t l = i == 0 ? 0 : i - 1;
    const std::size_t r = i == n ? n - 1 : i;
    flux[i] = rusanov_flux(state.rho[l], state.mom[l], state.rho[r], state.mom[r]);
  }
  const double ratio = dt / grid.dx();
  for (std::size_t j = 0; j < n; ++j) {
    double rho = state.rho[j] - ratio * (flux[j + 1].mass - flux[j].mass);
    const double mom = state.mom[j] - ratio * (flux[j + 1].momentum - flux[j].momentum);
    if (!std::isfinite(rho) || !std::isfinite(mom))
      throw FluidStepError("hyperbolic_step: non-finite value in cell " + std::to_string(j));
    if (rho < 0.0) {
      if (rho < -1e-13)
        throw FluidStepError("hyperbolic_step: negative density " + std::to_string(rho) + " in cell " +
                             std::to_string(j));
      rho = 0.0;
    }
    state.rho[j] = rho;
    state.mom[j] = mom;
  }
  state.enforce_vacuum();
  return dt * (flux[0].mass - flux[n].mass);
}

void source_step(FluidState& state, std::span<const double> accel, double dt) {
  if (accel.size() != state.size()) throw std::invalid_argument("source_step: size mismatch");
  for (std::size_t j = 0; j < state.size(); ++j) {
    if (!std::isfinite(accel[j])) throw FluidStepError("source_step: non-finite source in cell " + std::to_string(j));
    if (state.rho[j] >= kVacuumDensity) state.mom[j] += dt * state.rho[j] * accel[j];
  }
}

DifferenceTable DifferenceTable::of(const KernelSpec& kernel, const Grid1D& grid) {
  return visit_kernel(kernel, [&](auto k) { return DifferenceTable(grid.size(), grid.dx(), k); });
}

DifferenceTable DifferenceTable::of(const WeightSpec& weight, const Grid1D& grid) {
  return visit_weight(weight, [&](auto w) { return DifferenceTable(grid.size(), grid.dx(), w); });
}

void accumulate_pull(const DifferenceTable& table, std::span<const double> weight, double dx, double scale,
                     std::span<double> out) {
  const std::size_t n = weight.size();
  if (table.cells() != n || out.size() != n) throw std::invalid_argument("accumulate_pull: size mismatch");
  const double factor = scale * dx;
  if (n >= kFftCells) {
    fft_pull(table.values(), weight, factor, out);
    return;
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double* row = table.row(j);  // row[k] = value at x_k - x_j
    out[j] += factor * folded_sum(n, [&](std::size_t k) { return row[k] * weight[k]; });
  }
}

void accumulate_kernel_pull(const KernelSpec& kernel, const Grid1D& grid, std::span<const double> weight, double scale,
                            std::span<double> out) {
  if (kernel.is_zero()) return;
  if (kernel.family() != KernelSpec::Family::Linear) {
    accumulate_pull(DifferenceTable::of(kernel, grid), weight, grid.dx(), scale, out);
    return;
  }
  const std::size_t n = weight.size();
  if (grid.size() != n || out.size() != n) throw std::invalid_argument("accumulate_kernel_pull: size mismatch");
  // sum_k c (x_k - x_j) w_k = c (m1 - x_j m0)
  const double m0 = folded_sum(n, [&](std::size_t k) { return weight[k]; });
  const double m1 = folded_sum(n, [&](std::size_t k) { return grid.center(k) * weight[k]; });
  const double factor = scale * grid.dx() * kernel.coefficient();
  for (std::size_t j = 0; j < n; ++j) out[j] += factor * (m1 - grid.center(j) * m0);
}

std::vector<double> convolve_grid(const KernelSpec& kernel, std::span<const double> density, const Grid1D& grid) {
  std::vector<double> out(density.size(), 0.0);
  if (kernel.is_zero()) return out;
  // sum_k W'(x_j - x_k) rho_k = -sum_k W'(x_k - x_j) rho_k by oddness.
  accumulate_kernel_pull(kernel, grid, density, -1.0, out);
  return out;
}

double interpolate(std::span<const double> values, const Grid1D& grid, double x) {
  const std::size_t n = values.size();
  const double s = (x - grid.x_min()) / grid.dx() - 0.5;
  if (!(s > 0.0)) return values[0];
  if (s >= static_cast<double>(n - 1)) return values[n - 1];
  const auto j = static_cast<std::size_t>(s);
  const double theta = s - static_cast<double>(j);
  return (1.0 - theta) * values[j] + theta * values[j + 1];
}

}  // namespace lfsim

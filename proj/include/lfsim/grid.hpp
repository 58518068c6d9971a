#pragma once

#include <cstddef>
#include <stdexcept>

namespace lfsim {

/// Uniform 1D cell-centred grid on [x_min, x_max].
///
/// Centres in the upper half are measured from x_max so that a domain
/// symmetric about 0 yields centres with center(n-1-j) == -center(j) exactly.
class Grid1D {
 public:
  Grid1D() = default;
  Grid1D(double x_min, double x_max, std::size_t n_cells)
      : x_min_(x_min), x_max_(x_max), n_(n_cells), dx_((x_max - x_min) / static_cast<double>(n_cells)) {
    if (n_cells < 2) throw std::invalid_argument("Grid1D: need at least 2 cells");
    if (!(x_max > x_min)) throw std::invalid_argument("Grid1D: x_max must exceed x_min");
  }

  /// Grid whose spacing is the closest to dx that divides the domain.
  static Grid1D with_spacing(double x_min, double x_max, double dx);

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  std::size_t size() const { return n_; }
  double dx() const { return dx_; }

  double center(std::size_t j) const {
    const double half = static_cast<double>(j) + 0.5;
    if (2 * j < n_) return x_min_ + half * dx_;
    return x_max_ - (static_cast<double>(n_ - j) - 0.5) * dx_;
  }
  double left_face(std::size_t j) const { return x_min_ + static_cast<double>(j) * dx_; }

  bool operator==(const Grid1D& other) const {
    return x_min_ == other.x_min_ && x_max_ == other.x_max_ && n_ == other.n_;
  }

 private:
  double x_min_ = 0.0;
  double x_max_ = 1.0;
  std::size_t n_ = 2;
  double dx_ = 0.5;
};

}  // namespace lfsim

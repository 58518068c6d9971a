#pragma once

#include <cmath>
#include <string>
#include <string_view>

namespace lfsim {

/// Interaction kernel W'(r) in one space dimension.
///
/// Every family is odd in r. Evaluation goes through a sign/|r| split so that
/// eval(-r) == -eval(r) holds bit for bit, and W'(0) == 0 for all families
/// (the self-interaction term of a pairwise sum vanishes on its own).
class KernelSpec {
 public:
  enum class Family { Zero, Linear, Sign, TruncatedLinear, RegularizedSingular };

  static constexpr double kDefaultSingularEps = 0.05;

  KernelSpec() = default;

  static KernelSpec zero();
  /// c * r
  static KernelSpec linear(double c);
  /// c * sign(r)
  static KernelSpec sign(double c);
  /// c * r on |r| <= radius, 0 outside
  static KernelSpec truncated_linear(double c, double radius);
  /// c * sign(r) / (|r| + eps^2) on eps < |r| <= radius, 0 elsewhere
  static KernelSpec regularized_singular(double c, double eps, double radius);

  double operator()(double r) const;

  Family family() const { return family_; }
  double coefficient() const { return c_; }
  double radius() const { return radius_; }
  double eps() const { return eps_; }

  /// True for the families covered by the Lipschitz theory (zero, linear).
  bool lipschitz() const;
  bool is_zero() const { return family_ == Family::Zero || c_ == 0.0; }

  /// Config representation, e.g. "truncated_linear c=1 radius=4".
  std::string to_string() const;
  static KernelSpec parse(std::string_view text);

 private:
  Family family_ = Family::Zero;
  double c_ = 0.0;
  double radius_ = 0.0;
  double eps_ = 0.0;
};

/// Communication weight phi(r): constant c, or (1 + r^2)^(-beta/2).
class WeightSpec {
 public:
  enum class Family { Constant, Power };

  WeightSpec() = default;

  static WeightSpec constant(double c);
  static WeightSpec power(double beta);

  double operator()(double r) const;

  Family family() const { return family_; }
  double value() const { return value_; }
  bool is_zero() const { return family_ == Family::Constant && value_ == 0.0; }

  std::string to_string() const;
  static WeightSpec parse(std::string_view text);

 private:
  Family family_ = Family::Constant;
  double value_ = 0.0;  // c for Constant, beta for Power
};

namespace kernel_fn {

struct Zero {
  double operator()(double) const { return 0.0; }
};
struct Linear {
  double c;
  double operator()(double r) const { return c * r; }
};
struct Sign {
  double c;
  double operator()(double r) const { return r > 0.0 ? c : (r < 0.0 ? -c : 0.0); }
};
struct TruncatedLinear {
  double c, radius;
  double operator()(double r) const {
    const double a = std::fabs(r);
    const double m = a <= radius ? c * a : 0.0;
    return r < 0.0 ? -m : m;
  }
};
struct RegularizedSingular {
  double c, eps, radius;
  double operator()(double r) const {
    const double a = std::fabs(r);
    const double m = (a > eps && a <= radius) ? c / (a + eps * eps) : 0.0;
    return r < 0.0 ? -m : m;
  }
};

struct Constant {
  double c;
  double operator()(double) const { return c; }
};
struct PowerHalf {  // beta = 0.5
  double operator()(double r) const { return 1.0 / std::sqrt(std::sqrt(1.0 + r * r)); }
};
struct PowerOne {
  double operator()(double r) const { return 1.0 / std::sqrt(1.0 + r * r); }
};
struct PowerTwo {
  double operator()(double r) const { return 1.0 / (1.0 + r * r); }
};
struct PowerGeneral {
  double beta;
  double operator()(double r) const { return std::pow(1.0 + r * r, -0.5 * beta); }
};

}  // namespace kernel_fn

/// Calls fn with a concrete functor equivalent to spec (same arithmetic as
/// spec(r)), so inner loops can be specialised per family.
template <class Fn>
decltype(auto) visit_kernel(const KernelSpec& spec, Fn&& fn) {
  using F = KernelSpec::Family;
  switch (spec.family()) {
    case F::Linear:
      return fn(kernel_fn::Linear{spec.coefficient()});
    case F::Sign:
      return fn(kernel_fn::Sign{spec.coefficient()});
    case F::TruncatedLinear:
      return fn(kernel_fn::TruncatedLinear{spec.coefficient(), spec.radius()});
    case F::RegularizedSingular:
      return fn(kernel_fn::RegularizedSingular{spec.coefficient(), spec.eps(), spec.radius()});
    case F::Zero:
      break;
  }
  return fn(kernel_fn::Zero{});
}

template <class Fn>
decltype(auto) visit_weight(const WeightSpec& spec, Fn&& fn) {
  if (spec.family() == WeightSpec::Family::Constant) return fn(kernel_fn::Constant{spec.value()});
  const double beta = spec.value();
  if (beta == 0.5) return fn(kernel_fn::PowerHalf{});
  if (beta == 1.0) return fn(kernel_fn::PowerOne{});
  if (beta == 2.0) return fn(kernel_fn::PowerTwo{});
  if (beta == 0.0) return fn(kernel_fn::Constant{1.0});
  return fn(kernel_fn::PowerGeneral{beta});
}

inline double kernel_eval(const KernelSpec& spec, double r) { return spec(r); }
inline double weight_eval(const WeightSpec& spec, double r) { return spec(r); }

/// Logs a one-line notice to stderr when a kernel lies outside the Lipschitz
/// class. Returns true if a notice was printed.
bool warn_if_non_lipschitz(const KernelSpec& spec, std::string_view role);

}  // namespace lfsim

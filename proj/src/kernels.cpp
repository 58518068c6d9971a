#include "lfsim/kernels.hpp"

#include <charconv>
#include <cmath>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace lfsim {

namespace {

// "name k1=v1 k2=v2" -> name, {k: v}
std::pair<std::string, std::map<std::string, double>> split_spec(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string name;
  in >> name;
  if (name.empty()) throw std::invalid_argument("empty kernel specification");
  std::map<std::string, double> params;
  std::string token;
  while (in >> token) {
    auto eq = token.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == token.size())
      throw std::invalid_argument("malformed kernel parameter '" + token + "' in '" +
                                  std::string(text) + "'");
    std::size_t used = 0;
    std::string value = token.substr(eq + 1);
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size())
      throw std::invalid_argument("non-numeric kernel parameter '" + token + "'");
    params[token.substr(0, eq)] = v;
  }
  return {name, params};
}

double take(std::map<std::string, double>& params, const std::string& key, std::string_view spec) {
  auto it = params.find(key);
  if (it == params.end())
    throw std::invalid_argument("missing parameter '" + key + "' in '" + std::string(spec) + "'");
  double v = it->second;
  params.erase(it);
  return v;
}

double take_or(std::map<std::string, double>& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  double v = it->second;
  params.erase(it);
  return v;
}

void expect_consumed(const std::map<std::string, double>& params, std::string_view spec) {
  if (!params.empty())
    throw std::invalid_argument("unknown parameter '" + params.begin()->first + "' in '" +
                                std::string(spec) + "'");
}

std::string fmt(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("cannot format number");
  return std::string(buf, end);
}

}  // namespace

KernelSpec KernelSpec::zero() { return KernelSpec{}; }

KernelSpec KernelSpec::linear(double c) {
  KernelSpec k;
  k.family_ = Family::Linear;
  k.c_ = c;
  return k;
}

KernelSpec KernelSpec::sign(double c) {
  KernelSpec k;
  k.family_ = Family::Sign;
  k.c_ = c;
  return k;
}

KernelSpec KernelSpec::truncated_linear(double c, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("truncated_linear: radius must be positive");
  KernelSpec k;
  k.family_ = Family::TruncatedLinear;
  k.c_ = c;
  k.radius_ = radius;
  return k;
}

KernelSpec KernelSpec::regularized_singular(double c, double eps, double radius) {
  if (!(eps > 0.0)) throw std::invalid_argument("regularized_singular: eps must be positive");
  if (!(radius > 0.0)) throw std::invalid_argument("regularized_singular: radius must be positive");
  KernelSpec k;
  k.family_ = Family::RegularizedSingular;
  k.c_ = c;
  k.eps_ = eps;
  k.radius_ = radius;
  return k;
}

double KernelSpec::operator()(double r) const {
  return visit_kernel(*this, [r](auto fn) { return fn(r); });
}

bool KernelSpec::lipschitz() const {
  return family_ == Family::Zero || family_ == Family::Linear || c_ == 0.0;
}

std::string KernelSpec::to_string() const {
  switch (family_) {
    case Family::Zero:
      return "zero";
    case Family::Linear:
      return "linear c=" + fmt(c_);
    case Family::Sign:
      return "sign c=" + fmt(c_);
    case Family::TruncatedLinear:
      return "truncated_linear c=" + fmt(c_) + " radius=" + fmt(radius_);
    case Family::RegularizedSingular:
      return "regularized_singular c=" + fmt(c_) + " eps=" + fmt(eps_) + " radius=" + fmt(radius_);
  }
  return "zero";
}

KernelSpec KernelSpec::parse(std::string_view text) {
  auto [name, params] = split_spec(text);
  KernelSpec k;
  if (name == "zero") {
    k = zero();
  } else if (name == "linear") {
    k = linear(take(params, "c", text));
  } else if (name == "sign") {
    k = sign(take(params, "c", text));
  } else if (name == "truncated_linear") {
    double c = take(params, "c", text);
    k = truncated_linear(c, take(params, "radius", text));
  } else if (name == "regularized_singular") {
    double c = take(params, "c", text);
    double eps = take_or(params, "eps", kDefaultSingularEps);
    k = regularized_singular(c, eps, take(params, "radius", text));
  } else {
    throw std::invalid_argument("unknown kernel family '" + name + "'");
  }
  expect_consumed(params, text);
  return k;
}

WeightSpec WeightSpec::constant(double c) {
  if (!(c >= 0.0)) throw std::invalid_argument("constant weight must be non-negative");
  WeightSpec w;
  w.family_ = Family::Constant;
  w.value_ = c;
  return w;
}

WeightSpec WeightSpec::power(double beta) {
  if (!(beta >= 0.0)) throw std::invalid_argument("power weight: beta must be non-negative");
  WeightSpec w;
  w.family_ = Family::Power;
  w.value_ = beta;
  return w;
}

double WeightSpec::operator()(double r) const {
  return visit_weight(*this, [r](auto fn) { return fn(r); });
}

std::string WeightSpec::to_string() const {
  if (family_ == Family::Constant) return "constant c=" + fmt(value_);
  return "power beta=" + fmt(value_);
}

WeightSpec WeightSpec::parse(std::string_view text) {
  auto [name, params] = split_spec(text);
  WeightSpec w;
  if (name == "constant") {
    w = constant(take(params, "c", text));
  } else if (name == "power") {
    w = power(take(params, "beta", text));
  } else {
    throw std::invalid_argument("unknown weight family '" + name + "'");
  }
  expect_consumed(params, text);
  return w;
}

bool warn_if_non_lipschitz(const KernelSpec& spec, std::string_view role) {
  if (spec.lipschitz()) return false;
  std::cerr << "note: " << role << " kernel '" << spec.to_string()
            << "' is outside the Lipschitz analytical class\n";
  return true;
}

}  // namespace lfsim

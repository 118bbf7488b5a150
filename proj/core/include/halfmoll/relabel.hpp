#pragma once

#include <functional>
#include <string>

namespace halfmoll {

enum class RelabelKind { smooth_given, truncation, inverse };

// A C^1 relabeling sigma -> theta(sigma) with bounded derivative.
class RelabelFunction {
 public:
  using Scalar = std::function<double(double)>;

  RelabelFunction(RelabelKind kind, Scalar value, Scalar derivative, double derivative_bound, std::string name);

  // Caller-supplied theta and theta'; `derivative_bound` = sup |theta'|.
  static RelabelFunction smooth(Scalar value, Scalar derivative, double derivative_bound, std::string name);

  double operator()(double sigma) const { return value_(sigma); }
  double derivative(double sigma) const { return derivative_(sigma); }
  double derivative_bound() const noexcept { return derivative_bound_; }
  RelabelKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }

 private:
  RelabelKind kind_;
  Scalar value_;
  Scalar derivative_;
  double derivative_bound_;
  std::string name_;
};

RelabelFunction identity_relabel();
RelabelFunction tanh_relabel();

// (min(|s|, M))^p smoothed by the symmetric kernel of width eta_r and shifted
// so that theta(0) = 0. Derivative bounded by p M^(p-1).
RelabelFunction truncation_relabel(double cap, double eta_r, double p);

// Inverse of an increasing theta on [theta(-C), theta(C)], continued linearly
// with slope 1/theta'(+-C) beyond. Requires theta(0) = 0 and theta' > 0 on [-C, C].
RelabelFunction inverse_relabel(const RelabelFunction& theta, double bound);

}  // namespace halfmoll

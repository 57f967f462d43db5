#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "mmhdc/linalg.hpp"

namespace mmhdc {

enum class Optimizer { sgd, adam };

Optimizer parse_optimizer(const std::string& name);
std::string to_string(Optimizer opt);

/// Moment estimates for one parameter vector.
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t step = 0;
  Vector first_moment;
  Vector second_moment;
};

/// One bias-corrected Adam update of `params` in place.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> gradient, double lr);

/// params -= lr * gradient
void sgd_step(std::span<double> params, std::span<const double> gradient, double lr);

}  // namespace mmhdc

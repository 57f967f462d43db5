#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>

#include "mmhdc/linalg.hpp"

namespace mmhdc {

enum class Loss { hinge, squared_hinge };

Loss parse_loss(const std::string& name);
std::string to_string(Loss loss);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// 1/C, with C = infinity mapped to exactly 0.
inline double inverse_c(double C) { return std::isinf(C) ? 0.0 : 1.0 / C; }

/// (1 / 2C) |w|^2
inline double tikhonov_regularizer(std::span<const double> w, double C) {
  return 0.5 * inverse_c(C) * squared_norm(w);
}

/// [1 - m]_+ or its square.
inline double margin_loss(double slack, Loss loss) {
  const double z = slack > 0.0 ? slack : 0.0;
  return loss == Loss::hinge ? z : z * z;
}

}  // namespace mmhdc

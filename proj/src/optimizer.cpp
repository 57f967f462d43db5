#include "mmhdc/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace mmhdc {

Optimizer parse_optimizer(const std::string& name) {
  if (name == "sgd") return Optimizer::sgd;
  if (name == "adam") return Optimizer::adam;
  throw std::invalid_argument("unknown optimizer '" + name + "'");
}

std::string to_string(Optimizer opt) { return opt == Optimizer::adam ? "adam" : "sgd"; }

void adam_step(AdamState& state, std::span<double> params, std::span<const double> gradient, double lr) {
  if (!(lr > 0.0)) throw std::invalid_argument("adam learning rate must be positive");
  require_same_length(params.size(), gradient.size(), "adam_step");
  if (state.first_moment.empty()) {
    state.first_moment.assign(params.size(), 0.0);
    state.second_moment.assign(params.size(), 0.0);
  }
  require_same_length(state.first_moment.size(), params.size(), "adam_step state");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = gradient[i];
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g * g;
    params[i] -= lr * (m / c1) / (std::sqrt(v / c2) + state.epsilon);
  }
}

void sgd_step(std::span<double> params, std::span<const double> gradient, double lr) {
  require_same_length(params.size(), gradient.size(), "sgd_step");
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * gradient[i];
}

}  // namespace mmhdc

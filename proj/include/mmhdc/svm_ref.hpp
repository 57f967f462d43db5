#pragma once

// Reference linear soft-margin SVM, used both as a baseline and as an
// independent check on the prototype trainer.
//
// Objectives use the Tikhonov scaling (1/2C)|w|^2 + sum_i [1 - y_i(<x_i, w> - b)]_+.
// The classical form (1/2)|w|^2 + C sum_i zeta_i is C times this value, so
// the dual objective sum(lambda) - (1/2)|sum lambda_i y_i x_i|^2 is divided
// by C before it is reported.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mmhdc/hdc_core.hpp"
#include "mmhdc/loss.hpp"
#include "mmhdc/optimizer.hpp"

namespace mmhdc {

/// Decision rule sign(<x, w> - bias).
struct LinearModel {
  Vector w;
  double bias = 0.0;

  double decision(std::span<const double> x) const { return dot(x, w) - bias; }
  int predict(std::span<const double> x) const { return decision(x) >= 0.0 ? 1 : -1; }
  bool operator==(const LinearModel&) const = default;
};

double svm_primal_loss(const LinearModel& model, const Matrix& points, std::span<const int> labels, double C);

struct SvmConfig {
  double C = 500.0;
  double lr = 1e-4;
  std::size_t batch_size = 1000;
  std::size_t epochs = 20;
  Optimizer optimizer = Optimizer::adam;
  bool train_bias = false;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SvmEpoch {
  std::size_t epoch = 0;
  double objective = 0.0;
  double train_accuracy = 0.0;
};

struct SvmFitResult {
  LinearModel model;
  std::vector<SvmEpoch> trace;
};

/// Batched subgradient trainer on a subset of rows, starting from w = 0.
class SvmTrainer {
 public:
  SvmTrainer(SvmConfig config, std::size_t dim);

  void run_epoch(const Matrix& points, std::span<const int> labels, std::span<const std::size_t> rows);
  void step(const Matrix& points, std::span<const int> labels, std::span<const std::size_t> batch);

  const LinearModel& model() const { return model_; }

 private:
  SvmConfig config_;
  LinearModel model_;
  AdamState adam_w_;
  AdamState adam_b_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> order_;
};

/// Minimizes svm_primal_loss; epochs = 0 returns the zero model.
/// Throws NumericalError on divergence.
SvmFitResult svm_fit_primal(const Matrix& points, std::span<const int> labels, const SvmConfig& config);

double linear_accuracy(const LinearModel& model, const Matrix& points, std::span<const int> labels);

/// Small-instance dual solution with its optimality evidence.
struct DualCertificate {
  Vector lambda;
  Vector eta;  ///< C - lambda
  Vector w_reconstructed;  ///< sum_i lambda_i y_i x_i
  double C = 0.0;
  double dual_objective = 0.0;    ///< Tikhonov scale
  double primal_objective = 0.0;  ///< svm_primal_loss(w_reconstructed, b = 0)
  double gap = 0.0;
  double kkt_max_violation = 0.0;
  std::size_t sweeps = 0;
  bool converged = false;
  std::vector<double> dual_history;  ///< dual objective after each sweep
};

/// Cyclic coordinate ascent on the box-constrained dual (zero bias). Each
/// coordinate moves to its unconstrained maximizer clipped to [0, C]; points
/// with <x_i, x_i> == 0 are skipped. Stops once the largest change in a sweep
/// is below tol, or after max_sweeps.
DualCertificate svm_dual_solve(const Matrix& points, std::span<const int> labels, double C, double tol,
                               std::size_t max_sweeps);

struct KktReport {
  double max_violation = 0.0;
  Vector per_point;             ///< worst condition violated by each point
  double stationarity = 0.0;   ///< max |w_reconstructed - sum lambda_i y_i x_i|
  bool satisfied = false;
};

/// Box, complementary-slackness and stationarity checks. w is rebuilt from
/// cert.lambda, so edits to lambda alone are detected.
KktReport check_kkt(const DualCertificate& cert, const Matrix& points, std::span<const int> labels, double C,
                    double tol);

/// p+ = sum over class +1 of lambda_i x_i, p- likewise for class -1.
PrototypePair prototype_decomposition(const DualCertificate& cert, std::span<const int> labels,
                                      const Matrix& encoded);

/// Line-oriented text record of the certificate, for test logs.
std::string to_text(const DualCertificate& cert);

}  // namespace mmhdc

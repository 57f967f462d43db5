#pragma once

// Maximum-margin training of a binary HDC prototype pair.
//
// The prototypes minimize the Tikhonov form of the zero-bias soft-margin SVM
//
//   F(p+, p-) = (1 / 2C) |p+ - p-|^2 + sum_i L(1 - y_i <h_i, p+ - p->)
//
// with L the hinge [.]_+ or squared hinge [.]_+^2, by batched (sub)gradient
// descent. C = infinity drops the regularizer, which turns the hinge update
// into the summed perceptron rule.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "mmhdc/hdc_core.hpp"
#include "mmhdc/loss.hpp"
#include "mmhdc/optimizer.hpp"

namespace mmhdc {

struct MarginConfig {
  double C = 500.0;  ///< may be infinity
  double lr = 1e-5;
  std::size_t batch_size = 1000;
  std::size_t epochs = 20;
  Loss loss = Loss::hinge;
  Similarity similarity = Similarity::dot;
  Optimizer optimizer = Optimizer::sgd;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument unless C > 0, lr > 0 and batch_size >= 1.
  void validate() const;
};

/// Indices whose slack 1 - y<h, w> is strictly positive, split by label.
struct ViolationSets {
  std::vector<std::size_t> plus;
  std::vector<std::size_t> minus;
};

struct LossReport {
  double objective = 0.0;
  double regularizer = 0.0;
  double hinge_sum = 0.0;  ///< sum of L(slack); squared terms for squared hinge
  Vector slack;            ///< [1 - y_i <h_i, w>]_+ per point, in batch order
};

struct Gradient {
  Vector plus;
  Vector minus;
};

ViolationSets violation_sets(const PrototypePair& proto, const Matrix& encoded, std::span<const int> labels,
                             std::span<const std::size_t> batch);
ViolationSets violation_sets(const PrototypePair& proto, const Matrix& encoded, std::span<const int> labels);

LossReport objective(const PrototypePair& proto, const Matrix& encoded, std::span<const int> labels,
                     std::span<const std::size_t> batch, double C, Loss loss);
LossReport objective(const PrototypePair& proto, const Matrix& encoded, std::span<const int> labels, double C,
                     Loss loss);

/// dF/dp+ and dF/dp- over the batch. At slack exactly 0 the point contributes
/// nothing. minus is the exact negation of plus.
Gradient gradients(const PrototypePair& proto, const Matrix& encoded, std::span<const int> labels,
                   std::span<const std::size_t> batch, double C, Loss loss);
Gradient gradients(const PrototypePair& proto, const Matrix& encoded, std::span<const int> labels, double C,
                   Loss loss);

/// Adam moments for both prototypes, used when config.optimizer == adam.
struct PairAdamState {
  AdamState plus;
  AdamState minus;
};

/// p+ -= lr * g+, p- -= lr * g- (or the Adam equivalent), then the unit-norm
/// projection in cosine mode. Throws NumericalError on a non-finite result,
/// leaving `proto` untouched.
void train_step(PrototypePair& proto, const Matrix& encoded, std::span<const int> labels,
                std::span<const std::size_t> batch, const MarginConfig& config,
                PairAdamState* adam = nullptr);

struct EpochTrace {
  std::size_t epoch = 0;
  double objective = 0.0;
  double regularizer = 0.0;
  double hinge_sum = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> test_accuracy;
};

struct FitResult {
  PrototypePair prototypes;
  std::vector<EpochTrace> trace;
};

/// Epoch-wise trainer over a fixed subset of rows. Each epoch shuffles the
/// rows with the trainer's generator (seeded from config.seed once) and runs
/// train_step on consecutive batches of config.batch_size.
class MarginTrainer {
 public:
  MarginTrainer(MarginConfig config, PrototypePair init);

  void run_epoch(const Matrix& encoded, std::span<const int> labels, std::span<const std::size_t> rows);

  const PrototypePair& prototypes() const { return proto_; }
  const MarginConfig& config() const { return config_; }

 private:
  MarginConfig config_;
  PrototypePair proto_;
  PairAdamState adam_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> order_;
};

/// Fraction of rows where predict_binary matches the label.
double binary_accuracy(const PrototypePair& proto, const Matrix& encoded, std::span<const int> labels,
                       Similarity kind);

struct TestSet {
  const Matrix* encoded = nullptr;
  std::span<const int> labels;
};

/// Trains from `init` (class means when absent) for config.epochs epochs,
/// recording the full-set objective and accuracies after every epoch.
FitResult fit(const Matrix& encoded, std::span<const int> labels, const MarginConfig& config,
              std::optional<PrototypePair> init = std::nullopt, std::optional<TestSet> test = std::nullopt);

}  // namespace mmhdc

#include "mmhdc/mm_hdc.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace mmhdc {

Loss parse_loss(const std::string& name) {
  if (name == "hinge") return Loss::hinge;
  if (name == "sq-hinge" || name == "squared_hinge" || name == "squared-hinge") return Loss::squared_hinge;
  throw std::invalid_argument("unknown loss '" + name + "'");
}

std::string to_string(Loss loss) { return loss == Loss::squared_hinge ? "sq-hinge" : "hinge"; }

void MarginConfig::validate() const {
  if (!(C > 0.0)) throw std::invalid_argument("C must be positive");
  if (!(lr > 0.0) || std::isinf(lr)) throw std::invalid_argument("learning rate must be positive");
  if (batch_size == 0) throw std::invalid_argument("batch size must be at least 1");
}

namespace {

void check_inputs(const PrototypePair& proto, const Matrix& encoded, std::span<const int> labels) {
  require_same_length(encoded.rows(), labels.size(), "labels");
  require_same_length(encoded.cols(), proto.dim(), "prototype dimension");
}

}  // namespace

ViolationSets violation_sets(const PrototypePair& proto, const Matrix& encoded, std::span<const int> labels,
                             std::span<const std::size_t> batch) {
  check_inputs(proto, encoded, labels);
  const Vector w = proto.hyperplane();
  ViolationSets sets;
  for (std::size_t i : batch) {
    const double slack = 1.0 - labels[i] * dot(encoded.row(i), w);
    if (!(slack > 0.0)) continue;
    (labels[i] == 1 ? sets.plus : sets.minus).push_back(i);
  }
  return sets;
}

ViolationSets violation_sets(const PrototypePair& proto, const Matrix& encoded, std::span<const int> labels) {
  return violation_sets(proto, encoded, labels, all_rows(encoded.rows()));
}

LossReport objective(const PrototypePair& proto, const Matrix& encoded, std::span<const int> labels,
                     std::span<const std::size_t> batch, double C, Loss loss) {
  check_inputs(proto, encoded, labels);
  if (!(C > 0.0)) throw std::invalid_argument("C must be positive");
  const Vector w = proto.hyperplane();
  LossReport report;
  report.regularizer = tikhonov_regularizer(w, C);
  report.slack.reserve(batch.size());
  for (std::size_t i : batch) {
    const double slack = 1.0 - labels[i] * dot(encoded.row(i), w);
    report.slack.push_back(slack > 0.0 ? slack : 0.0);
    report.hinge_sum += margin_loss(slack, loss);
  }
  report.objective = report.regularizer + report.hinge_sum;
  return report;
}

LossReport objective(const PrototypePair& proto, const Matrix& encoded, std::span<const int> labels, double C,
                     Loss loss) {
  return objective(proto, encoded, labels, all_rows(encoded.rows()), C, loss);
}

Gradient gradients(const PrototypePair& proto, const Matrix& encoded, std::span<const int> labels,
                   std::span<const std::size_t> batch, double C, Loss loss) {
  check_inputs(proto, encoded, labels);
  if (!(C > 0.0)) throw std::invalid_argument("C must be positive");
  const std::size_t dim = proto.dim();
  const Vector w = proto.hyperplane();
  // Sums over the violation sets A+ and A-, weighted by 1 (hinge) or
  // 2 * slack (squared hinge).
  Vector sum_plus(dim, 0.0);
  Vector sum_minus(dim, 0.0);
  for (std::size_t i : batch) {
    const auto h = encoded.row(i);
    const double slack = 1.0 - labels[i] * dot(h, w);
    if (!(slack > 0.0)) continue;
    const double weight = loss == Loss::hinge ? 1.0 : 2.0 * slack;
    axpy(weight, h, labels[i] == 1 ? sum_plus : sum_minus);
  }
  const double inv_c = inverse_c(C);
  Gradient g{Vector(dim), Vector(dim)};
  for (std::size_t k = 0; k < dim; ++k) {
    g.plus[k] = inv_c * w[k] - (sum_plus[k] - sum_minus[k]);
    g.minus[k] = -g.plus[k];
  }
  return g;
}

Gradient gradients(const PrototypePair& proto, const Matrix& encoded, std::span<const int> labels, double C,
                   Loss loss) {
  return gradients(proto, encoded, labels, all_rows(encoded.rows()), C, loss);
}

void train_step(PrototypePair& proto, const Matrix& encoded, std::span<const int> labels,
                std::span<const std::size_t> batch, const MarginConfig& config, PairAdamState* adam) {
  const Gradient g = gradients(proto, encoded, labels, batch, config.C, config.loss);
  PrototypePair next = proto;
  if (config.optimizer == Optimizer::adam) {
    if (adam == nullptr) throw std::invalid_argument("adam optimizer needs a PairAdamState");
    adam_step(adam->plus, next.plus, g.plus, config.lr);
    adam_step(adam->minus, next.minus, g.minus, config.lr);
  } else {
    sgd_step(next.plus, g.plus, config.lr);
    sgd_step(next.minus, g.minus, config.lr);
  }
  if (config.similarity == Similarity::cosine) renormalize(next);
  if (!next.finite()) {
    std::ostringstream msg;
    msg << "non-finite prototype after train_step (lr=" << config.lr << ", C=" << config.C
        << ", batch=" << batch.size() << ", |g+|=" << norm(g.plus) << ")";
    throw NumericalError(msg.str());
  }
  proto = std::move(next);
}

MarginTrainer::MarginTrainer(MarginConfig config, PrototypePair init)
    : config_(config), proto_(std::move(init)), rng_(config.seed) {
  config_.validate();
}

void MarginTrainer::run_epoch(const Matrix& encoded, std::span<const int> labels,
                              std::span<const std::size_t> rows) {
  order_.assign(rows.begin(), rows.end());
  std::shuffle(order_.begin(), order_.end(), rng_);
  for (std::size_t start = 0; start < order_.size(); start += config_.batch_size) {
    const std::size_t len = std::min(config_.batch_size, order_.size() - start);
    train_step(proto_, encoded, labels, std::span(order_).subspan(start, len), config_, &adam_);
  }
}

double binary_accuracy(const PrototypePair& proto, const Matrix& encoded, std::span<const int> labels,
                       Similarity kind) {
  require_same_length(encoded.rows(), labels.size(), "labels");
  if (encoded.rows() == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < encoded.rows(); ++i) {
    if (predict_binary(proto, encoded.row(i), kind) == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(encoded.rows());
}

FitResult fit(const Matrix& encoded, std::span<const int> labels, const MarginConfig& config,
              std::optional<PrototypePair> init, std::optional<TestSet> test) {
  config.validate();
  PrototypePair start = init ? std::move(*init) : init_prototypes(encoded, labels);
  require_same_length(start.dim(), encoded.cols(), "initial prototypes");
  MarginTrainer trainer(config, std::move(start));
  const auto rows = all_rows(encoded.rows());

  FitResult result;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    trainer.run_epoch(encoded, labels, rows);
    const LossReport report = objective(trainer.prototypes(), encoded, labels, config.C, config.loss);
    EpochTrace t;
    t.epoch = epoch;
    t.objective = report.objective;
    t.regularizer = report.regularizer;
    t.hinge_sum = report.hinge_sum;
    t.train_accuracy = binary_accuracy(trainer.prototypes(), encoded, labels, config.similarity);
    if (test && test->encoded != nullptr) {
      t.test_accuracy = binary_accuracy(trainer.prototypes(), *test->encoded, test->labels, config.similarity);
    }
    result.trace.push_back(t);
  }
  result.prototypes = trainer.prototypes();
  return result;
}

}  // namespace mmhdc

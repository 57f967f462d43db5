#include "mmhdc/svm_ref.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace mmhdc {

namespace {

void check_binary(const Matrix& points, std::span<const int> labels) {
  require_same_length(points.rows(), labels.size(), "labels");
  for (int y : labels) {
    if (y != 1 && y != -1) throw std::invalid_argument("binary labels must be -1 or +1");
  }
}

}  // namespace

double svm_primal_loss(const LinearModel& model, const Matrix& points, std::span<const int> labels, double C) {
  if (!(C > 0.0)) throw std::invalid_argument("C must be positive");
  require_same_length(points.rows(), labels.size(), "labels");
  require_same_length(points.cols(), model.w.size(), "model dimension");
  double hinge = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const double slack = 1.0 - labels[i] * model.decision(points.row(i));
    hinge += margin_loss(slack, Loss::hinge);
  }
  return tikhonov_regularizer(model.w, C) + hinge;
}

void SvmConfig::validate() const {
  if (!(C > 0.0)) throw std::invalid_argument("C must be positive");
  if (!(lr > 0.0) || std::isinf(lr)) throw std::invalid_argument("learning rate must be positive");
  if (batch_size == 0) throw std::invalid_argument("batch size must be at least 1");
}

SvmTrainer::SvmTrainer(SvmConfig config, std::size_t dim) : config_(config), rng_(config.seed) {
  config_.validate();
  model_.w.assign(dim, 0.0);
}

void SvmTrainer::step(const Matrix& points, std::span<const int> labels, std::span<const std::size_t> batch) {
  const std::size_t dim = model_.w.size();
  Vector g(dim, 0.0);
  double g_bias = 0.0;
  for (std::size_t i : batch) {
    const auto x = points.row(i);
    const double y = labels[i];
    if (!(1.0 - y * model_.decision(x) > 0.0)) continue;
    axpy(-y, x, g);
    g_bias += y;
  }
  const double inv_c = inverse_c(config_.C);
  axpy(inv_c, model_.w, g);

  LinearModel next = model_;
  if (config_.optimizer == Optimizer::adam) {
    adam_step(adam_w_, next.w, g, config_.lr);
    if (config_.train_bias) adam_step(adam_b_, std::span(&next.bias, 1), std::span(&g_bias, 1), config_.lr);
  } else {
    sgd_step(next.w, g, config_.lr);
    if (config_.train_bias) next.bias -= config_.lr * g_bias;
  }
  if (!all_finite(next.w) || !std::isfinite(next.bias)) {
    std::ostringstream msg;
    msg << "svm training diverged (lr=" << config_.lr << ", C=" << config_.C << ", |g|=" << norm(g) << ")";
    throw NumericalError(msg.str());
  }
  model_ = std::move(next);
}

void SvmTrainer::run_epoch(const Matrix& points, std::span<const int> labels, std::span<const std::size_t> rows) {
  require_same_length(points.rows(), labels.size(), "labels");
  require_same_length(points.cols(), model_.w.size(), "model dimension");
  order_.assign(rows.begin(), rows.end());
  std::shuffle(order_.begin(), order_.end(), rng_);
  for (std::size_t start = 0; start < order_.size(); start += config_.batch_size) {
    const std::size_t len = std::min(config_.batch_size, order_.size() - start);
    step(points, labels, std::span(order_).subspan(start, len));
  }
}

double linear_accuracy(const LinearModel& model, const Matrix& points, std::span<const int> labels) {
  require_same_length(points.rows(), labels.size(), "labels");
  if (points.rows() == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    if (model.predict(points.row(i)) == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(points.rows());
}

SvmFitResult svm_fit_primal(const Matrix& points, std::span<const int> labels, const SvmConfig& config) {
  check_binary(points, labels);
  const bool has_plus = std::find(labels.begin(), labels.end(), 1) != labels.end();
  const bool has_minus = std::find(labels.begin(), labels.end(), -1) != labels.end();
  if (!has_plus || !has_minus) throw std::invalid_argument("svm_fit_primal needs both classes");

  SvmTrainer trainer(config, points.cols());
  const auto rows = all_rows(points.rows());
  SvmFitResult result;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    trainer.run_epoch(points, labels, rows);
    result.trace.push_back({epoch, svm_primal_loss(trainer.model(), points, labels, config.C),
                            linear_accuracy(trainer.model(), points, labels)});
  }
  result.model = trainer.model();
  return result;
}

namespace {

Vector reconstruct_w(std::span<const double> lambda, const Matrix& points, std::span<const int> labels) {
  Vector w(points.cols(), 0.0);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    if (lambda[i] != 0.0) axpy(lambda[i] * labels[i], points.row(i), w);
  }
  return w;
}

double dual_value(std::span<const double> lambda, std::span<const double> w) {
  double sum = 0.0;
  for (double l : lambda) sum += l;
  return sum - 0.5 * squared_norm(w);
}

}  // namespace

DualCertificate svm_dual_solve(const Matrix& points, std::span<const int> labels, double C, double tol,
                               std::size_t max_sweeps) {
  check_binary(points, labels);
  if (!(C > 0.0) || std::isinf(C)) throw std::invalid_argument("dual solver needs a finite C > 0");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (points.rows() > 10000) throw std::invalid_argument("dual oracle is limited to N <= 10000");

  const std::size_t n = points.rows();
  Vector q(n);
  for (std::size_t i = 0; i < n; ++i) q[i] = squared_norm(points.row(i));

  DualCertificate cert;
  cert.C = C;
  cert.lambda.assign(n, 0.0);
  Vector w(points.cols(), 0.0);
  while (cert.sweeps < max_sweeps) {
    double max_change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (q[i] == 0.0) continue;
      const auto x = points.row(i);
      const double y = labels[i];
      const double grad = y * dot(x, w) - 1.0;
      const double updated = std::clamp(cert.lambda[i] - grad / q[i], 0.0, C);
      const double delta = updated - cert.lambda[i];
      if (delta == 0.0) continue;
      cert.lambda[i] = updated;
      axpy(delta * y, x, w);
      max_change = std::max(max_change, std::abs(delta));
    }
    ++cert.sweeps;
    cert.dual_history.push_back(dual_value(cert.lambda, w) / C);
    if (max_change < tol) {
      cert.converged = true;
      break;
    }
  }

  cert.eta.resize(n);
  for (std::size_t i = 0; i < n; ++i) cert.eta[i] = C - cert.lambda[i];
  cert.w_reconstructed = reconstruct_w(cert.lambda, points, labels);
  cert.dual_objective = dual_value(cert.lambda, cert.w_reconstructed) / C;
  cert.primal_objective = svm_primal_loss(LinearModel{cert.w_reconstructed, 0.0}, points, labels, C);
  cert.gap = cert.primal_objective - cert.dual_objective;
  cert.kkt_max_violation = check_kkt(cert, points, labels, C, tol).max_violation;
  return cert;
}

KktReport check_kkt(const DualCertificate& cert, const Matrix& points, std::span<const int> labels, double C,
                    double tol) {
  check_binary(points, labels);
  require_same_length(cert.lambda.size(), points.rows(), "certificate lambda");
  const Vector w = reconstruct_w(cert.lambda, points, labels);

  KktReport report;
  if (cert.w_reconstructed.size() == w.size()) {
    for (std::size_t k = 0; k < w.size(); ++k) {
      report.stationarity = std::max(report.stationarity, std::abs(cert.w_reconstructed[k] - w[k]));
    }
  } else {
    report.stationarity = kInfinity;
  }

  report.per_point.assign(points.rows(), 0.0);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    const double lambda = cert.lambda[i];
    const double margin = labels[i] * dot(points.row(i), w);
    double v = std::max({0.0, -lambda, lambda - C});
    if (lambda <= 0.0) {
      v = std::max(v, 1.0 - margin);
    } else if (lambda >= C) {
      v = std::max(v, margin - 1.0);
    } else {
      v = std::max(v, std::abs(margin - 1.0));
    }
    report.per_point[i] = v;
    report.max_violation = std::max(report.max_violation, v);
  }
  report.max_violation = std::max(report.max_violation, report.stationarity);
  report.satisfied = report.max_violation <= tol;
  return report;
}

PrototypePair prototype_decomposition(const DualCertificate& cert, std::span<const int> labels,
                                      const Matrix& encoded) {
  check_binary(encoded, labels);
  require_same_length(cert.lambda.size(), encoded.rows(), "certificate lambda");
  PrototypePair proto(encoded.cols());
  for (std::size_t i = 0; i < encoded.rows(); ++i) {
    if (cert.lambda[i] == 0.0) continue;
    axpy(cert.lambda[i], encoded.row(i), labels[i] == 1 ? proto.plus : proto.minus);
  }
  return proto;
}

std::string to_text(const DualCertificate& cert) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "C " << cert.C << '\n';
  out << "sweeps " << cert.sweeps << '\n';
  out << "converged " << (cert.converged ? 1 : 0) << '\n';
  out << "primal_objective " << cert.primal_objective << '\n';
  out << "dual_objective " << cert.dual_objective << '\n';
  out << "gap " << cert.gap << '\n';
  out << "kkt_max_violation " << cert.kkt_max_violation << '\n';
  out << "lambda";
  for (double l : cert.lambda) out << ' ' << l;
  out << '\n';
  out << "w";
  for (double v : cert.w_reconstructed) out << ' ' << v;
  out << '\n';
  return out.str();
}

}  // namespace mmhdc

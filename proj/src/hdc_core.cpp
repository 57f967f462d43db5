#include "mmhdc/hdc_core.hpp"

#include <numeric>
#include <stdexcept>

namespace mmhdc {

Similarity parse_similarity(const std::string& name) {
  if (name == "dot") return Similarity::dot;
  if (name == "cosine") return Similarity::cosine;
  throw std::invalid_argument("unknown similarity '" + name + "'");
}

std::string to_string(Similarity sim) { return sim == Similarity::cosine ? "cosine" : "dot"; }

PrototypePair::PrototypePair(Vector p, Vector m) : plus(std::move(p)), minus(std::move(m)) {
  require_same_length(plus.size(), minus.size(), "prototype pair");
}

void LabeledSet::validate() const {
  if (points.rows() == 0) throw std::invalid_argument("labeled set is empty");
  require_same_length(points.rows(), labels.size(), "labeled set labels");
  for (int y : labels) {
    if (y != 1 && y != -1) throw std::invalid_argument("binary labels must be -1 or +1");
  }
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

PrototypePair init_prototypes(const Matrix& encoded, std::span<const int> labels) {
  return init_prototypes(encoded, labels, all_rows(encoded.rows()));
}

PrototypePair init_prototypes(const Matrix& encoded, std::span<const int> labels,
                              std::span<const std::size_t> rows) {
  require_same_length(encoded.rows(), labels.size(), "init_prototypes labels");
  PrototypePair proto(encoded.cols());
  std::size_t n_plus = 0, n_minus = 0;
  for (std::size_t i : rows) {
    if (labels[i] == 1) {
      axpy(1.0, encoded.row(i), proto.plus);
      ++n_plus;
    } else if (labels[i] == -1) {
      axpy(1.0, encoded.row(i), proto.minus);
      ++n_minus;
    } else {
      throw std::invalid_argument("binary labels must be -1 or +1");
    }
  }
  if (n_plus == 0 || n_minus == 0) {
    throw std::invalid_argument("init_prototypes needs points from both classes");
  }
  for (double& v : proto.plus) v /= static_cast<double>(n_plus);
  for (double& v : proto.minus) v /= static_cast<double>(n_minus);
  return proto;
}

double similarity(std::span<const double> a, std::span<const double> b, Similarity kind) {
  const double d = dot(a, b);
  if (kind == Similarity::dot) return d;
  const double na = norm(a);
  const double nb = norm(b);
  if (na <= kNormEpsilon || nb <= kNormEpsilon) return 0.0;
  return d / (na * nb);
}

double decision_score(const PrototypePair& proto, std::span<const double> h, Similarity kind) {
  return similarity(h, proto.plus, kind) - similarity(h, proto.minus, kind);
}

int predict_binary(const PrototypePair& proto, std::span<const double> h, Similarity kind) {
  return similarity(h, proto.plus, kind) >= similarity(h, proto.minus, kind) ? 1 : -1;
}

double margin_score(const PrototypePair& proto, std::span<const double> h) {
  return decision_score(proto, h, Similarity::dot);
}

std::size_t perceptron_epoch(PrototypePair& proto, const Matrix& encoded, std::span<const int> labels,
                             std::span<const std::size_t> batch, double lr, Similarity kind) {
  if (!(lr >= 0.0 && lr <= 1.0)) throw std::invalid_argument("perceptron learning rate must lie in [0, 1]");
  require_same_length(encoded.rows(), labels.size(), "perceptron_epoch labels");
  require_same_length(encoded.cols(), proto.dim(), "perceptron_epoch dimension");
  std::size_t mistakes = 0;
  for (std::size_t i : batch) {
    const auto h = encoded.row(i);
    const int y = labels[i];
    if (predict_binary(proto, h, kind) == y) continue;
    ++mistakes;
    auto& truth = y == 1 ? proto.plus : proto.minus;
    auto& wrong = y == 1 ? proto.minus : proto.plus;
    axpy(lr, h, truth);
    axpy(-lr, h, wrong);
  }
  return mistakes;
}

std::size_t perceptron_epoch(PrototypePair& proto, const Matrix& encoded, std::span<const int> labels,
                             double lr, Similarity kind) {
  return perceptron_epoch(proto, encoded, labels, all_rows(encoded.rows()), lr, kind);
}

std::size_t onlinehd_epoch(PrototypePair& proto, const Matrix& encoded, std::span<const int> labels,
                           std::span<const std::size_t> batch, double lr) {
  if (!(lr >= 0.0 && lr <= 1.0)) throw std::invalid_argument("onlinehd learning rate must lie in [0, 1]");
  require_same_length(encoded.rows(), labels.size(), "onlinehd_epoch labels");
  require_same_length(encoded.cols(), proto.dim(), "onlinehd_epoch dimension");
  std::size_t updates = 0;
  for (std::size_t i : batch) {
    const auto h = encoded.row(i);
    const double y = labels[i];
    const double slack = 1.0 - y * margin_score(proto, h);
    if (!(slack > 0.0)) continue;
    ++updates;
    const double step = lr * 2.0 * slack * y;
    axpy(step, h, proto.plus);
    axpy(-step, h, proto.minus);
  }
  return updates;
}

std::size_t onlinehd_epoch(PrototypePair& proto, const Matrix& encoded, std::span<const int> labels,
                           double lr) {
  return onlinehd_epoch(proto, encoded, labels, all_rows(encoded.rows()), lr);
}

void renormalize(PrototypePair& proto) {
  normalize_l2_inplace(proto.plus);
  normalize_l2_inplace(proto.minus);
}

}  // namespace mmhdc

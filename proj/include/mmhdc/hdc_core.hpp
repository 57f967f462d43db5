#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mmhdc/encoding.hpp"
#include "mmhdc/linalg.hpp"

namespace mmhdc {

enum class Similarity { dot, cosine };

Similarity parse_similarity(const std::string& name);
std::string to_string(Similarity sim);

/// Class prototypes of a binary HDC model. The separating hyperplane is
/// w = plus - minus.
struct PrototypePair {
  Vector plus;
  Vector minus;

  PrototypePair() = default;
  explicit PrototypePair(std::size_t dim) : plus(dim, 0.0), minus(dim, 0.0) {}
  PrototypePair(Vector p, Vector m);

  std::size_t dim() const { return plus.size(); }
  Vector hyperplane() const { return subtract(plus, minus); }
  bool finite() const { return all_finite(plus) && all_finite(minus); }

  bool operator==(const PrototypePair&) const = default;
};

/// N points with binary labels in {-1, +1}.
struct LabeledSet {
  Matrix points;
  std::vector<int> labels;

  /// Throws std::invalid_argument unless N >= 1 and every label is +-1.
  void validate() const;
};

/// Row indices 0..n-1.
std::vector<std::size_t> all_rows(std::size_t n);

/// Class means of the encoded points (bundling with a_j = 1/|C_i|).
/// Throws std::invalid_argument if either class is empty.
PrototypePair init_prototypes(const Matrix& encoded, std::span<const int> labels);
PrototypePair init_prototypes(const Matrix& encoded, std::span<const int> labels,
                              std::span<const std::size_t> rows);

/// Dot product or cosine similarity; cosine is 0 when either norm <= 1e-12.
double similarity(std::span<const double> a, std::span<const double> b, Similarity kind);

/// argmax similarity between the two prototypes. Equal similarity gives +1.
int predict_binary(const PrototypePair& proto, std::span<const double> h, Similarity kind);

/// <h, plus> - <h, minus>: the unsigned functional margin under dot similarity.
/// Computed from the two similarities so its sign matches predict_binary exactly.
double margin_score(const PrototypePair& proto, std::span<const double> h);

/// Signed decision value for the given similarity (sim to plus minus sim to minus).
double decision_score(const PrototypePair& proto, std::span<const double> h, Similarity kind);

/// One pass of perceptron retraining over `batch` in order. For each point
/// misclassified by the current prototypes: p_true += lr*h, p_pred -= lr*h.
/// Returns the number of mistakes.
std::size_t perceptron_epoch(PrototypePair& proto, const Matrix& encoded, std::span<const int> labels,
                             std::span<const std::size_t> batch, double lr,
                             Similarity kind = Similarity::dot);
std::size_t perceptron_epoch(PrototypePair& proto, const Matrix& encoded, std::span<const int> labels,
                             double lr, Similarity kind = Similarity::dot);

/// OnlineHD-style retraining: online squared-hinge steps with C = infinity.
/// A point with slack s = 1 - y<h, w> > 0 moves both prototypes by
/// lr * 2s * y * h (plus gains, minus loses). Returns the number of updated points.
std::size_t onlinehd_epoch(PrototypePair& proto, const Matrix& encoded, std::span<const int> labels,
                           std::span<const std::size_t> batch, double lr);
std::size_t onlinehd_epoch(PrototypePair& proto, const Matrix& encoded, std::span<const int> labels,
                           double lr);

/// Scales each prototype to unit l2 norm; a zero prototype is left as is.
void renormalize(PrototypePair& proto);

}  // namespace mmhdc

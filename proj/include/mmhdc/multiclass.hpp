#pragma once

// One-vs-one reduction: K(K-1)/2 binary models, one per class pair (a < b),
// where class a is mapped to +1 and class b to -1. All pairs share one encoder.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mmhdc/encoding.hpp"
#include "mmhdc/hdc_core.hpp"
#include "mmhdc/loss.hpp"
#include "mmhdc/optimizer.hpp"
#include "mmhdc/svm_ref.hpp"

namespace mmhdc {

enum class Method { mm_hdc, perceptron, onlinehd, svm };

Method parse_method(const std::string& name);
std::string to_string(Method method);

using BinaryModel = std::variant<PrototypePair, LinearModel>;

struct ClassPair {
  int a = 0;
  int b = 0;
  bool operator==(const ClassPair&) const = default;
};

/// Lexicographically sorted (a, b) with a < b.
std::vector<ClassPair> class_pairs(std::size_t num_classes);

/// Hyperparameters shared by every pair model.
struct TrainSettings {
  Method method = Method::mm_hdc;
  double lr = 1e-5;
  double C = 500.0;
  std::size_t batch_size = 1000;
  Loss loss = Loss::hinge;
  Similarity similarity = Similarity::dot;
  Optimizer optimizer = Optimizer::sgd;
  bool renormalize_baselines = true;  ///< unit-norm prototypes after each perceptron/OnlineHD batch
  bool train_bias = false;            ///< svm only
  std::uint64_t seed = 0;
  unsigned threads = 0;  ///< 0 = hardware concurrency; results do not depend on it
};

/// Decision value of a pair model; >= 0 votes for class a.
double pair_score(const BinaryModel& model, std::span<const double> h, Similarity sim);

struct VoteResult {
  int winner = 0;
  std::vector<std::size_t> votes;
  std::vector<double> margin_sum;  ///< summed pair scores in each class's favour
};

class OvOEnsemble {
 public:
  OvOEnsemble() = default;
  OvOEnsemble(std::size_t num_classes, std::vector<BinaryModel> models, std::shared_ptr<const Encoder> encoder,
              Similarity similarity, Method method);

  std::size_t num_classes() const { return num_classes_; }
  const std::vector<ClassPair>& pairs() const { return pairs_; }
  const std::vector<BinaryModel>& models() const { return models_; }
  const Encoder& encoder() const { return *encoder_; }
  std::shared_ptr<const Encoder> shared_encoder() const { return encoder_; }
  Similarity similarity() const { return similarity_; }
  Method method() const { return method_; }

  /// Plurality vote; ties go to the larger summed margin, then the smaller id.
  VoteResult vote(std::span<const double> h) const;
  int predict_encoded(std::span<const double> h) const { return vote(h).winner; }

  /// Encodes x once with `encode` (any callable span -> HyperVector) and votes.
  template <class EncodeFn>
  int predict_with(std::span<const double> x, EncodeFn&& encode) const {
    const HyperVector h = encode(x);
    return predict_encoded(h);
  }

  std::vector<int> predict_batch_encoded(const Matrix& encoded) const;

  void save(std::ostream& out) const;
  static OvOEnsemble load(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static OvOEnsemble load(const std::filesystem::path& path);

 private:
  std::size_t num_classes_ = 0;
  std::vector<ClassPair> pairs_;
  std::vector<BinaryModel> models_;
  std::shared_ptr<const Encoder> encoder_;
  Similarity similarity_ = Similarity::dot;
  Method method_ = Method::mm_hdc;
};

int ovo_predict(const OvOEnsemble& ensemble, std::span<const double> x);

/// Epoch-wise binary trainer for one class pair.
class BinaryTrainer {
 public:
  virtual ~BinaryTrainer() = default;
  virtual void run_epoch(const Matrix& encoded, std::span<const int> labels, std::span<const std::size_t> rows) = 0;
  virtual BinaryModel model() const = 0;
};

std::unique_ptr<BinaryTrainer> make_binary_trainer(const TrainSettings& settings, const Matrix& encoded,
                                                   std::span<const int> labels, std::span<const std::size_t> rows,
                                                   std::uint64_t seed);

/// Summed objective over all pair models (Tikhonov hinge form with settings.C
/// and settings.loss, evaluated on each pair's training rows).
struct ObjectiveSum {
  double objective = 0.0;
  double regularizer = 0.0;
  double hinge_sum = 0.0;
};

/// Trains all pair models epoch by epoch over a shared encoded training set.
/// Pairs are independent, so parallel execution gives identical results.
class OvOTrainer {
 public:
  OvOTrainer(const Matrix& encoded, std::span<const int> labels, std::size_t num_classes, TrainSettings settings);

  void run_epoch();
  std::vector<BinaryModel> models() const;
  OvOEnsemble ensemble(std::shared_ptr<const Encoder> encoder) const;
  ObjectiveSum objective() const;

  std::size_t num_classes() const { return num_classes_; }
  const std::vector<ClassPair>& pairs() const { return pairs_; }
  /// Training rows used by pair p (only classes a and b).
  std::span<const std::size_t> pair_rows(std::size_t p) const { return states_[p].rows; }
  /// +1 for class a, -1 for class b, 0 elsewhere; indexed by training row.
  std::span<const int> pair_labels(std::size_t p) const { return states_[p].labels; }

 private:
  struct PairState {
    std::vector<std::size_t> rows;
    std::vector<int> labels;
    std::unique_ptr<BinaryTrainer> trainer;
  };

  const Matrix& encoded_;
  std::size_t num_classes_;
  TrainSettings settings_;
  std::vector<ClassPair> pairs_;
  std::vector<PairState> states_;
};

/// Encodes `points` once with the shared encoder and trains every pair for
/// `epochs` epochs. Labels must lie in 0..K-1 with every class present.
OvOEnsemble ovo_fit(const Matrix& points, std::span<const int> labels, std::size_t num_classes,
                    std::shared_ptr<const Encoder> encoder, const TrainSettings& settings, std::size_t epochs);

/// Per-stream seed derived from a base seed (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace mmhdc

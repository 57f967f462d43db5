#include "mmhdc/multiclass.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <stdexcept>

#include "binary_io.hpp"
#include "mmhdc/mm_hdc.hpp"

namespace mmhdc {

Method parse_method(const std::string& name) {
  if (name == "mm-hdc" || name == "mm_hdc") return Method::mm_hdc;
  if (name == "perceptron") return Method::perceptron;
  if (name == "onlinehd") return Method::onlinehd;
  if (name == "svm") return Method::svm;
  throw std::invalid_argument("unknown method '" + name + "'");
}

std::string to_string(Method method) {
  switch (method) {
    case Method::mm_hdc: return "mm-hdc";
    case Method::perceptron: return "perceptron";
    case Method::onlinehd: return "onlinehd";
    case Method::svm: return "svm";
  }
  return "unknown";
}

std::vector<ClassPair> class_pairs(std::size_t num_classes) {
  std::vector<ClassPair> pairs;
  for (std::size_t a = 0; a < num_classes; ++a) {
    for (std::size_t b = a + 1; b < num_classes; ++b) pairs.push_back({static_cast<int>(a), static_cast<int>(b)});
  }
  return pairs;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double pair_score(const BinaryModel& model, std::span<const double> h, Similarity sim) {
  if (const auto* proto = std::get_if<PrototypePair>(&model)) return decision_score(*proto, h, sim);
  return std::get<LinearModel>(model).decision(h);
}

OvOEnsemble::OvOEnsemble(std::size_t num_classes, std::vector<BinaryModel> models,
                         std::shared_ptr<const Encoder> encoder, Similarity similarity, Method method)
    : num_classes_(num_classes),
      pairs_(class_pairs(num_classes)),
      models_(std::move(models)),
      encoder_(std::move(encoder)),
      similarity_(similarity),
      method_(method) {
  if (num_classes_ < 2) throw std::invalid_argument("an OvO ensemble needs at least two classes");
  require_same_length(models_.size(), pairs_.size(), "OvO pair models");
  if (!encoder_) throw std::invalid_argument("OvO ensemble needs an encoder");
}

VoteResult OvOEnsemble::vote(std::span<const double> h) const {
  VoteResult r;
  r.votes.assign(num_classes_, 0);
  r.margin_sum.assign(num_classes_, 0.0);
  for (std::size_t p = 0; p < pairs_.size(); ++p) {
    const double s = pair_score(models_[p], h, similarity_);
    const auto [a, b] = pairs_[p];
    ++r.votes[s >= 0.0 ? a : b];
    r.margin_sum[a] += s;
    r.margin_sum[b] -= s;
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < num_classes_; ++c) {
    if (r.votes[c] > r.votes[best] ||
        (r.votes[c] == r.votes[best] && r.margin_sum[c] > r.margin_sum[best])) {
      best = c;
    }
  }
  r.winner = static_cast<int>(best);
  return r;
}

std::vector<int> OvOEnsemble::predict_batch_encoded(const Matrix& encoded) const {
  std::vector<int> out(encoded.rows());
  parallel_for(encoded.rows(), [&](std::size_t i) { out[i] = predict_encoded(encoded.row(i)); });
  return out;
}

int ovo_predict(const OvOEnsemble& ensemble, std::span<const double> x) {
  return ensemble.predict_with(x, [&](std::span<const double> v) { return ensemble.encoder().encode(v); });
}

namespace {

constexpr char kMagic[8] = {'M', 'M', 'H', 'D', 'C', 'O', 'V', 'O'};
constexpr std::uint64_t kVersion = 1;
constexpr std::uint64_t kPrototypeTag = 0;
constexpr std::uint64_t kLinearTag = 1;

}  // namespace

void OvOEnsemble::save(std::ostream& out) const {
  out.write(kMagic, sizeof kMagic);
  detail::write_u64(out, kVersion);
  detail::write_u64(out, num_classes_);
  detail::write_u64(out, static_cast<std::uint64_t>(method_));
  detail::write_u64(out, static_cast<std::uint64_t>(similarity_));
  detail::write_u64(out, pairs_.size());
  for (const auto& [a, b] : pairs_) {
    detail::write_u64(out, static_cast<std::uint64_t>(a));
    detail::write_u64(out, static_cast<std::uint64_t>(b));
  }
  encoder_->save(out);
  for (const auto& model : models_) {
    if (const auto* proto = std::get_if<PrototypePair>(&model)) {
      detail::write_u64(out, kPrototypeTag);
      detail::write_u64(out, proto->dim());
      detail::write_f64s(out, proto->plus);
      detail::write_f64s(out, proto->minus);
    } else {
      const auto& lin = std::get<LinearModel>(model);
      detail::write_u64(out, kLinearTag);
      detail::write_u64(out, lin.w.size());
      detail::write_f64(out, lin.bias);
      detail::write_f64s(out, lin.w);
    }
  }
  if (!out) throw std::runtime_error("failed writing OvO model");
}

OvOEnsemble OvOEnsemble::load(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof magic) || !std::equal(magic, magic + 8, kMagic)) {
    throw detail::FormatError("not an OvO model file (bad magic)");
  }
  if (detail::read_u64(in) != kVersion) throw detail::FormatError("unsupported model file version");
  const auto k = detail::read_u64(in);
  const auto method = detail::read_u64(in);
  const auto sim = detail::read_u64(in);
  const auto npairs = detail::read_u64(in);
  if (k < 2 || k > 100000 || method > 3 || sim > 1 || npairs != k * (k - 1) / 2) {
    throw detail::FormatError("corrupt OvO model header");
  }
  const auto expected = class_pairs(k);
  for (std::size_t p = 0; p < npairs; ++p) {
    const auto a = detail::read_u64(in);
    const auto b = detail::read_u64(in);
    if (static_cast<int>(a) != expected[p].a || static_cast<int>(b) != expected[p].b) {
      throw detail::FormatError("corrupt OvO pair table");
    }
  }
  auto encoder = std::make_shared<const Encoder>(Encoder::load(in));
  std::vector<BinaryModel> models;
  models.reserve(npairs);
  for (std::size_t p = 0; p < npairs; ++p) {
    const auto tag = detail::read_u64(in);
    const auto dim = detail::read_u64(in);
    if (dim != encoder->output_dim()) throw detail::FormatError("pair model dimension does not match encoder");
    if (tag == kPrototypeTag) {
      Vector plus = detail::read_f64s(in, dim);
      Vector minus = detail::read_f64s(in, dim);
      models.emplace_back(PrototypePair(std::move(plus), std::move(minus)));
    } else if (tag == kLinearTag) {
      LinearModel lin;
      lin.bias = detail::read_f64(in);
      lin.w = detail::read_f64s(in, dim);
      models.emplace_back(std::move(lin));
    } else {
      throw detail::FormatError("unknown pair model tag");
    }
  }
  return OvOEnsemble(k, std::move(models), std::move(encoder), static_cast<Similarity>(sim),
                     static_cast<Method>(method));
}

void OvOEnsemble::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  save(out);
}

OvOEnsemble OvOEnsemble::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return load(in);
}

namespace {

class MarginPairTrainer final : public BinaryTrainer {
 public:
  MarginPairTrainer(const MarginConfig& config, PrototypePair init) : trainer_(config, std::move(init)) {}
  void run_epoch(const Matrix& encoded, std::span<const int> labels, std::span<const std::size_t> rows) override {
    trainer_.run_epoch(encoded, labels, rows);
  }
  BinaryModel model() const override { return trainer_.prototypes(); }

 private:
  MarginTrainer trainer_;
};

// Perceptron and OnlineHD retraining: online updates within shuffled batches,
// prototypes optionally renormalized after each batch.
class BaselinePairTrainer final : public BinaryTrainer {
 public:
  BaselinePairTrainer(const TrainSettings& s, PrototypePair init, std::uint64_t seed)
      : settings_(s), proto_(std::move(init)), rng_(seed) {}

  void run_epoch(const Matrix& encoded, std::span<const int> labels, std::span<const std::size_t> rows) override {
    order_.assign(rows.begin(), rows.end());
    std::shuffle(order_.begin(), order_.end(), rng_);
    for (std::size_t start = 0; start < order_.size(); start += settings_.batch_size) {
      const auto batch = std::span(order_).subspan(start, std::min(settings_.batch_size, order_.size() - start));
      if (settings_.method == Method::perceptron) {
        perceptron_epoch(proto_, encoded, labels, batch, settings_.lr, settings_.similarity);
      } else {
        onlinehd_epoch(proto_, encoded, labels, batch, settings_.lr);
      }
      if (settings_.renormalize_baselines) renormalize(proto_);
      if (!proto_.finite()) throw NumericalError("non-finite prototype in " + to_string(settings_.method));
    }
  }
  BinaryModel model() const override { return proto_; }

 private:
  TrainSettings settings_;
  PrototypePair proto_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> order_;
};

class SvmPairTrainer final : public BinaryTrainer {
 public:
  SvmPairTrainer(const SvmConfig& config, std::size_t dim) : trainer_(config, dim) {}
  void run_epoch(const Matrix& encoded, std::span<const int> labels, std::span<const std::size_t> rows) override {
    trainer_.run_epoch(encoded, labels, rows);
  }
  BinaryModel model() const override { return trainer_.model(); }

 private:
  SvmTrainer trainer_;
};

}  // namespace

std::unique_ptr<BinaryTrainer> make_binary_trainer(const TrainSettings& s, const Matrix& encoded,
                                                   std::span<const int> labels, std::span<const std::size_t> rows,
                                                   std::uint64_t seed) {
  switch (s.method) {
    case Method::mm_hdc: {
      MarginConfig config;
      config.C = s.C;
      config.lr = s.lr;
      config.batch_size = s.batch_size;
      config.loss = s.loss;
      config.similarity = s.similarity;
      config.optimizer = s.optimizer;
      config.seed = seed;
      return std::make_unique<MarginPairTrainer>(config, init_prototypes(encoded, labels, rows));
    }
    case Method::perceptron:
    case Method::onlinehd:
      if (s.batch_size == 0) throw std::invalid_argument("batch size must be at least 1");
      return std::make_unique<BaselinePairTrainer>(s, init_prototypes(encoded, labels, rows), seed);
    case Method::svm: {
      SvmConfig config;
      config.C = s.C;
      config.lr = s.lr;
      config.batch_size = s.batch_size;
      config.optimizer = s.optimizer;
      config.train_bias = s.train_bias;
      config.seed = seed;
      return std::make_unique<SvmPairTrainer>(config, encoded.cols());
    }
  }
  throw std::invalid_argument("unknown method");
}

OvOTrainer::OvOTrainer(const Matrix& encoded, std::span<const int> labels, std::size_t num_classes,
                       TrainSettings settings)
    : encoded_(encoded), num_classes_(num_classes), settings_(settings), pairs_(class_pairs(num_classes)) {
  if (num_classes < 2) throw std::invalid_argument("OvO training needs K >= 2");
  require_same_length(encoded.rows(), labels.size(), "OvO labels");
  std::vector<std::size_t> counts(num_classes, 0);
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
      throw std::invalid_argument("class label " + std::to_string(y) + " outside 0.." +
                                  std::to_string(num_classes - 1));
    }
    ++counts[static_cast<std::size_t>(y)];
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (counts[c] == 0) throw std::invalid_argument("class " + std::to_string(c) + " has no training points");
  }

  states_.resize(pairs_.size());
  for (std::size_t p = 0; p < pairs_.size(); ++p) {
    auto& st = states_[p];
    st.labels.assign(labels.size(), 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == pairs_[p].a) {
        st.labels[i] = 1;
        st.rows.push_back(i);
      } else if (labels[i] == pairs_[p].b) {
        st.labels[i] = -1;
        st.rows.push_back(i);
      }
    }
    st.trainer = make_binary_trainer(settings_, encoded_, st.labels, st.rows, derive_seed(settings_.seed, p));
  }
}

void OvOTrainer::run_epoch() {
  parallel_for(
      states_.size(),
      [&](std::size_t p) { states_[p].trainer->run_epoch(encoded_, states_[p].labels, states_[p].rows); },
      settings_.threads);
}

std::vector<BinaryModel> OvOTrainer::models() const {
  std::vector<BinaryModel> out;
  out.reserve(states_.size());
  for (const auto& st : states_) out.push_back(st.trainer->model());
  return out;
}

OvOEnsemble OvOTrainer::ensemble(std::shared_ptr<const Encoder> encoder) const {
  return OvOEnsemble(num_classes_, models(), std::move(encoder), settings_.similarity, settings_.method);
}

ObjectiveSum OvOTrainer::objective() const {
  ObjectiveSum sum;
  for (const auto& st : states_) {
    const BinaryModel model = st.trainer->model();
    if (const auto* proto = std::get_if<PrototypePair>(&model)) {
      const LossReport r = mmhdc::objective(*proto, encoded_, st.labels, st.rows, settings_.C, settings_.loss);
      sum.regularizer += r.regularizer;
      sum.hinge_sum += r.hinge_sum;
    } else {
      const auto& lin = std::get<LinearModel>(model);
      sum.regularizer += tikhonov_regularizer(lin.w, settings_.C);
      for (std::size_t i : st.rows) {
        sum.hinge_sum += margin_loss(1.0 - st.labels[i] * lin.decision(encoded_.row(i)), settings_.loss);
      }
    }
  }
  sum.objective = sum.regularizer + sum.hinge_sum;
  return sum;
}

OvOEnsemble ovo_fit(const Matrix& points, std::span<const int> labels, std::size_t num_classes,
                    std::shared_ptr<const Encoder> encoder, const TrainSettings& settings, std::size_t epochs) {
  if (!encoder) throw std::invalid_argument("ovo_fit needs an encoder");
  const Matrix encoded = encoder->encode_batch(points);
  OvOTrainer trainer(encoded, labels, num_classes, settings);
  for (std::size_t e = 0; e < epochs; ++e) trainer.run_epoch();
  return trainer.ensemble(std::move(encoder));
}

}  // namespace mmhdc

#include "mmhdc/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

namespace mmhdc {

using nlohmann::json;

double default_learning_rate(Method method) { return method == Method::svm ? 1e-4 : 1e-5; }

double ExperimentConfig::resolved_lr() const { return lr.value_or(default_learning_rate(method)); }

double ExperimentConfig::resolved_c() const { return C.value_or(kDefaultRegularization); }

Optimizer ExperimentConfig::resolved_optimizer() const {
  return optimizer.value_or(method == Method::svm ? Optimizer::adam : Optimizer::sgd);
}

TrainSettings ExperimentConfig::train_settings(std::uint64_t run_seed) const {
  TrainSettings s;
  s.method = method;
  s.lr = resolved_lr();
  s.C = resolved_c();
  s.batch_size = batch;
  s.loss = loss;
  s.similarity = similarity;
  s.optimizer = resolved_optimizer();
  s.renormalize_baselines = renormalize_baselines;
  s.train_bias = train_bias;
  s.seed = run_seed;
  s.threads = threads;
  return s;
}

void ExperimentConfig::validate() const {
  if (dataset != "mnist" && dataset != "fashion" && dataset != "har") {
    throw UsageError("unknown dataset '" + dataset + "' (expected mnist, fashion or har)");
  }
  if (data_dir.empty()) throw UsageError("--data-dir is required");
  if (dim == 0) throw UsageError("--dim must be positive");
  if (encoder == EncoderKind::rff && dim % 2 != 0) throw UsageError("rff encoding needs an even --dim");
  if (!(sigma > 0.0)) throw UsageError("--sigma must be positive");
  if (!(resolved_lr() > 0.0)) throw UsageError("--lr must be positive");
  if (!(resolved_c() > 0.0)) throw UsageError("--reg-c must be positive");
  if ((method == Method::perceptron || method == Method::onlinehd) && resolved_lr() > 1.0) {
    throw UsageError("perceptron and onlinehd learning rates must lie in (0, 1]");
  }
  if (batch == 0) throw UsageError("--batch must be at least 1");
  if (runs == 0) throw UsageError("--runs must be at least 1");
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["dataset"] = c.dataset;
  j["data_dir"] = c.data_dir.string();
  j["method"] = to_string(c.method);
  j["encoder"] = to_string(c.encoder);
  j["sigma"] = c.sigma;
  j["dim"] = c.dim;
  j["lr"] = c.resolved_lr();
  j["reg_c"] = c.resolved_c();
  j["batch"] = c.batch;
  j["epochs"] = c.epochs;
  j["sim"] = to_string(c.similarity);
  j["loss"] = to_string(c.loss);
  j["optimizer"] = to_string(c.resolved_optimizer());
  j["runs"] = c.runs;
  j["seed"] = c.seed;
  j["train_limit"] = c.train_limit;
  j["test_limit"] = c.test_limit;
  j["renormalize"] = c.renormalize_baselines;
  j["bias"] = c.train_bias;
  return j;
}

void apply_json(ExperimentConfig& c, const json& j) {
  if (!j.is_object()) throw UsageError("config file must hold a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "dataset") c.dataset = v.get<std::string>();
      else if (key == "data_dir") c.data_dir = v.get<std::string>();
      else if (key == "method") c.method = parse_method(v.get<std::string>());
      else if (key == "encoder") c.encoder = parse_encoder_kind(v.get<std::string>());
      else if (key == "sigma") c.sigma = v.get<double>();
      else if (key == "dim") c.dim = v.get<std::size_t>();
      else if (key == "lr") c.lr = v.get<double>();
      else if (key == "reg_c") c.C = v.get<double>();
      else if (key == "batch") c.batch = v.get<std::size_t>();
      else if (key == "epochs") c.epochs = v.get<std::size_t>();
      else if (key == "sim") c.similarity = parse_similarity(v.get<std::string>());
      else if (key == "loss") c.loss = parse_loss(v.get<std::string>());
      else if (key == "optimizer") c.optimizer = parse_optimizer(v.get<std::string>());
      else if (key == "runs") c.runs = v.get<std::size_t>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "out") c.out = v.get<std::string>();
      else if (key == "train_limit") c.train_limit = v.get<std::size_t>();
      else if (key == "test_limit") c.test_limit = v.get<std::size_t>();
      else if (key == "renormalize") c.renormalize_baselines = v.get<bool>();
      else if (key == "bias") c.train_bias = v.get<bool>();
      else if (key == "threads") c.threads = v.get<unsigned>();
      else throw UsageError("unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad config value: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

Aggregate aggregate_final_accuracy(const std::vector<RunRecord>& runs) {
  Aggregate a;
  for (const auto& r : runs) a.values.push_back(r.final_test_accuracy);
  if (a.values.empty()) return a;
  a.mean = std::accumulate(a.values.begin(), a.values.end(), 0.0) / static_cast<double>(a.values.size());
  a.p5 = percentile(a.values, 5.0);
  a.p95 = percentile(a.values, 95.0);
  return a;
}

namespace {

double accuracy_of(const std::vector<int>& predicted, std::span<const int> labels) {
  if (labels.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) correct += predicted[i] == labels[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, const RawDataset& data, std::ostream* metrics) {
  config.validate();
  if (data.num_classes < 2) throw UsageError("dataset has fewer than two classes");
  ExperimentResult result;
  for (std::size_t r = 0; r < config.runs; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    RunRecord run;
    run.run = r;
    run.seed = config.seed + r;

    auto encoder = std::make_shared<const Encoder>(
        Encoder::sample(config.encoder, data.d, config.dim, config.sigma, run.seed));
    const Matrix train = encoder->encode_batch(data.train_x, config.threads);
    const Matrix test = encoder->encode_batch(data.test_x, config.threads);
    OvOTrainer trainer(train, data.train_y, data.num_classes, config.train_settings(run.seed));

    for (std::size_t epoch = 0; epoch <= config.epochs; ++epoch) {
      if (epoch > 0) trainer.run_epoch();
      const OvOEnsemble model = trainer.ensemble(encoder);
      const ObjectiveSum obj = trainer.objective();
      EpochRecord e;
      e.epoch = epoch;
      e.objective = obj.objective;
      e.regularizer = obj.regularizer;
      e.hinge_sum = obj.hinge_sum;
      e.train_accuracy = accuracy_of(model.predict_batch_encoded(train), data.train_y);
      e.test_accuracy = accuracy_of(model.predict_batch_encoded(test), data.test_y);
      run.epochs.push_back(e);
      if (metrics != nullptr) *metrics << epoch_json(run, e).dump() << '\n';
    }
    run.final_test_accuracy = run.epochs.back().test_accuracy;
    run.peak_test_accuracy = 0.0;
    for (const auto& e : run.epochs) run.peak_test_accuracy = std::max(run.peak_test_accuracy, e.test_accuracy);
    if (r == 0) result.first_model = trainer.ensemble(encoder);
    run.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (metrics != nullptr) *metrics << run_json(run).dump() << '\n';
    result.runs.push_back(std::move(run));
  }
  result.aggregate = aggregate_final_accuracy(result.runs);
  return result;
}

json epoch_json(const RunRecord& run, const EpochRecord& e) {
  return json{{"record", "epoch"},          {"run", run.run},
              {"seed", run.seed},           {"epoch", e.epoch},
              {"objective", e.objective},   {"regularizer", e.regularizer},
              {"hinge_sum", e.hinge_sum},   {"train_acc", e.train_accuracy},
              {"test_acc", e.test_accuracy}};
}

json run_json(const RunRecord& run) {
  return json{{"record", "run"},
              {"run", run.run},
              {"seed", run.seed},
              {"epochs", run.epochs.empty() ? 0 : run.epochs.back().epoch},
              {"final_test_acc", run.final_test_accuracy},
              {"peak_test_acc", run.peak_test_accuracy}};
}

json summary_json(const ExperimentConfig& config, const ExperimentResult& result) {
  return json{{"config", to_json(config)},
              {"runs", result.runs.size()},
              {"final_test_acc",
               {{"mean", result.aggregate.mean},
                {"p5", result.aggregate.p5},
                {"p95", result.aggregate.p95},
                {"values", result.aggregate.values}}}};
}

RawDataset prepare_dataset(const ExperimentConfig& config) {
  if (config.data_dir.empty() || !std::filesystem::is_directory(config.data_dir)) {
    throw UsageError("data directory '" + config.data_dir.string() + "' does not exist");
  }
  RawDataset raw = load_dataset(config.dataset, config.data_dir);
  truncate(raw, config.train_limit, config.test_limit);
  return preprocess(std::move(raw));
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

ExperimentResult cmd_train(const ExperimentConfig& config) {
  config.validate();
  if (config.out.empty()) throw UsageError("--out is required");
  const RawDataset data = prepare_dataset(config);

  std::filesystem::create_directories(config.out);
  std::ofstream metrics(config.out / "metrics.jsonl", std::ios::binary);
  if (!metrics) throw std::runtime_error("cannot write " + (config.out / "metrics.jsonl").string());
  ExperimentResult result = run_experiment(config, data, &metrics);
  metrics.close();

  write_text(config.out / "summary.json", summary_json(config, result).dump(2) + "\n");
  std::string timing;
  for (const auto& r : result.runs) timing += json{{"run", r.run}, {"wall_seconds", r.wall_seconds}}.dump() + "\n";
  write_text(config.out / "timing.jsonl", timing);
  if (result.first_model) result.first_model->save(config.out / "model.bin");
  return result;
}

std::vector<ExperimentResult> cmd_sweep_dim(const ExperimentConfig& config, const std::vector<std::size_t>& dims) {
  if (dims.empty()) throw UsageError("sweep-dim needs at least one dimension");
  if (config.out.empty()) throw UsageError("--out is required");
  for (std::size_t d : dims) {
    if (d == 0) throw UsageError("dimensions must be positive");
  }
  std::vector<ExperimentResult> results;
  for (std::size_t d : dims) {
    ExperimentConfig c = config;
    c.dim = d;
    c.lr = kSweepLearningRate;
    c.out = config.out / ("D" + std::to_string(d));
    results.push_back(cmd_train(c));
  }
  return results;
}

EvalReport evaluate(const OvOEnsemble& model, const Matrix& points, std::span<const int> labels) {
  require_same_length(points.rows(), labels.size(), "labels");
  if (!points.empty() && points.cols() != model.encoder().input_dim()) {
    throw DimensionError("model expects " + std::to_string(model.encoder().input_dim()) +
                         " input features, dataset has " + std::to_string(points.cols()));
  }
  EvalReport report;
  report.num_classes = model.num_classes();
  report.confusion.assign(report.num_classes, std::vector<std::size_t>(report.num_classes, 0));
  report.class_counts.assign(report.num_classes, 0);
  const Matrix encoded = model.encoder().encode_batch(points);
  const std::vector<int> predicted = model.predict_batch_encoded(encoded);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= report.num_classes) {
      throw std::invalid_argument("label " + std::to_string(y) + " outside the model's classes");
    }
    ++report.class_counts[static_cast<std::size_t>(y)];
    ++report.confusion[static_cast<std::size_t>(y)][static_cast<std::size_t>(predicted[i])];
    correct += predicted[i] == y ? 1 : 0;
  }
  report.accuracy = labels.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(labels.size());
  return report;
}

json to_json(const EvalReport& r) {
  return json{{"accuracy", r.accuracy},
              {"num_classes", r.num_classes},
              {"class_counts", r.class_counts},
              {"confusion", r.confusion}};
}

EvalReport cmd_eval(const std::filesystem::path& model_path, const ExperimentConfig& data_config,
                    const std::string& split) {
  if (split != "test" && split != "train") throw UsageError("--split must be test or train");
  if (!std::filesystem::is_regular_file(model_path)) {
    throw UsageError("model file '" + model_path.string() + "' does not exist");
  }
  const OvOEnsemble model = OvOEnsemble::load(model_path);
  const RawDataset data = prepare_dataset(data_config);
  return split == "test" ? evaluate(model, data.test_x, data.test_y) : evaluate(model, data.train_x, data.train_y);
}

}  // namespace mmhdc

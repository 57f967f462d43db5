#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "mmhdc/data_io.hpp"
#include "mmhdc/encoding.hpp"
#include "mmhdc/multiclass.hpp"

namespace mmhdc {

/// Bad flags, bad config values, or missing inputs. Maps to exit status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string dataset = "mnist";
  std::filesystem::path data_dir;
  Method method = Method::mm_hdc;
  EncoderKind encoder = EncoderKind::onlinehd;
  double sigma = 1.0;
  std::size_t dim = 5000;
  std::optional<double> lr;  ///< method default when unset
  std::optional<double> C;   ///< method default when unset
  std::size_t batch = 1000;
  std::size_t epochs = 20;
  Similarity similarity = Similarity::dot;
  Loss loss = Loss::hinge;
  std::optional<Optimizer> optimizer;  ///< adam for svm, sgd otherwise
  std::size_t runs = 5;
  std::uint64_t seed = 0;
  std::filesystem::path out;
  std::size_t train_limit = 0;  ///< 0 = whole split
  std::size_t test_limit = 0;
  bool renormalize_baselines = true;
  bool train_bias = false;
  unsigned threads = 0;

  double resolved_lr() const;
  double resolved_c() const;
  Optimizer resolved_optimizer() const;
  TrainSettings train_settings(std::uint64_t run_seed) const;

  /// Throws UsageError on out-of-range values.
  void validate() const;
};

/// Default learning rate for a method (1e-5 for the HDC trainers, 1e-4 for svm).
double default_learning_rate(Method method);
inline constexpr double kDefaultRegularization = 500.0;

nlohmann::json to_json(const ExperimentConfig& config);
/// Overlays the keys present in `j` onto `config`. Unknown keys are rejected.
void apply_json(ExperimentConfig& config, const nlohmann::json& j);

struct EpochRecord {
  std::size_t epoch = 0;
  double objective = 0.0;
  double regularizer = 0.0;
  double hinge_sum = 0.0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

struct RunRecord {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::vector<EpochRecord> epochs;  ///< epoch 0 is the class-mean initialization
  double final_test_accuracy = 0.0;
  double peak_test_accuracy = 0.0;
  double wall_seconds = 0.0;
};

struct Aggregate {
  double mean = 0.0;
  double p5 = 0.0;
  double p95 = 0.0;
  std::vector<double> values;
};

/// Linear-interpolation percentile (q in [0, 100]) of unsorted values.
double percentile(std::vector<double> values, double q);
Aggregate aggregate_final_accuracy(const std::vector<RunRecord>& runs);

struct ExperimentResult {
  std::vector<RunRecord> runs;
  Aggregate aggregate;
  std::optional<OvOEnsemble> first_model;
};

/// Runs config.runs seeded runs (seed = config.seed + run) on an already
/// preprocessed dataset. Epoch records are streamed to `metrics` as JSON lines
/// when given. Run r: encoder seeded with its run seed, OvO pair shuffles with
/// streams derived from it.
ExperimentResult run_experiment(const ExperimentConfig& config, const RawDataset& data,
                                std::ostream* metrics = nullptr);

nlohmann::json epoch_json(const RunRecord& run, const EpochRecord& e);
nlohmann::json run_json(const RunRecord& run);
nlohmann::json summary_json(const ExperimentConfig& config, const ExperimentResult& result);

/// Loads, truncates and normalizes the configured dataset. Missing directory -> UsageError.
RawDataset prepare_dataset(const ExperimentConfig& config);

/// Writes metrics.jsonl, summary.json, timing.jsonl and model.bin (first run)
/// into config.out.
ExperimentResult cmd_train(const ExperimentConfig& config);

/// One cmd_train per dimension with lr forced to 1e-4, outputs under out/D<dim>.
std::vector<ExperimentResult> cmd_sweep_dim(const ExperimentConfig& config, const std::vector<std::size_t>& dims);

inline constexpr double kSweepLearningRate = 1e-4;

struct EvalReport {
  double accuracy = 0.0;
  std::size_t num_classes = 0;
  std::vector<std::vector<std::size_t>> confusion;  ///< [true][predicted]
  std::vector<std::size_t> class_counts;
};

EvalReport evaluate(const OvOEnsemble& model, const Matrix& points, std::span<const int> labels);
nlohmann::json to_json(const EvalReport& report);

/// Loads a saved model and scores it on a dataset split ("test" or "train").
EvalReport cmd_eval(const std::filesystem::path& model_path, const ExperimentConfig& data_config,
                    const std::string& split = "test");

/// Full command-line entry point. Returns 0 ok, 1 runtime failure, 2 usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mmhdc

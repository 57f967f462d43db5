#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mmhdc/harness.hpp"

namespace mmhdc {

namespace {

// Raw flag values; only the ones actually given override the config.
struct FlagValues {
  std::string config_file;
  std::string dataset, data_dir, method, encoder, sim, loss, optimizer, out;
  double sigma = 0, lr = 0, reg_c = 0;
  std::size_t dim = 0, batch = 0, epochs = 0, runs = 0, train_limit = 0, test_limit = 0;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  bool no_renorm = false, bias = false;
  std::map<std::string, CLI::Option*> opts;
};

void add_experiment_flags(CLI::App* cmd, FlagValues& f) {
  auto& o = f.opts;
  o["config"] = cmd->add_option("--config", f.config_file, "JSON config file; flags override its keys");
  o["dataset"] = cmd->add_option("--dataset", f.dataset, "mnist | fashion | har");
  o["data-dir"] = cmd->add_option("--data-dir", f.data_dir, "Dataset directory");
  o["method"] = cmd->add_option("--method", f.method, "mm-hdc | perceptron | onlinehd | svm");
  o["encoder"] = cmd->add_option("--encoder", f.encoder, "onlinehd | rff");
  o["sigma"] = cmd->add_option("--sigma", f.sigma, "RFF kernel width");
  o["dim"] = cmd->add_option("--dim", f.dim, "Hypervector size D (default 5000)");
  o["lr"] = cmd->add_option("--lr", f.lr, "Learning rate (default per method)");
  o["reg-c"] = cmd->add_option("--reg-c", f.reg_c, "Regularization constant C (default 500; inf allowed)");
  o["batch"] = cmd->add_option("--batch", f.batch, "Batch size B (default 1000)");
  o["epochs"] = cmd->add_option("--epochs", f.epochs, "Training epochs (default 20)");
  o["sim"] = cmd->add_option("--sim", f.sim, "dot | cosine");
  o["loss"] = cmd->add_option("--loss", f.loss, "hinge | sq-hinge");
  o["optimizer"] = cmd->add_option("--optimizer", f.optimizer, "sgd | adam");
  o["runs"] = cmd->add_option("--runs", f.runs, "Independent seeded runs (default 5)");
  o["seed"] = cmd->add_option("--seed", f.seed, "Base seed; run r uses seed + r");
  o["out"] = cmd->add_option("--out", f.out, "Output directory");
  o["train-limit"] = cmd->add_option("--train-limit", f.train_limit, "Use the first N training points");
  o["test-limit"] = cmd->add_option("--test-limit", f.test_limit, "Use the first N test points");
  o["threads"] = cmd->add_option("--threads", f.threads, "Worker threads (0 = all cores)");
  o["no-renorm"] = cmd->add_flag("--no-renorm", f.no_renorm, "Skip baseline prototype renormalization");
  o["bias"] = cmd->add_flag("--bias", f.bias, "Train an SVM bias term");
}

bool given(const FlagValues& f, const std::string& name) {
  auto it = f.opts.find(name);
  return it != f.opts.end() && it->second->count() > 0;
}

ExperimentConfig build_config(const FlagValues& f) {
  ExperimentConfig c;
  if (given(f, "config")) {
    std::ifstream in(f.config_file);
    if (!in) throw UsageError("cannot read config file " + f.config_file);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("config file is not valid JSON: " + std::string(e.what()));
    }
    apply_json(c, j);
  }
  try {
    if (given(f, "dataset")) c.dataset = f.dataset;
    if (given(f, "data-dir")) c.data_dir = f.data_dir;
    if (given(f, "method")) c.method = parse_method(f.method);
    if (given(f, "encoder")) c.encoder = parse_encoder_kind(f.encoder);
    if (given(f, "sigma")) c.sigma = f.sigma;
    if (given(f, "dim")) c.dim = f.dim;
    if (given(f, "lr")) c.lr = f.lr;
    if (given(f, "reg-c")) c.C = f.reg_c;
    if (given(f, "batch")) c.batch = f.batch;
    if (given(f, "epochs")) c.epochs = f.epochs;
    if (given(f, "sim")) c.similarity = parse_similarity(f.sim);
    if (given(f, "loss")) c.loss = parse_loss(f.loss);
    if (given(f, "optimizer")) c.optimizer = parse_optimizer(f.optimizer);
    if (given(f, "runs")) c.runs = f.runs;
    if (given(f, "seed")) c.seed = f.seed;
    if (given(f, "out")) c.out = f.out;
    if (given(f, "train-limit")) c.train_limit = f.train_limit;
    if (given(f, "test-limit")) c.test_limit = f.test_limit;
    if (given(f, "threads")) c.threads = f.threads;
    if (given(f, "no-renorm")) c.renormalize_baselines = !f.no_renorm;
    if (given(f, "bias")) c.train_bias = f.bias;
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return c;
}

void print_summary(std::ostream& out, const ExperimentConfig& config, const ExperimentResult& result) {
  out << summary_json(config, result).dump(2) << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Maximum-margin hyperdimensional classifiers: train, evaluate and sweep"};
  app.require_subcommand(1);

  FlagValues train_flags;
  auto* train = app.add_subcommand("train", "Train seeded runs and write metrics, summary and model");
  add_experiment_flags(train, train_flags);

  FlagValues sweep_flags;
  std::vector<std::size_t> dims;
  auto* sweep = app.add_subcommand("sweep-dim", "Repeat training for several hypervector sizes (lr = 1e-4)");
  add_experiment_flags(sweep, sweep_flags);
  sweep->add_option("--dims", dims, "Comma-separated dimensions, e.g. 500,1000,2500")
      ->delimiter(',')
      ->required();

  FlagValues eval_flags;
  std::string model_path, split = "test", report_path;
  auto* eval = app.add_subcommand("eval", "Score a saved model on a dataset split");
  eval->add_option("--model", model_path, "Model file written by train")->required();
  eval_flags.opts["dataset"] = eval->add_option("--dataset", eval_flags.dataset, "mnist | fashion | har");
  eval_flags.opts["data-dir"] = eval->add_option("--data-dir", eval_flags.data_dir, "Dataset directory");
  eval_flags.opts["train-limit"] = eval->add_option("--train-limit", eval_flags.train_limit, "First N training points");
  eval_flags.opts["test-limit"] = eval->add_option("--test-limit", eval_flags.test_limit, "First N test points");
  eval->add_option("--split", split, "test | train");
  eval->add_option("--out", report_path, "Write the JSON report here as well");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (train->parsed()) {
      const ExperimentConfig config = build_config(train_flags);
      print_summary(out, config, cmd_train(config));
    } else if (sweep->parsed()) {
      const ExperimentConfig config = build_config(sweep_flags);
      const auto results = cmd_sweep_dim(config, dims);
      nlohmann::json j = nlohmann::json::array();
      for (std::size_t i = 0; i < results.size(); ++i) {
        ExperimentConfig c = config;
        c.dim = dims[i];
        c.lr = kSweepLearningRate;
        j.push_back(summary_json(c, results[i]));
      }
      out << j.dump(2) << '\n';
    } else if (eval->parsed()) {
      const ExperimentConfig config = build_config(eval_flags);
      const EvalReport report = cmd_eval(model_path, config, split);
      const std::string text = to_json(report).dump(2) + "\n";
      out << text;
      if (!report_path.empty()) {
        std::ofstream f(report_path, std::ios::binary);
        if (!f || !(f << text)) throw std::runtime_error("cannot write " + report_path);
      }
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace mmhdc

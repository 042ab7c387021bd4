#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dll/baselines.hpp"
#include "dll/data.hpp"
#include "dll/infer.hpp"
#include "dll/metrics.hpp"
#include "dll/model.hpp"
#include "dll/train.hpp"

namespace dll {

enum class Method { DLL, ID, COL, SSL, LS, DSML, DSML_REV };

std::string to_string(Method method);
Method method_from_string(const std::string& s);

// Named hyperparameter bundle. y0 and the class weights follow the task;
// every preset runs 100 epochs and caps alternate inference at 1000
// iterations.
struct Preset {
  std::string name;
  LossWeights weights;
  int batch_size = 4;
  int epochs = 100;
  std::optional<ClassWeights> class_weights;
  double y0 = 1.0;
  int iterations = 1000;
  TaskKind task = TaskKind::Regression;
};

// "tox21", "higgs" or "mof".
Preset get_preset(const std::string& name);

struct SyntheticSpec {
  TaskKind task = TaskKind::Regression;
  int n = 1000;
  int d = 10;
  std::uint64_t gen_seed = 7;
};

struct DatasetSource {
  // Either a CSV path or a synthetic spec.
  std::string csv_path;
  TaskKind csv_task = TaskKind::Regression;
  std::optional<SyntheticSpec> synthetic = SyntheticSpec{};

  TaskKind task() const {
    return synthetic ? synthetic->task : csv_task;
  }
};

struct ExperimentConfig {
  DatasetSource dataset;
  double rate1 = 0.3;
  double rate2 = 0.3;
  std::string preset;  // empty = no preset applied
  TrainConfig train;
  ModelConfig model;   // encoder input width 0 = derive from the dataset
  InferenceConfig inference;
  std::vector<std::uint64_t> seeds{1};
  std::vector<Method> methods{Method::DLL};
  std::vector<double> sweep_rates{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  std::size_t trace_samples = 100;  // per-sample trace export cap
  std::string checkpoint;           // optional pre-trained model for `trace`
};

// Applies a preset's values onto a config (weights, batch size, epochs,
// class weights, y0, iteration cap).
void apply_preset(ExperimentConfig& config, const Preset& preset);

// Parses a JSON config document; errors carry field paths. Values present
// in the document override preset values.
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_config(const std::string& json_text);

// One fully trained dual-tower fit.
struct DllFit {
  ModelConfig model;
  DualTowerParams params;
  std::optional<MultiTaskParams> marginals;
  TrainHistory history;
};

DllFit fit_dll(const Dataset& train_masked, const ExperimentConfig& config,
               std::uint64_t seed);

struct ExperimentOutput {
  ResultsTable table;
  std::string results_json;  // exact bytes of results.json
};

// Per seed: 64/16/20 split, feature scaling from the train split, seeded
// independent label masking of the train split, one fit per requested
// method, then four evaluation panels on the held-out test samples
// (single-label prediction reveals the other label; double-label reveals
// none). Writes results.json, per-seed history CSVs and checkpoints under
// out_dir (pass "" to skip writing). Byte-identical for identical configs.
ExperimentOutput run_experiment(const ExperimentConfig& config,
                                const std::string& out_dir);

struct SweepOutput {
  std::string csv;  // long format: rate,method,task,label,seed,metric,value
};

SweepOutput sweep_missing_rates(const ExperimentConfig& config,
                                const std::vector<double>& rates,
                                const std::string& out_dir);

// Cumulative training-mode stacks evaluated on identical splits/seeds:
// "f" (marginal model only), "a" (supervision only), "a+b" (supervision +
// reconstruction), "a+b+c" (full objective). Classification presets only.
struct AblationOutput {
  ResultsTable table;
  std::string results_json;
  std::string csv;  // stack,seed,task,label,metric,value
};

AblationOutput run_ablation(const ExperimentConfig& config,
                            const std::string& out_dir);

// Double-label prediction quality as a function of the alternate-inference
// iteration, on the unlabeled test queries of the first seed.
struct ConvergenceOutput {
  std::vector<double> metric_y1;  // one entry per iteration 1..L
  std::vector<double> metric_y2;
  std::map<std::size_t, std::size_t> histogram;  // converged-at counts
  double converged_fraction = 0.0;
  std::string metric_name;
  std::string csv;  // iteration,metric_y1,metric_y2
};

ConvergenceOutput convergence_report(const ExperimentConfig& config,
                                     const std::string& out_dir);

}  // namespace dll

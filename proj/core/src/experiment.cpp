#include "dll/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "dll/checkpoint.hpp"
#include "dll/data_io.hpp"
#include "dll/error.hpp"
#include "dll/rng.hpp"
#include "dll/synthetic.hpp"

namespace dll {

namespace {

using njson = nlohmann::json;

std::uint64_t derive_seed(std::uint64_t base, const std::string& name) {
  return Rng(base).substream(name).seed();
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::DLL: return "DLL";
    case Method::ID: return "ID";
    case Method::COL: return "COL";
    case Method::SSL: return "SSL";
    case Method::LS: return "LS";
    case Method::DSML: return "DSML";
    case Method::DSML_REV: return "DSML_REV";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  if (s == "DLL") return Method::DLL;
  return static_cast<Method>(static_cast<int>(baseline_kind_from_string(s)) + 1);
}

Preset get_preset(const std::string& name) {
  Preset p;
  p.name = name;
  if (name == "tox21") {
    p.weights = LossWeights{.lambda11 = 2.0,
                            .lambda22 = 1.0,
                            .lambda12 = 1.0,
                            .lambda21 = 2.0,
                            .lambda_d = 0.2};
    p.batch_size = 4;
    p.class_weights = ClassWeights{.negative = 0.3, .positive = 0.7};
    p.y0 = 0.5;
    p.task = TaskKind::BinaryClassification;
  } else if (name == "higgs") {
    p.weights = LossWeights{.lambda11 = 1.0,
                            .lambda22 = 1.0,
                            .lambda12 = 1.0,
                            .lambda21 = 1.0,
                            .lambda_d = 0.0};
    p.batch_size = 4;
    p.y0 = 1.0;
    p.task = TaskKind::Regression;
  } else if (name == "mof") {
    p.weights = LossWeights{.lambda11 = 2.0,
                            .lambda22 = 1.0,
                            .lambda12 = 1.0,
                            .lambda21 = 2.0,
                            .lambda_d = 0.0};
    p.batch_size = 1;
    p.y0 = 1.0;
    p.task = TaskKind::Regression;
  } else {
    throw ConfigError("unknown preset '" + name +
                      "' (expected tox21, higgs or mof)");
  }
  p.epochs = 100;
  p.iterations = 1000;
  return p;
}

void apply_preset(ExperimentConfig& config, const Preset& preset) {
  config.preset = preset.name;
  config.train.weights = preset.weights;
  config.train.batch_size = preset.batch_size;
  config.train.epochs = preset.epochs;
  config.train.class_weights = preset.class_weights;
  config.inference.y0 = preset.y0;
  config.inference.iterations = preset.iterations;
}

// ---------------------------------------------------------------------------
// Config document parsing
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config: " + path + ": " + what);
}

const njson* find(const njson& j, const std::string& key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double as_number(const njson& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int as_int(const njson& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

std::uint64_t as_u64(const njson& j, const std::string& path) {
  if (!j.is_number_unsigned() && !j.is_number_integer()) {
    fail(path, "expected a nonnegative integer");
  }
  const auto v = j.get<std::int64_t>();
  if (v < 0) fail(path, "expected a nonnegative integer");
  return static_cast<std::uint64_t>(v);
}

std::string as_string(const njson& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

std::vector<int> as_int_list(const njson& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of integers");
  std::vector<int> out;
  for (const auto& e : j) out.push_back(as_int(e, path));
  return out;
}

void parse_train_section(const njson& j, const std::string& path,
                         TrainConfig& train) {
  if (!j.is_object()) fail(path, "expected an object");
  if (const njson* v = find(j, "epochs")) train.epochs = as_int(*v, path + ".epochs");
  if (const njson* v = find(j, "batch_size")) {
    train.batch_size = as_int(*v, path + ".batch_size");
  }
  if (const njson* v = find(j, "learning_rate")) {
    train.learning_rate = as_number(*v, path + ".learning_rate");
  }
  if (const njson* v = find(j, "lambda11")) {
    train.weights.lambda11 = as_number(*v, path + ".lambda11");
  }
  if (const njson* v = find(j, "lambda22")) {
    train.weights.lambda22 = as_number(*v, path + ".lambda22");
  }
  if (const njson* v = find(j, "lambda12")) {
    train.weights.lambda12 = as_number(*v, path + ".lambda12");
  }
  if (const njson* v = find(j, "lambda21")) {
    train.weights.lambda21 = as_number(*v, path + ".lambda21");
  }
  if (const njson* v = find(j, "lambda_d")) {
    train.weights.lambda_d = as_number(*v, path + ".lambda_d");
  }
  const njson* wp = find(j, "class_weight_positive");
  const njson* wn = find(j, "class_weight_negative");
  if (wp || wn) {
    ClassWeights w = train.class_weights.value_or(ClassWeights{});
    if (wn) w.negative = as_number(*wn, path + ".class_weight_negative");
    if (wp) w.positive = as_number(*wp, path + ".class_weight_positive");
    train.class_weights = w;
  }
  if (const njson* v = find(j, "multitask_labeled_only")) {
    if (!v->is_boolean()) fail(path + ".multitask_labeled_only", "expected a boolean");
    train.multitask_labeled_only = v->get<bool>();
  }
}

void parse_model_section(const njson& j, const std::string& path,
                         ModelConfig& model) {
  if (!j.is_object()) fail(path, "expected an object");
  if (const njson* v = find(j, "encoder_widths")) {
    model.encoder_widths = as_int_list(*v, path + ".encoder_widths");
  }
  if (const njson* v = find(j, "embedding_widths")) {
    model.embedding_widths = as_int_list(*v, path + ".embedding_widths");
  }
  if (const njson* v = find(j, "tower_widths")) {
    model.tower_widths = as_int_list(*v, path + ".tower_widths");
  }
  if (const njson* v = find(j, "hidden_activation")) {
    const std::string s = as_string(*v, path + ".hidden_activation");
    if (s == "relu") {
      model.hidden_activation = Activation::Relu;
    } else if (s == "tanh") {
      model.hidden_activation = Activation::Tanh;
    } else {
      fail(path + ".hidden_activation", "expected 'relu' or 'tanh'");
    }
  }
}

void parse_inference_section(const njson& j, const std::string& path,
                             InferenceConfig& inference) {
  if (!j.is_object()) fail(path, "expected an object");
  if (const njson* v = find(j, "y0")) {
    inference.y0 = as_number(*v, path + ".y0");
  }
  if (const njson* v = find(j, "iterations")) {
    inference.iterations = as_int(*v, path + ".iterations");
  }
  if (const njson* v = find(j, "epsilon")) {
    if (v->is_null()) {
      inference.epsilon.reset();
    } else {
      inference.epsilon = as_number(*v, path + ".epsilon");
    }
  }
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  njson j;
  try {
    j = njson::parse(json_text);
  } catch (const njson::parse_error& e) {
    throw ParseError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");

  ExperimentConfig config;

  // Dataset first: the task steers preset defaults.
  if (const njson* ds = find(j, "dataset")) {
    if (!ds->is_object()) fail("dataset", "expected an object");
    std::string source = "synthetic";
    if (const njson* v = find(*ds, "source")) {
      source = as_string(*v, "dataset.source");
    }
    TaskKind task = TaskKind::Regression;
    if (const njson* v = find(*ds, "task")) {
      task = task_kind_from_string(as_string(*v, "dataset.task"));
    }
    if (source == "synthetic") {
      SyntheticSpec spec;
      spec.task = task;
      if (const njson* v = find(*ds, "n")) spec.n = as_int(*v, "dataset.n");
      if (const njson* v = find(*ds, "d")) spec.d = as_int(*v, "dataset.d");
      if (const njson* v = find(*ds, "gen_seed")) {
        spec.gen_seed = as_u64(*v, "dataset.gen_seed");
      }
      if (spec.n < 5) fail("dataset.n", "need at least 5 samples");
      if (spec.d < 2) fail("dataset.d", "need at least 2 features");
      config.dataset.synthetic = spec;
      config.dataset.csv_path.clear();
    } else if (source == "csv") {
      config.dataset.synthetic.reset();
      config.dataset.csv_task = task;
      if (const njson* v = find(*ds, "path")) {
        config.dataset.csv_path = as_string(*v, "dataset.path");
      }
      if (config.dataset.csv_path.empty()) {
        fail("dataset.path", "csv source needs a path");
      }
    } else {
      fail("dataset.source", "expected 'synthetic' or 'csv'");
    }
  }

  if (const njson* v = find(j, "preset")) {
    apply_preset(config, get_preset(as_string(*v, "preset")));
  }

  if (const njson* missing = find(j, "missing")) {
    if (!missing->is_object()) fail("missing", "expected an object");
    if (const njson* v = find(*missing, "rate1")) {
      config.rate1 = as_number(*v, "missing.rate1");
    }
    if (const njson* v = find(*missing, "rate2")) {
      config.rate2 = as_number(*v, "missing.rate2");
    }
  }

  if (const njson* v = find(j, "seeds")) {
    if (!v->is_array() || v->empty()) {
      fail("seeds", "expected a non-empty array");
    }
    config.seeds.clear();
    for (const auto& e : *v) config.seeds.push_back(as_u64(e, "seeds"));
  }

  if (const njson* v = find(j, "methods")) {
    if (!v->is_array() || v->empty()) {
      fail("methods", "expected a non-empty array");
    }
    config.methods.clear();
    for (const auto& e : *v) {
      config.methods.push_back(method_from_string(as_string(e, "methods")));
    }
  }

  if (const njson* v = find(j, "train")) {
    parse_train_section(*v, "train", config.train);
  }
  if (const njson* v = find(j, "model")) {
    parse_model_section(*v, "model", config.model);
  }
  if (const njson* v = find(j, "inference")) {
    parse_inference_section(*v, "inference", config.inference);
  }
  if (const njson* v = find(j, "sweep_rates")) {
    if (!v->is_array()) fail("sweep_rates", "expected an array");
    config.sweep_rates.clear();
    for (const auto& e : *v) {
      config.sweep_rates.push_back(as_number(e, "sweep_rates"));
    }
  }
  if (const njson* v = find(j, "trace_samples")) {
    const int count = as_int(*v, "trace_samples");
    if (count < 0) fail("trace_samples", "expected a nonnegative integer");
    config.trace_samples = static_cast<std::size_t>(count);
  }
  if (const njson* v = find(j, "checkpoint")) {
    config.checkpoint = as_string(*v, "checkpoint");
  }

  if (config.rate1 < 0.0 || config.rate1 > 1.0 || config.rate2 < 0.0 ||
      config.rate2 > 1.0) {
    fail("missing", "rates must lie in [0, 1]");
  }
  const TaskKind task = config.dataset.task();
  if (task == TaskKind::Regression && config.train.weights.lambda_d > 0.0) {
    fail("train.lambda_d", "duality loss requires a classification task");
  }
  return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

// ---------------------------------------------------------------------------
// Protocol pieces
// ---------------------------------------------------------------------------

namespace {

struct SeedData {
  Dataset train_masked;
  Dataset val;
  Dataset test;
};

Dataset load_base_dataset(const ExperimentConfig& config) {
  Dataset base;
  if (config.dataset.synthetic) {
    const SyntheticSpec& s = *config.dataset.synthetic;
    base = s.task == TaskKind::Regression
               ? gen_synthetic_regression(static_cast<std::size_t>(s.n),
                                          static_cast<std::size_t>(s.d),
                                          s.gen_seed)
               : gen_synthetic_classification(static_cast<std::size_t>(s.n),
                                              static_cast<std::size_t>(s.d),
                                              s.gen_seed);
  } else {
    base = load_csv(config.dataset.csv_path, config.dataset.csv_task);
  }
  for (std::size_t i = 0; i < base.samples.size(); ++i) {
    if (!base.samples[i].y1 || !base.samples[i].y2) {
      throw ConfigError("experiment: dataset sample " + std::to_string(i) +
                        " is not fully labeled; experiments mask labels "
                        "themselves");
    }
  }
  return base;
}

SeedData prepare_seed_data(const Dataset& base, const ExperimentConfig& config,
                           std::uint64_t seed) {
  TrainValTest split =
      train_val_test_split(base, derive_seed(seed, "exp.split"));
  MinMaxScaler scaler;
  scaler.fit(split.train);
  scaler.transform(split.train);
  scaler.transform(split.val);
  scaler.transform(split.test);
  SeedData out;
  out.train_masked = mask_labels(split.train, config.rate1, config.rate2,
                                 derive_seed(seed, "exp.mask"));
  out.val = std::move(split.val);
  out.test = std::move(split.test);
  return out;
}

ModelConfig materialize_model(const ExperimentConfig& config,
                              std::size_t feature_dim, std::uint64_t seed,
                              const std::string& stream) {
  ModelConfig model = config.model;
  if (model.encoder_widths.empty()) {
    model = default_model_config(static_cast<int>(feature_dim),
                                 config.dataset.task(), 0);
  } else if (model.encoder_widths.front() == 0) {
    model.encoder_widths.front() = static_cast<int>(feature_dim);
  }
  model.task = config.dataset.task();
  model.seed = derive_seed(seed, stream);
  if (model.encoder_widths.front() != static_cast<int>(feature_dim)) {
    throw ConfigError("model: encoder input width " +
                      std::to_string(model.encoder_widths.front()) +
                      " does not match dataset feature dim " +
                      std::to_string(feature_dim));
  }
  return model;
}

// Counters for the evaluation protocol's label handling; single panels
// reveal exactly one true label per query, double panels reveal none.
struct EvalCounters {
  std::size_t single_reveals = 0;
  std::size_t double_reveals = 0;
};

Sample single_query(const Sample& truth, bool reveal_y2,
                    EvalCounters& counters) {
  Sample q;
  q.x = truth.x;
  if (reveal_y2) {
    q.y2 = truth.y2;
  } else {
    q.y1 = truth.y1;
  }
  ++counters.single_reveals;
  return q;
}

Sample double_query(const Sample& truth) {
  Sample q;
  q.x = truth.x;
  return q;
}

struct PanelPredictions {
  // Raw predictions (probabilities for classification).
  std::vector<double> single_y1, single_y2, double_y1, double_y2;
  std::size_t converged = 0;  // double-panel alternate inference
  std::map<std::size_t, std::size_t> histogram;
};

PanelPredictions evaluate_dll(const DllFit& fit, const Dataset& test,
                              const InferenceConfig& inference,
                              EvalCounters& counters) {
  PanelPredictions out;
  for (const Sample& truth : test.samples) {
    const Sample q1 = single_query(truth, /*reveal_y2=*/true, counters);
    out.single_y1.push_back(
        direct_infer(q1, fit.model, fit.params).y1->value);
    const Sample q2 = single_query(truth, /*reveal_y2=*/false, counters);
    out.single_y2.push_back(
        direct_infer(q2, fit.model, fit.params).y2->value);
    const AlternateResult alt =
        alternate_infer(double_query(truth), fit.model, fit.params, inference);
    out.double_y1.push_back(alt.y1.value);
    out.double_y2.push_back(alt.y2.value);
    if (alt.trace.converged_at) {
      ++out.converged;
      ++out.histogram[*alt.trace.converged_at];
    }
  }
  return out;
}

PanelPredictions evaluate_baseline(const BaselinePredictor& predictor,
                                   const Dataset& test,
                                   EvalCounters& counters) {
  PanelPredictions out;
  for (const Sample& truth : test.samples) {
    const Sample q1 = single_query(truth, /*reveal_y2=*/true, counters);
    out.single_y1.push_back(
        *baseline_predict(predictor, q1, presence_indicator(q1)).y1);
    const Sample q2 = single_query(truth, /*reveal_y2=*/false, counters);
    out.single_y2.push_back(
        *baseline_predict(predictor, q2, presence_indicator(q2)).y2);
    const Sample qd = double_query(truth);
    const BaselinePrediction both =
        baseline_predict(predictor, qd, presence_indicator(qd));
    out.double_y1.push_back(*both.y1);
    out.double_y2.push_back(*both.y2);
  }
  return out;
}

// Marginal-model-only evaluation (the "f" ablation stack): every panel
// uses the head outputs from features alone.
PanelPredictions evaluate_marginals(const ModelConfig& model,
                                    const MultiTaskParams& marginals,
                                    const Dataset& test) {
  PanelPredictions out;
  for (const Sample& truth : test.samples) {
    const auto [h1, h2] = m_eval(model, marginals, truth.x);
    out.single_y1.push_back(h1);
    out.single_y2.push_back(h2);
    out.double_y1.push_back(h1);
    out.double_y2.push_back(h2);
  }
  return out;
}

void add_panel(ResultsTable& table, const std::string& method,
               const std::string& panel, TaskKind task,
               const std::vector<double>& predictions,
               const std::vector<double>& truth) {
  if (task == TaskKind::BinaryClassification) {
    std::vector<int> pred_classes(predictions.size());
    std::vector<int> true_classes(truth.size());
    for (std::size_t i = 0; i < predictions.size(); ++i) {
      pred_classes[i] = threshold_class(predictions[i]);
      true_classes[i] = truth[i] > 0.5 ? 1 : 0;
    }
    const ClassificationMetrics m =
        classification_metrics(pred_classes, true_classes);
    table.add(method, panel, "accuracy", m.accuracy);
    table.add(method, panel, "precision", m.precision);
    table.add(method, panel, "recall", m.recall);
    table.add(method, panel, "f1", m.f1);
  } else {
    table.add(method, panel, "mape", mape(predictions, truth));
  }
}

void add_all_panels(ResultsTable& table, const std::string& method,
                    TaskKind task, const PanelPredictions& preds,
                    const Dataset& test) {
  std::vector<double> truth_y1(test.samples.size());
  std::vector<double> truth_y2(test.samples.size());
  for (std::size_t i = 0; i < test.samples.size(); ++i) {
    truth_y1[i] = *test.samples[i].y1;
    truth_y2[i] = *test.samples[i].y2;
  }
  add_panel(table, method, "Single-y1", task, preds.single_y1, truth_y1);
  add_panel(table, method, "Single-y2", task, preds.single_y2, truth_y2);
  add_panel(table, method, "Double-y1", task, preds.double_y1, truth_y1);
  add_panel(table, method, "Double-y2", task, preds.double_y2, truth_y2);
}

njson table_to_json(const ResultsTable& table) {
  njson out = njson::object();
  for (const auto& [method, panels] : table.cells()) {
    njson jm = njson::object();
    for (const auto& [panel, metrics] : panels) {
      njson jp = njson::object();
      for (const auto& [metric, values] : metrics) {
        const MetricSummary s = summarize(values);
        jp[metric] = {{"mean", s.mean}, {"sd", s.sd}, {"values", s.values}};
      }
      jm[panel] = std::move(jp);
    }
    out[method] = std::move(jm);
  }
  return out;
}

njson config_to_json(const ExperimentConfig& config) {
  njson ds = njson::object();
  if (config.dataset.synthetic) {
    const SyntheticSpec& s = *config.dataset.synthetic;
    ds = {{"source", "synthetic"},
          {"task", to_string(s.task)},
          {"n", s.n},
          {"d", s.d},
          {"gen_seed", s.gen_seed}};
  } else {
    ds = {{"source", "csv"},
          {"task", to_string(config.dataset.csv_task)},
          {"path", config.dataset.csv_path}};
  }
  njson methods = njson::array();
  for (Method m : config.methods) methods.push_back(to_string(m));
  njson train = {{"epochs", config.train.epochs},
                 {"batch_size", config.train.batch_size},
                 {"learning_rate", config.train.learning_rate},
                 {"lambda11", config.train.weights.lambda11},
                 {"lambda22", config.train.weights.lambda22},
                 {"lambda12", config.train.weights.lambda12},
                 {"lambda21", config.train.weights.lambda21},
                 {"lambda_d", config.train.weights.lambda_d},
                 {"multitask_labeled_only", config.train.multitask_labeled_only}};
  if (config.train.class_weights) {
    train["class_weight_negative"] = config.train.class_weights->negative;
    train["class_weight_positive"] = config.train.class_weights->positive;
  }
  njson inference = {{"y0", config.inference.y0},
                     {"iterations", config.inference.iterations}};
  if (config.inference.epsilon) {
    inference["epsilon"] = *config.inference.epsilon;
  }
  return njson{{"dataset", ds},
               {"missing", {{"rate1", config.rate1}, {"rate2", config.rate2}}},
               {"preset", config.preset},
               {"seeds", config.seeds},
               {"methods", methods},
               {"train", train},
               {"inference", inference}};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

std::filesystem::path ensure_out_dir(const std::string& out_dir) {
  std::filesystem::path p(out_dir);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

DllFit fit_dll(const Dataset& train_masked, const ExperimentConfig& config,
               std::uint64_t seed) {
  DllFit fit;
  fit.model = materialize_model(config, train_masked.feature_dim, seed,
                                "dll.init");
  fit.params = init_dual_tower(fit.model);
  TrainConfig tc = config.train;
  tc.seed = derive_seed(seed, "dll.shuffle");
  if (tc.weights.lambda_d > 0.0) {
    ModelConfig marginal_model = fit.model;
    marginal_model.seed = derive_seed(seed, "dll.marginal.init");
    MultiTaskParams marginals = init_multitask(marginal_model);
    TrainConfig mt = tc;
    mt.seed = derive_seed(seed, "dll.marginal.shuffle");
    pretrain_multitask(train_masked, marginal_model, marginals, mt);
    fit.marginals = std::move(marginals);
  }
  fit.history = train(train_masked, fit.model, fit.params,
                      fit.marginals ? &*fit.marginals : nullptr, tc);
  return fit;
}

ExperimentOutput run_experiment(const ExperimentConfig& config,
                                const std::string& out_dir) {
  if (config.seeds.empty()) throw ConfigError("experiment: no seeds");
  if (config.methods.empty()) throw ConfigError("experiment: no methods");

  const Dataset base = load_base_dataset(config);
  const TaskKind task = config.dataset.task();

  ExperimentOutput out;
  EvalCounters counters;
  njson dll_diag = njson::object();
  std::vector<double> val_risks;
  std::vector<double> converged_fractions;
  std::vector<TrainHistory> histories;
  std::vector<std::pair<std::string, Checkpoint>> checkpoints;

  for (const std::uint64_t seed : config.seeds) {
    const SeedData data = prepare_seed_data(base, config, seed);
    for (const Method method : config.methods) {
      if (method == Method::DLL) {
        const DllFit fit = fit_dll(data.train_masked, config, seed);
        const PanelPredictions preds =
            evaluate_dll(fit, data.test, config.inference, counters);
        add_all_panels(out.table, "DLL", task, preds, data.test);
        if (config.inference.epsilon && !data.test.samples.empty()) {
          converged_fractions.push_back(
              static_cast<double>(preds.converged) /
              static_cast<double>(data.test.samples.size()));
        }
        const LabelFn f = [&fit](const std::vector<double>& x, double y1) {
          return f_eval(fit.model, fit.params, x, y1);
        };
        const LabelFn g = [&fit](const std::vector<double>& x, double y2) {
          return g_eval(fit.model, fit.params, x, y2);
        };
        val_risks.push_back(empirical_risk(f, g, data.val, RiskWeights{},
                                           config.train.class_weights));
        histories.push_back(fit.history);
        checkpoints.emplace_back("dll_seed" + std::to_string(seed) + ".ckpt",
                                 make_checkpoint(fit.model, fit.params));
        if (fit.marginals) {
          checkpoints.emplace_back(
              "marginal_seed" + std::to_string(seed) + ".ckpt",
              make_checkpoint(fit.model, *fit.marginals));
        }
      } else {
        BaselineConfig bc;
        bc.model = materialize_model(config, base.feature_dim, seed,
                                     "baseline.model");
        bc.train = config.train;
        bc.seed = derive_seed(seed, "baseline.fit");
        const BaselinePredictor predictor = baseline_fit(
            static_cast<BaselineKind>(static_cast<int>(method) - 1),
            data.train_masked, bc);
        const PanelPredictions preds =
            evaluate_baseline(predictor, data.test, counters);
        add_all_panels(out.table, to_string(method), task, preds, data.test);
      }
    }
  }

  njson doc;
  doc["schema"] = "dll-results-v1";
  doc["config"] = config_to_json(config);
  doc["results"] = table_to_json(out.table);
  njson diag = njson::object();
  diag["label_reveals"] = {{"single", counters.single_reveals},
                           {"double", counters.double_reveals}};
  if (!val_risks.empty()) dll_diag["val_risk"] = val_risks;
  if (!converged_fractions.empty()) {
    dll_diag["converged_fraction"] = converged_fractions;
  }
  if (!dll_diag.empty()) diag["dll"] = dll_diag;
  doc["diagnostics"] = diag;
  out.results_json = doc.dump(2) + "\n";

  if (!out_dir.empty()) {
    const std::filesystem::path dir = ensure_out_dir(out_dir);
    write_text((dir / "results.json").string(), out.results_json);
    for (std::size_t i = 0; i < histories.size(); ++i) {
      const std::string name =
          i == 0 ? "history.csv"
                 : "history_seed" + std::to_string(config.seeds[i]) + ".csv";
      write_history_csv((dir / name).string(), histories[i]);
    }
    for (const auto& [name, ckpt] : checkpoints) {
      save_checkpoint((dir / name).string(), ckpt);
    }
  }
  return out;
}

SweepOutput sweep_missing_rates(const ExperimentConfig& config,
                                const std::vector<double>& rates,
                                const std::string& out_dir) {
  for (double r : rates) {
    if (r < 0.0 || r > 1.0) {
      throw ConfigError("sweep: rates must lie in [0, 1]");
    }
  }
  std::ostringstream csv;
  csv << "rate,method,task,label,seed,metric,value\n";
  char buf[160];
  for (const double rate : rates) {
    ExperimentConfig cell = config;
    cell.rate1 = rate;
    cell.rate2 = rate;
    const ExperimentOutput run = run_experiment(cell, "");
    for (const auto& [method, panels] : run.table.cells()) {
      for (const auto& [panel, metrics] : panels) {
        const auto dash = panel.find('-');
        const std::string task_part = panel.substr(0, dash);
        const std::string label_part = panel.substr(dash + 1);
        for (const auto& [metric, values] : metrics) {
          for (std::size_t i = 0; i < values.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g,%s,%s,%s,%llu,%s,%.17g\n",
                          rate, method.c_str(), task_part.c_str(),
                          label_part.c_str(),
                          static_cast<unsigned long long>(config.seeds[i]),
                          metric.c_str(), values[i]);
            csv << buf;
          }
        }
      }
    }
  }
  SweepOutput out{csv.str()};
  if (!out_dir.empty()) {
    const std::filesystem::path dir = ensure_out_dir(out_dir);
    write_text((dir / "sweep.csv").string(), out.csv);
  }
  return out;
}

AblationOutput run_ablation(const ExperimentConfig& config,
                            const std::string& out_dir) {
  if (config.dataset.task() != TaskKind::BinaryClassification ||
      config.train.weights.lambda_d <= 0.0) {
    throw ConfigError(
        "ablation: requires a classification preset with lambda_d > 0");
  }
  const Dataset base = load_base_dataset(config);
  const TaskKind task = config.dataset.task();

  AblationOutput out;
  EvalCounters counters;
  const std::vector<std::string> stacks = {"f", "a", "a+b", "a+b+c"};

  for (const std::uint64_t seed : config.seeds) {
    const SeedData data = prepare_seed_data(base, config, seed);

    // The marginal model is shared: stack "f" evaluates it directly and
    // stack "a+b+c" regularizes against it.
    ModelConfig marginal_model = materialize_model(
        config, base.feature_dim, seed, "dll.marginal.init");
    MultiTaskParams marginals = init_multitask(marginal_model);
    {
      TrainConfig mt = config.train;
      mt.seed = derive_seed(seed, "dll.marginal.shuffle");
      pretrain_multitask(data.train_masked, marginal_model, marginals, mt);
    }

    for (const std::string& stack : stacks) {
      if (stack == "f") {
        const PanelPredictions preds =
            evaluate_marginals(marginal_model, marginals, data.test);
        add_all_panels(out.table, stack, task, preds, data.test);
        continue;
      }
      ExperimentConfig variant = config;
      if (stack == "a") {
        variant.train.weights.lambda11 = 0.0;
        variant.train.weights.lambda22 = 0.0;
        variant.train.weights.lambda_d = 0.0;
      } else if (stack == "a+b") {
        variant.train.weights.lambda_d = 0.0;
      }
      const DllFit fit = fit_dll(data.train_masked, variant, seed);
      const PanelPredictions preds =
          evaluate_dll(fit, data.test, config.inference, counters);
      add_all_panels(out.table, stack, task, preds, data.test);
    }
  }

  njson doc;
  doc["schema"] = "dll-ablation-v1";
  doc["config"] = config_to_json(config);
  doc["results"] = table_to_json(out.table);
  out.results_json = doc.dump(2) + "\n";

  std::ostringstream csv;
  csv << "stack,seed,task,label,metric,value\n";
  char buf[160];
  for (const auto& [stack, panels] : out.table.cells()) {
    for (const auto& [panel, metrics] : panels) {
      const auto dash = panel.find('-');
      for (const auto& [metric, values] : metrics) {
        for (std::size_t i = 0; i < values.size(); ++i) {
          std::snprintf(buf, sizeof(buf), "%s,%llu,%s,%s,%s,%.17g\n",
                        stack.c_str(),
                        static_cast<unsigned long long>(config.seeds[i]),
                        panel.substr(0, dash).c_str(),
                        panel.substr(dash + 1).c_str(), metric.c_str(),
                        values[i]);
          csv << buf;
        }
      }
    }
  }
  out.csv = csv.str();

  if (!out_dir.empty()) {
    const std::filesystem::path dir = ensure_out_dir(out_dir);
    write_text((dir / "results.json").string(), out.results_json);
    write_text((dir / "ablation.csv").string(), out.csv);
  }
  return out;
}

ConvergenceOutput convergence_report(const ExperimentConfig& config,
                                     const std::string& out_dir) {
  const Dataset base = load_base_dataset(config);
  const TaskKind task = config.dataset.task();
  const std::uint64_t seed = config.seeds.front();
  const SeedData data = prepare_seed_data(base, config, seed);

  ModelConfig model;
  DualTowerParams params;
  if (!config.checkpoint.empty()) {
    const Checkpoint ckpt = load_checkpoint(config.checkpoint);
    model = ckpt.config;
    params = dual_tower_from_checkpoint(ckpt);
  } else {
    DllFit fit = fit_dll(data.train_masked, config, seed);
    model = fit.model;
    params = std::move(fit.params);
  }

  // Unlabeled queries over the whole test split.
  Dataset queries;
  queries.task = task;
  queries.feature_dim = data.test.feature_dim;
  for (const Sample& s : data.test.samples) {
    queries.samples.push_back(double_query(s));
  }
  const DatasetInference inferred =
      infer_dataset(queries, model, params, config.inference,
                    /*keep_traces=*/true);

  ConvergenceOutput out;
  out.metric_name =
      task == TaskKind::BinaryClassification ? "f1" : "mape";
  out.histogram = inferred.iteration_histogram;
  out.converged_fraction = inferred.converged_fraction();

  const std::size_t L = static_cast<std::size_t>(config.inference.iterations);
  std::vector<double> truth_y1, truth_y2;
  for (const Sample& s : data.test.samples) {
    truth_y1.push_back(*s.y1);
    truth_y2.push_back(*s.y2);
  }
  std::vector<double> iter_y1(inferred.traces.size());
  std::vector<double> iter_y2(inferred.traces.size());
  for (std::size_t it = 1; it <= L; ++it) {
    for (std::size_t s = 0; s < inferred.traces.size(); ++s) {
      const auto& iterates = inferred.traces[s].second.iterates;
      // Converged traces stop early; their final iterate carries forward.
      const auto& point = iterates[std::min(it, iterates.size()) - 1];
      iter_y1[s] = point.first;
      iter_y2[s] = point.second;
    }
    if (task == TaskKind::BinaryClassification) {
      std::vector<int> p1(iter_y1.size()), p2(iter_y2.size());
      std::vector<int> t1(truth_y1.size()), t2(truth_y2.size());
      for (std::size_t i = 0; i < iter_y1.size(); ++i) {
        p1[i] = threshold_class(iter_y1[i]);
        p2[i] = threshold_class(iter_y2[i]);
        t1[i] = truth_y1[i] > 0.5 ? 1 : 0;
        t2[i] = truth_y2[i] > 0.5 ? 1 : 0;
      }
      out.metric_y1.push_back(classification_metrics(p1, t1).f1);
      out.metric_y2.push_back(classification_metrics(p2, t2).f1);
    } else {
      out.metric_y1.push_back(mape(iter_y1, truth_y1));
      out.metric_y2.push_back(mape(iter_y2, truth_y2));
    }
  }

  std::ostringstream csv;
  csv << "iteration,metric_y1,metric_y2\n";
  char buf[96];
  for (std::size_t it = 0; it < out.metric_y1.size(); ++it) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", it + 1,
                  out.metric_y1[it], out.metric_y2[it]);
    csv << buf;
  }
  out.csv = csv.str();

  if (!out_dir.empty()) {
    const std::filesystem::path dir = ensure_out_dir(out_dir);
    write_text((dir / "convergence.csv").string(), out.csv);
    DatasetInference capped = inferred;
    if (capped.traces.size() > config.trace_samples) {
      capped.traces.resize(config.trace_samples);
    }
    write_trace_csv((dir / "trace.csv").string(), capped);
    if (config.inference.epsilon) {
      std::ostringstream hist;
      hist << "iteration,count\n";
      for (const auto& [it, count] : out.histogram) {
        hist << it << "," << count << "\n";
      }
      write_text((dir / "histogram.csv").string(), hist.str());
    }
  }
  return out;
}

}  // namespace dll

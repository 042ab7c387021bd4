// Acceptance suite: runs every gate sequentially and prints one PASS/FAIL
// line per criterion. Exits nonzero if any gate fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "json.hpp"

#include "dll/data.hpp"
#include "dll/experiment.hpp"
#include "dll/gradcheck.hpp"
#include "dll/infer.hpp"
#include "dll/synthetic.hpp"
#include "dll/train.hpp"

using namespace dll;
using njson = nlohmann::json;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion,
              detail.c_str());
  if (!pass) ++failures;
}

double seconds_since(
    const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

ModelConfig small_model(TaskKind task, std::uint64_t seed) {
  ModelConfig config;
  config.encoder_widths = {3, 5, 4};
  config.embedding_widths = {1, 2};
  config.tower_widths = {6, 4, 1};
  config.hidden_activation = Activation::Tanh;
  config.task = task;
  config.seed = seed;
  return config;
}

Dataset mixed_batch_dataset() {
  Dataset d;
  d.task = TaskKind::BinaryClassification;
  d.feature_dim = 3;
  d.samples = {
      Sample{{0.1, 0.2, 0.3}, 1.0, 0.0},
      Sample{{0.9, 0.8, 0.7}, 0.0, 1.0},
      Sample{{0.4, 0.5, 0.6}, 1.0, std::nullopt},
      Sample{{0.3, 0.9, 0.2}, 0.0, std::nullopt},
      Sample{{0.6, 0.5, 0.4}, std::nullopt, 1.0},
      Sample{{0.7, 0.2, 0.8}, std::nullopt, 0.0},
  };
  return d;
}

// --------------------------------------------------------------------------
// 1. Gradient fidelity of every loss term against finite differences.
// --------------------------------------------------------------------------
void criterion_1() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::string worst_term;
  for (const std::uint64_t seed : {11u, 22u, 33u}) {
    const ModelConfig config = small_model(TaskKind::BinaryClassification, seed);
    DualTowerParams params = init_dual_tower(config);
    const MultiTaskParams marginals = init_multitask(config);
    const Dataset data = mixed_batch_dataset();
    std::vector<std::size_t> idx(data.samples.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<BatchRow> rows = make_rows(data, idx);
    impute_missing(rows, config, params);
    TrainConfig tc;
    tc.class_weights = ClassWeights{0.3, 0.7};
    tc.weights.lambda_d = 0.2;

    const char* names[5] = {"s1", "s2", "r1", "r2", "d"};
    for (int term = 0; term < 5; ++term) {
      const auto build = [&](Tape& tape) -> Var {
        switch (term) {
          case 0: return supervision_losses(tape, rows, config, params, tc).first;
          case 1: return supervision_losses(tape, rows, config, params, tc).second;
          case 2: return reconstruction_losses(tape, rows, config, params, tc).first;
          case 3: return reconstruction_losses(tape, rows, config, params, tc).second;
          default: return duality_loss(tape, rows, config, params, marginals, tc);
        }
      };
      Tape tape;
      tape.register_group(params.theta0);
      tape.register_group(params.theta1);
      tape.register_group(params.theta2);
      const GradientMap grads = tape.backward(build(tape));
      const GradCheckReport rep = check_gradients(
          [&]() {
            Tape t;
            return t.value(build(t)).scalar();
          },
          {&params.theta0, &params.theta1, &params.theta2}, grads);
      if (rep.max_rel_err > worst) {
        worst = rep.max_rel_err;
        worst_term = names[term];
      }
    }
  }
  const double elapsed = seconds_since(start);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "gradient fidelity: worst rel err %.2e (%s), suite %.1fs",
                worst, worst_term.c_str(), elapsed);
  report(1, worst <= 1e-4 && elapsed < 60.0, buf);
}

// --------------------------------------------------------------------------
// 2. Freezing contract of the reconstruction modes.
// --------------------------------------------------------------------------
void criterion_2() {
  const ModelConfig config = small_model(TaskKind::BinaryClassification, 3);
  const Dataset data = mixed_batch_dataset();
  TrainConfig tc;
  tc.epochs = 1;
  tc.batch_size = 8;
  tc.learning_rate = 0.1;

  DualTowerParams b1 = init_dual_tower(config);
  const DualTowerParams before1 = b1;
  train_mode(TrainMode::B1, data, config, b1, nullptr, tc);
  const bool theta2_frozen = bitwise_equal(b1.theta2, before1.theta2);
  const bool theta1_moved = !bitwise_equal(b1.theta1, before1.theta1);

  DualTowerParams b2 = init_dual_tower(config);
  const DualTowerParams before2 = b2;
  train_mode(TrainMode::B2, data, config, b2, nullptr, tc);
  const bool theta1_frozen = bitwise_equal(b2.theta1, before2.theta1);

  report(2, theta2_frozen && theta1_moved && theta1_frozen,
         "freezing: mode b1 keeps theta2 bit-identical, b2 keeps theta1");
}

// --------------------------------------------------------------------------
// 3. Reduction equivalence: zeroed extra terms reproduce mode (a).
// --------------------------------------------------------------------------
void criterion_3() {
  const Dataset data = gen_synthetic_classification(40, 3, 77);
  const ModelConfig config = small_model(TaskKind::BinaryClassification, 5);
  TrainConfig tc;
  tc.epochs = 5;
  tc.batch_size = 4;
  tc.learning_rate = 0.05;
  tc.seed = 9;
  tc.weights = LossWeights{.lambda11 = 0.0,
                           .lambda22 = 0.0,
                           .lambda12 = 1.0,
                           .lambda21 = 2.0,
                           .lambda_d = 0.0};

  DualTowerParams integrated = init_dual_tower(config);
  train(data, config, integrated, nullptr, tc);
  DualTowerParams mode_a = init_dual_tower(config);
  train_mode(TrainMode::A, data, config, mode_a, nullptr, tc);

  const bool equal = bitwise_equal(integrated.theta0, mode_a.theta0) &&
                     bitwise_equal(integrated.theta1, mode_a.theta1) &&
                     bitwise_equal(integrated.theta2, mode_a.theta2);
  report(3, equal,
         "reduction: 5 epochs of the integrated loop match mode (a) "
         "bit-exactly");
}

// --------------------------------------------------------------------------
// 4. Duality loss exactness.
// --------------------------------------------------------------------------
void criterion_4() {
  const double ln2 = std::log(2.0);
  const double hand = duality_gap_squared(0.5, 0.8, 0.5, 0.4);
  const bool hand_ok = std::abs(hand - ln2 * ln2) <= 1e-12;
  const bool cancel_ok = duality_gap_squared(0.37, 0.62, 0.37, 0.62) <= 1e-12;

  // Model-level symmetric cancellation: both towers and both marginal
  // heads pinned at probability 0.5.
  const ModelConfig config = small_model(TaskKind::BinaryClassification, 6);
  DualTowerParams params = init_dual_tower(config);
  params.theta1.at("tw1.W1").fill(0.0);
  params.theta1.at("tw1.b1").fill(0.0);
  params.theta2.at("tw2.W1").fill(0.0);
  params.theta2.at("tw2.b1").fill(0.0);
  MultiTaskParams marginals = init_multitask(config);
  marginals.head1.at("head1.W1").fill(0.0);
  marginals.head1.at("head1.b1").fill(0.0);
  marginals.head2.at("head2.W1").fill(0.0);
  marginals.head2.at("head2.b1").fill(0.0);
  const Dataset data = mixed_batch_dataset();
  std::vector<std::size_t> idx(data.samples.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<BatchRow> rows = make_rows(data, idx);
  impute_missing(rows, config, params);
  TrainConfig tc;
  tc.weights.lambda_d = 1.0;
  Tape tape;
  Var d = duality_loss(tape, rows, config, params, marginals, tc);
  const bool model_ok = tape.value(d).scalar() <= 1e-12;

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "duality exactness: (ln 2)^2 delta %.1e, cancellation %.1e",
                std::abs(hand - ln2 * ln2), tape.value(d).scalar());
  report(4, hand_ok && cancel_ok && model_ok, buf);
}

// --------------------------------------------------------------------------
// 5. Fixed-point solver on the half-contraction stubs.
// --------------------------------------------------------------------------
void criterion_5() {
  const auto half = [](double v) { return 0.5 * v; };
  InferenceConfig cfg;
  cfg.y0 = 1.0;
  cfg.iterations = 12;
  const SolveResult r = alternate_solve(half, half, cfg);

  bool decay_ok = true;
  double expected = 1.0;
  std::size_t reached_at = 0;
  for (std::size_t k = 0; k < r.trace.iterates.size(); ++k) {
    expected *= 0.25;  // y1 after k+1 full iterations = 4^-(k+1)
    if (std::abs(r.trace.iterates[k].first - expected) > 1e-12) {
      decay_ok = false;
    }
    if (reached_at == 0 && std::abs(r.trace.iterates[k].first) < 1e-6) {
      reached_at = k + 1;
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "fixed point: |y1| < 1e-6 after %zu iterations, 4^-k decay "
                "within 1e-12",
                reached_at);
  report(5, decay_ok && reached_at > 0 && reached_at <= 12, buf);
}

// --------------------------------------------------------------------------
// 6. Convergence and throughput echo on trained regression towers.
// --------------------------------------------------------------------------
void criterion_6() {
  // One draw with a shared ground truth; first 2000 rows train, last 2000
  // form the unlabeled evaluation set.
  const Dataset all = gen_synthetic_regression(4000, 10, 31);
  Dataset train_part, eval_part;
  train_part.task = eval_part.task = TaskKind::Regression;
  train_part.feature_dim = eval_part.feature_dim = 10;
  for (std::size_t i = 0; i < 2000; ++i) {
    train_part.samples.push_back(all.samples[i]);
  }
  for (std::size_t i = 2000; i < 4000; ++i) {
    eval_part.samples.push_back(all.samples[i]);
  }
  MinMaxScaler scaler;
  scaler.fit(train_part);
  scaler.transform(train_part);
  scaler.transform(eval_part);

  const Dataset masked = mask_labels(train_part, 0.3, 0.3, 41);

  ModelConfig model = default_model_config(10, TaskKind::Regression, 1001);
  const Preset preset = get_preset("higgs");
  TrainConfig tc;
  tc.weights = preset.weights;
  tc.batch_size = preset.batch_size;
  tc.epochs = preset.epochs;
  tc.learning_rate = 0.01;
  tc.seed = 2002;
  DualTowerParams params = init_dual_tower(model);
  train(masked, model, params, nullptr, tc);

  Dataset queries;
  queries.task = TaskKind::Regression;
  queries.feature_dim = 10;
  for (const Sample& s : eval_part.samples) {
    queries.samples.push_back(Sample{s.x, std::nullopt, std::nullopt});
  }

  // (a) Convergence: >= 80% of samples settle within 10 iterations at
  // delta < 1e-4.
  InferenceConfig converge_cfg;
  converge_cfg.y0 = preset.y0;
  converge_cfg.iterations = preset.iterations;
  converge_cfg.epsilon = 1e-4;
  const DatasetInference with_eps =
      infer_dataset(queries, model, params, converge_cfg);
  std::size_t within_10 = 0;
  for (const auto& dp : with_eps.doubles) {
    if (dp.converged_at && *dp.converged_at <= 10) ++within_10;
  }
  const double frac =
      static_cast<double>(within_10) / static_cast<double>(queries.size());

  // (b) Throughput: the full 1000 iterations over 2000 samples in < 10 s.
  InferenceConfig timing_cfg;
  timing_cfg.y0 = preset.y0;
  timing_cfg.iterations = preset.iterations;
  const auto start = std::chrono::steady_clock::now();
  const DatasetInference full =
      infer_dataset(queries, model, params, timing_cfg);
  const double elapsed = seconds_since(start);

  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "convergence echo: %.1f%% within 10 iterations, %zu samples "
                "x %d iterations in %.2fs",
                100.0 * frac, full.doubles.size(), timing_cfg.iterations,
                elapsed);
  report(6, frac >= 0.8 && elapsed < 10.0, buf);
}

// --------------------------------------------------------------------------
// 7. Ordering echo: single <= double + tolerance; DLL double <= ID double.
// --------------------------------------------------------------------------
// Small-sample regime where the dual objectives pay off; used for the
// method-ordering gate.
ExperimentConfig echo7_config() {
  ExperimentConfig config;
  config.dataset.synthetic = SyntheticSpec{TaskKind::Regression, 400, 8, 13};
  config.rate1 = config.rate2 = 0.3;
  apply_preset(config, get_preset("higgs"));
  config.train.epochs = 400;
  config.train.learning_rate = 0.05;
  config.inference.epsilon = 1e-6;
  config.seeds = {1, 2, 3, 4, 5};
  config.methods = {Method::DLL, Method::ID};
  return config;
}

// Shorter-horizon regime where the masking rate bites; used for the
// sensitivity gate.
ExperimentConfig echo8_config() {
  ExperimentConfig config;
  config.dataset.synthetic = SyntheticSpec{TaskKind::Regression, 800, 8, 13};
  config.rate1 = config.rate2 = 0.3;
  apply_preset(config, get_preset("higgs"));
  config.train.epochs = 40;
  config.train.learning_rate = 0.01;
  config.inference.epsilon = 1e-6;
  config.seeds = {1, 2, 3, 4, 5};
  config.methods = {Method::DLL};
  return config;
}

double panel_mean(const njson& results, const std::string& method,
                  const std::string& panel) {
  return results[method][panel]["mape"]["mean"].get<double>();
}

void criterion_7() {
  const ExperimentConfig config = echo7_config();
  const ExperimentOutput out = run_experiment(config, "");
  const njson results = njson::parse(out.results_json)["results"];

  const double dll_s1 = panel_mean(results, "DLL", "Single-y1");
  const double dll_s2 = panel_mean(results, "DLL", "Single-y2");
  const double dll_d1 = panel_mean(results, "DLL", "Double-y1");
  const double dll_d2 = panel_mean(results, "DLL", "Double-y2");
  const double id_d1 = panel_mean(results, "ID", "Double-y1");
  const double id_d2 = panel_mean(results, "ID", "Double-y2");

  const bool single_ok =
      dll_s1 <= dll_d1 + 0.005 && dll_s2 <= dll_d2 + 0.005;
  const bool beats_id = dll_d1 <= id_d1 && dll_d2 <= id_d2;
  char buf[240];
  std::snprintf(buf, sizeof(buf),
                "ordering echo: DLL single (%.4f, %.4f) vs double (%.4f, "
                "%.4f); ID double (%.4f, %.4f)",
                dll_s1, dll_s2, dll_d1, dll_d2, id_d1, id_d2);
  report(7, single_ok && beats_id, buf);
}

// --------------------------------------------------------------------------
// 8. Sensitivity echo: MAPE deteriorates as the missing rate grows.
// --------------------------------------------------------------------------
double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    std::vector<double> r(v.size());
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
      r[order[rank]] = static_cast<double>(rank);
    }
    return r;
  };
  const std::vector<double> ra = ranks(a);
  const std::vector<double> rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = ra[i] - rb[i];
    d2 += d * d;
  }
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

void criterion_8() {
  ExperimentConfig config = echo8_config();
  const std::vector<double> rates{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};

  std::vector<double> mean_mape;
  for (const double rate : rates) {
    ExperimentConfig cell = config;
    cell.rate1 = cell.rate2 = rate;
    const ExperimentOutput out = run_experiment(cell, "");
    const njson results = njson::parse(out.results_json)["results"];
    double acc = 0.0;
    for (const char* panel :
         {"Single-y1", "Single-y2", "Double-y1", "Double-y2"}) {
      acc += panel_mean(results, "DLL", panel);
    }
    mean_mape.push_back(acc / 4.0);
  }
  const double rho = spearman(
      std::vector<double>(rates.begin(), rates.end()), mean_mape);
  char buf[240];
  std::string series;
  for (double m : mean_mape) {
    char one[32];
    std::snprintf(one, sizeof(one), " %.4f", m);
    series += one;
  }
  std::snprintf(buf, sizeof(buf),
                "sensitivity echo: spearman %.3f over rates 0.1..0.6;%s",
                rho, series.c_str());
  report(8, rho >= 0.7, buf);
}

// --------------------------------------------------------------------------
// 9. Preset fidelity.
// --------------------------------------------------------------------------
void criterion_9() {
  const Preset tox = get_preset("tox21");
  const Preset higgs = get_preset("higgs");
  const Preset mof = get_preset("mof");
  const bool tox_ok = tox.weights.lambda11 == 2.0 &&
                      tox.weights.lambda21 == 2.0 &&
                      tox.weights.lambda12 == 1.0 &&
                      tox.weights.lambda22 == 1.0 &&
                      tox.weights.lambda_d == 0.2 && tox.batch_size == 4 &&
                      tox.class_weights && tox.class_weights->positive == 0.7 &&
                      tox.class_weights->negative == 0.3 && tox.y0 == 0.5;
  const bool higgs_ok = higgs.weights.lambda11 == 1.0 &&
                        higgs.weights.lambda21 == 1.0 &&
                        higgs.weights.lambda12 == 1.0 &&
                        higgs.weights.lambda22 == 1.0 &&
                        higgs.weights.lambda_d == 0.0 &&
                        higgs.batch_size == 4 && higgs.y0 == 1.0;
  const bool mof_ok = mof.weights.lambda11 == 2.0 &&
                      mof.weights.lambda21 == 2.0 &&
                      mof.weights.lambda12 == 1.0 &&
                      mof.weights.lambda22 == 1.0 &&
                      mof.weights.lambda_d == 0.0 && mof.batch_size == 1 &&
                      mof.y0 == 1.0;
  const bool shared_ok = tox.epochs == 100 && higgs.epochs == 100 &&
                         mof.epochs == 100 && tox.iterations == 1000 &&
                         higgs.iterations == 1000 && mof.iterations == 1000;
  report(9, tox_ok && higgs_ok && mof_ok && shared_ok,
         "presets match the published hyperparameters exactly");
}

// --------------------------------------------------------------------------
// 10. Byte determinism of results.json.
// --------------------------------------------------------------------------
void criterion_10() {
  ExperimentConfig config;
  config.dataset.synthetic = SyntheticSpec{TaskKind::Regression, 120, 4, 21};
  config.rate1 = config.rate2 = 0.3;
  config.model.encoder_widths = {0, 8, 4};
  config.model.embedding_widths = {1, 2};
  config.model.tower_widths = {6, 4, 1};
  config.train.epochs = 4;
  config.train.batch_size = 4;
  config.train.learning_rate = 0.02;
  config.inference.iterations = 25;
  config.inference.epsilon = 1e-6;
  config.seeds = {1, 2};
  config.methods = {Method::DLL, Method::LS};
  const ExperimentOutput a = run_experiment(config, "");
  const ExperimentOutput b = run_experiment(config, "");
  report(10, !a.results_json.empty() && a.results_json == b.results_json,
         "determinism: repeated runs emit byte-identical results.json");
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  if (failures) {
    std::printf("%d acceptance criteria failed\n", failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}

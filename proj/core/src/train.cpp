#include "dll/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "dll/error.hpp"
#include "dll/rng.hpp"

namespace dll {

namespace {

bool in_labeled(const BatchRow& r) { return r.y1_present && r.y2_present; }
bool in_y1_only(const BatchRow& r) { return r.y1_present && !r.y2_present; }
bool in_y2_only(const BatchRow& r) { return !r.y1_present && r.y2_present; }

std::size_t label_index(double y) { return y > 0.5 ? 1 : 0; }

Var label_loss(Tape& tape, const ModelConfig& config, const TrainConfig& train,
               Var prediction, double target) {
  return task_loss(tape, config.task, train.class_weights, prediction, target);
}

// y * log p + (1 - y) * log(1 - p), logs floored; p tracked, y constant.
Var log_likelihood(Tape& tape, Var p, double y) {
  Var log_p = tape.log_clamped(p);
  Var log_q = tape.log_clamped(tape.sub(tape.constant(1.0), p));
  return tape.add(tape.scale(log_p, y), tape.scale(log_q, 1.0 - y));
}

double log_likelihood_value(double p, double y) {
  const double lp = std::log(std::max(p, kLogFloor));
  const double lq = std::log(std::max(1.0 - p, kLogFloor));
  return y * lp + (1.0 - y) * lq;
}

void check_finite(const char* what, double v) {
  if (!std::isfinite(v)) {
    throw NumericError(std::string(what) + ": non-finite loss value");
  }
}

}  // namespace

Var task_loss(Tape& tape, TaskKind task,
              const std::optional<ClassWeights>& class_weights, Var prediction,
              double target) {
  if (task == TaskKind::BinaryClassification) {
    std::vector<double> weights{1.0, 1.0};
    if (class_weights) {
      weights = {class_weights->negative, class_weights->positive};
    }
    return tape.cross_entropy(tape.bernoulli_pair(prediction),
                              label_index(target), &weights);
  }
  return tape.mse(prediction, tape.constant(target));
}

std::vector<BatchRow> make_rows(const Dataset& dataset,
                                std::span<const std::size_t> indices) {
  std::vector<BatchRow> rows;
  rows.reserve(indices.size());
  for (std::size_t i : indices) {
    const Sample& s = dataset.samples.at(i);
    BatchRow row;
    row.x = &s.x;
    if (s.y1) {
      row.y1 = *s.y1;
      row.y1_present = true;
    }
    if (s.y2) {
      row.y2 = *s.y2;
      row.y2_present = true;
    }
    rows.push_back(row);
  }
  return rows;
}

void impute_missing(std::vector<BatchRow>& batch, const ModelConfig& config,
                    const DualTowerParams& params) {
  for (BatchRow& row : batch) {
    if (in_y1_only(row) && !row.y2_imputed) {
      row.y2 = f_eval(config, params, *row.x, row.y1);
      row.y2_imputed = true;
    } else if (in_y2_only(row) && !row.y1_imputed) {
      row.y1 = g_eval(config, params, *row.x, row.y2);
      row.y1_imputed = true;
    }
  }
}

std::pair<Var, Var> supervision_losses(Tape& tape,
                                       std::span<const BatchRow> batch,
                                       const ModelConfig& config,
                                       const DualTowerParams& params,
                                       const TrainConfig& train) {
  const LossWeights& w = train.weights;
  Var s1 = tape.constant(0.0);
  Var s2 = tape.constant(0.0);
  bool any1 = false, any2 = false;
  for (const BatchRow& row : batch) {
    if (!in_labeled(row)) continue;
    if (w.lambda21 != 0.0) {
      Var g = g_forward(tape, config, params, *row.x, tape.constant(row.y2));
      Var term = label_loss(tape, config, train, g, row.y1);
      s1 = any1 ? tape.add(s1, term) : term;
      any1 = true;
    }
    if (w.lambda12 != 0.0) {
      Var f = f_forward(tape, config, params, *row.x, tape.constant(row.y1));
      Var term = label_loss(tape, config, train, f, row.y2);
      s2 = any2 ? tape.add(s2, term) : term;
      any2 = true;
    }
  }
  if (any1) s1 = tape.scale(s1, w.lambda21);
  if (any2) s2 = tape.scale(s2, w.lambda12);
  return {s1, s2};
}

std::pair<Var, Var> reconstruction_losses(Tape& tape,
                                          std::span<const BatchRow> batch,
                                          const ModelConfig& config,
                                          const DualTowerParams& params,
                                          const TrainConfig& train) {
  const LossWeights& w = train.weights;
  Var r1 = tape.constant(0.0);
  Var r2 = tape.constant(0.0);
  bool any1 = false, any2 = false;
  for (const BatchRow& row : batch) {
    if (in_y1_only(row)) {
      if (!row.y2_imputed) {
        throw ContractError("reconstruction_losses: batch not imputed");
      }
      if (w.lambda11 == 0.0) continue;
      // The imputed y2 enters as a constant: no gradient reaches the tower
      // that produced it.
      Var g = g_forward(tape, config, params, *row.x, tape.constant(row.y2));
      Var term = label_loss(tape, config, train, g, row.y1);
      r1 = any1 ? tape.add(r1, term) : term;
      any1 = true;
    } else if (in_y2_only(row)) {
      if (!row.y1_imputed) {
        throw ContractError("reconstruction_losses: batch not imputed");
      }
      if (w.lambda22 == 0.0) continue;
      Var f = f_forward(tape, config, params, *row.x, tape.constant(row.y1));
      Var term = label_loss(tape, config, train, f, row.y2);
      r2 = any2 ? tape.add(r2, term) : term;
      any2 = true;
    }
  }
  if (any1) r1 = tape.scale(r1, w.lambda11);
  if (any2) r2 = tape.scale(r2, w.lambda22);
  return {r1, r2};
}

double duality_gap_squared(double p_m1, double p_f, double p_m2, double p_g) {
  const auto floored = [](double p) { return std::max(p, kLogFloor); };
  const double gap = std::log(floored(p_m1)) + std::log(floored(p_f)) -
                     std::log(floored(p_m2)) - std::log(floored(p_g));
  return gap * gap;
}

Var duality_loss(Tape& tape, std::span<const BatchRow> batch,
                 const ModelConfig& config, const DualTowerParams& params,
                 const MultiTaskParams& marginals, const TrainConfig& train) {
  const double lambda_d = train.weights.lambda_d;
  if (lambda_d == 0.0) return tape.constant(0.0);
  if (config.task != TaskKind::BinaryClassification) {
    throw ConfigError(
        "duality loss: unsupported configuration, lambda_d > 0 requires a "
        "binary classification task");
  }
  Var d = tape.constant(0.0);
  bool any = false;
  for (const BatchRow& row : batch) {
    const bool has1 = row.y1_present || row.y1_imputed;
    const bool has2 = row.y2_present || row.y2_imputed;
    if (!has1 && !has2) continue;  // unlabeled rows carry no duality term
    if (!has1 || !has2) {
      throw ContractError("duality_loss: batch not imputed");
    }
    // Marginal probabilities are detached estimates from the pretrained
    // model.
    const auto [q1, q2] = m_eval(config, marginals, *row.x);
    const double log_pm1 = log_likelihood_value(q1, row.y1);
    const double log_pm2 = log_likelihood_value(q2, row.y2);

    Var p_f = f_forward(tape, config, params, *row.x, tape.constant(row.y1));
    Var p_g = g_forward(tape, config, params, *row.x, tape.constant(row.y2));
    Var lhs = tape.add(tape.constant(log_pm1),
                       log_likelihood(tape, p_f, row.y2));
    Var rhs = tape.add(tape.constant(log_pm2),
                       log_likelihood(tape, p_g, row.y1));
    Var term = tape.square(tape.sub(lhs, rhs));
    d = any ? tape.add(d, term) : term;
    any = true;
  }
  if (any) d = tape.scale(d, lambda_d);
  return d;
}

namespace {

struct EngineOpts {
  bool pool_labeled = false;
  bool pool_y1_only = false;
  bool pool_y2_only = false;
  bool supervision = false;
  bool reconstruction = false;
  bool duality = false;
  bool update0 = true;
  bool update1 = true;
  bool update2 = true;
  const char* what = "train";
};

void validate_train_config(const TrainConfig& train) {
  if (train.epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (train.batch_size < 1) throw ConfigError("train: batch size must be >= 1");
  if (!(train.learning_rate > 0.0)) {
    throw ConfigError("train: learning rate must be positive");
  }
  const LossWeights& w = train.weights;
  for (double v : {w.lambda11, w.lambda22, w.lambda12, w.lambda21, w.lambda_d}) {
    if (v < 0.0) throw ConfigError("train: loss coefficients must be >= 0");
  }
}

TrainHistory run_engine(const Dataset& data, const ModelConfig& config,
                        DualTowerParams& params,
                        const MultiTaskParams* marginals,
                        const TrainConfig& train, const EngineOpts& opts) {
  validate_train_config(train);
  validate_model_config(config);
  const bool wants_duality = opts.duality && train.weights.lambda_d != 0.0;
  if (wants_duality && !marginals) {
    throw ConfigError(std::string(opts.what) +
                      ": lambda_d > 0 requires a pretrained marginal model");
  }

  const DatasetSplit split = partition(data);
  std::vector<std::size_t> pool;
  if (opts.pool_labeled) {
    pool.insert(pool.end(), split.labeled.begin(), split.labeled.end());
  }
  if (opts.pool_y1_only) {
    pool.insert(pool.end(), split.y1_only.begin(), split.y1_only.end());
  }
  if (opts.pool_y2_only) {
    pool.insert(pool.end(), split.y2_only.begin(), split.y2_only.end());
  }
  if (pool.empty()) {
    throw ConfigError(std::string(opts.what) + ": empty training set");
  }

  const std::size_t batch_size = static_cast<std::size_t>(train.batch_size);
  const double inv_b = 1.0 / static_cast<double>(batch_size);
  Rng shuffle_rng = Rng(train.seed).substream("train.shuffle");

  TrainHistory history;
  history.reserve(static_cast<std::size_t>(train.epochs));
  for (int epoch = 0; epoch < train.epochs; ++epoch) {
    shuffle(pool, shuffle_rng);
    LossBreakdown epoch_losses;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < pool.size(); start += batch_size) {
      const std::size_t count = std::min(batch_size, pool.size() - start);
      std::vector<BatchRow> rows = make_rows(
          data, std::span<const std::size_t>(pool).subspan(start, count));
      impute_missing(rows, config, params);

      Tape tape;
      tape.register_group(params.theta0);
      tape.register_group(params.theta1);
      tape.register_group(params.theta2);

      Var s1 = tape.constant(0.0);
      Var s2 = tape.constant(0.0);
      Var r1 = tape.constant(0.0);
      Var r2 = tape.constant(0.0);
      Var d = tape.constant(0.0);
      if (opts.supervision) {
        std::tie(s1, s2) = supervision_losses(tape, rows, config, params, train);
      }
      if (opts.reconstruction) {
        std::tie(r1, r2) =
            reconstruction_losses(tape, rows, config, params, train);
      }
      if (wants_duality) {
        d = duality_loss(tape, rows, config, params, *marginals, train);
      }
      Var total = tape.add(tape.add(tape.add(tape.add(s1, s2), r1), r2), d);
      Var objective = tape.scale(total, inv_b);
      check_finite(opts.what, tape.value(objective).scalar());

      const GradientMap grads = tape.backward(objective);
      if (opts.update0) sgd_step(params.theta0, grads, train.learning_rate);
      if (opts.update1) sgd_step(params.theta1, grads, train.learning_rate);
      if (opts.update2) sgd_step(params.theta2, grads, train.learning_rate);

      epoch_losses.s1 += tape.value(s1).scalar() * inv_b;
      epoch_losses.s2 += tape.value(s2).scalar() * inv_b;
      epoch_losses.r1 += tape.value(r1).scalar() * inv_b;
      epoch_losses.r2 += tape.value(r2).scalar() * inv_b;
      epoch_losses.d += tape.value(d).scalar() * inv_b;
      ++batches;
    }
    const double inv_batches = 1.0 / static_cast<double>(batches);
    epoch_losses.s1 *= inv_batches;
    epoch_losses.s2 *= inv_batches;
    epoch_losses.r1 *= inv_batches;
    epoch_losses.r2 *= inv_batches;
    epoch_losses.d *= inv_batches;
    history.push_back(epoch_losses);
  }
  return history;
}

}  // namespace

TrainHistory train(const Dataset& data, const ModelConfig& config,
                   DualTowerParams& params, const MultiTaskParams* marginals,
                   const TrainConfig& train_config) {
  EngineOpts opts;
  opts.pool_labeled = opts.pool_y1_only = opts.pool_y2_only = true;
  opts.supervision = opts.reconstruction = opts.duality = true;
  opts.what = "train";
  return run_engine(data, config, params, marginals, train_config, opts);
}

TrainHistory train_mode(TrainMode mode, const Dataset& data,
                        const ModelConfig& config, DualTowerParams& params,
                        const MultiTaskParams* marginals,
                        const TrainConfig& train_config) {
  EngineOpts opts;
  switch (mode) {
    case TrainMode::A:
      opts.pool_labeled = true;
      opts.supervision = true;
      opts.what = "train_mode(a)";
      break;
    case TrainMode::B1:
      opts.pool_y1_only = true;
      opts.reconstruction = true;
      opts.update2 = false;
      opts.what = "train_mode(b1)";
      break;
    case TrainMode::B2:
      opts.pool_y2_only = true;
      opts.reconstruction = true;
      opts.update1 = false;
      opts.what = "train_mode(b2)";
      break;
    case TrainMode::C:
      opts.pool_labeled = opts.pool_y1_only = opts.pool_y2_only = true;
      opts.duality = true;
      opts.what = "train_mode(c)";
      if (!marginals) {
        throw ConfigError("train_mode(c): requires a pretrained marginal model");
      }
      break;
  }
  if (mode == TrainMode::B1 || mode == TrainMode::B2) {
    const DatasetSplit split = partition(data);
    const auto& subset =
        mode == TrainMode::B1 ? split.y1_only : split.y2_only;
    if (subset.empty()) {
      std::cerr << opts.what
                << ": semi-labeled subset is empty, nothing to do\n";
      return {};
    }
  }
  return run_engine(data, config, params, marginals, train_config, opts);
}

TrainHistory pretrain_multitask(const Dataset& data, const ModelConfig& config,
                                MultiTaskParams& params,
                                const TrainConfig& train_config) {
  validate_train_config(train_config);
  validate_model_config(config);

  const DatasetSplit split = partition(data);
  std::vector<std::size_t> pool;
  std::size_t with_y1 = 0, with_y2 = 0;
  if (train_config.multitask_labeled_only) {
    pool = split.labeled;
    with_y1 = with_y2 = pool.size();
  } else {
    for (std::size_t i = 0; i < data.samples.size(); ++i) {
      const PresenceMask u = presence_indicator(data.samples[i]);
      if (!u.y1_present && !u.y2_present) continue;
      pool.push_back(i);
      if (u.y1_present) ++with_y1;
      if (u.y2_present) ++with_y2;
    }
  }
  if (with_y1 == 0) {
    throw ConfigError("pretrain_multitask: no samples carry label y1");
  }
  if (with_y2 == 0) {
    throw ConfigError("pretrain_multitask: no samples carry label y2");
  }

  const std::size_t batch_size =
      static_cast<std::size_t>(train_config.batch_size);
  const double inv_b = 1.0 / static_cast<double>(batch_size);
  Rng shuffle_rng = Rng(train_config.seed).substream("pretrain.shuffle");

  TrainHistory history;
  history.reserve(static_cast<std::size_t>(train_config.epochs));
  for (int epoch = 0; epoch < train_config.epochs; ++epoch) {
    shuffle(pool, shuffle_rng);
    LossBreakdown epoch_losses;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < pool.size(); start += batch_size) {
      const std::size_t count = std::min(batch_size, pool.size() - start);
      Tape tape;
      tape.register_group(params.encoder);
      tape.register_group(params.head1);
      tape.register_group(params.head2);
      Var l1 = tape.constant(0.0);
      Var l2 = tape.constant(0.0);
      bool any1 = false, any2 = false;
      for (std::size_t k = 0; k < count; ++k) {
        const Sample& s = data.samples[pool[start + k]];
        const auto [h1, h2] = m_forward(tape, config, params, s.x);
        if (s.y1) {
          Var term = label_loss(tape, config, train_config, h1, *s.y1);
          l1 = any1 ? tape.add(l1, term) : term;
          any1 = true;
        }
        if (s.y2) {
          Var term = label_loss(tape, config, train_config, h2, *s.y2);
          l2 = any2 ? tape.add(l2, term) : term;
          any2 = true;
        }
      }
      Var objective = tape.scale(tape.add(l1, l2), inv_b);
      check_finite("pretrain_multitask", tape.value(objective).scalar());
      const GradientMap grads = tape.backward(objective);
      sgd_step(params.encoder, grads, train_config.learning_rate);
      sgd_step(params.head1, grads, train_config.learning_rate);
      sgd_step(params.head2, grads, train_config.learning_rate);
      epoch_losses.s1 += tape.value(l1).scalar() * inv_b;
      epoch_losses.s2 += tape.value(l2).scalar() * inv_b;
      ++batches;
    }
    const double inv_batches = 1.0 / static_cast<double>(batches);
    epoch_losses.s1 *= inv_batches;
    epoch_losses.s2 *= inv_batches;
    history.push_back(epoch_losses);
  }
  return history;
}

void write_history_csv(const std::string& path, const TrainHistory& history) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("history: cannot write '" + path + "'");
  out << "epoch,s1,s2,r1,r2,d,total\n";
  char buf[160];
  for (std::size_t i = 0; i < history.size(); ++i) {
    const LossBreakdown& e = history[i];
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  i + 1, e.s1, e.s2, e.r1, e.r2, e.d, e.total());
    out << buf;
  }
}

}  // namespace dll

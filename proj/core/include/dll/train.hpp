#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dll/data.hpp"
#include "dll/model.hpp"
#include "dll/tape.hpp"

namespace dll {

// Coefficients of the training objective. lambda21/lambda12 scale the
// supervision losses on fully labeled samples, lambda11/lambda22 the
// reconstruction losses on semi-labeled samples, lambda_d the duality
// regularizer.
struct LossWeights {
  double lambda11 = 1.0;
  double lambda22 = 1.0;
  double lambda12 = 1.0;
  double lambda21 = 1.0;
  double lambda_d = 0.0;
};

// Per-class loss weights for binary classification: {negative (class 0),
// positive (class 1)}.
struct ClassWeights {
  double negative = 1.0;
  double positive = 1.0;
};

struct TrainConfig {
  int epochs = 100;
  int batch_size = 4;
  double learning_rate = 0.05;
  LossWeights weights;
  std::optional<ClassWeights> class_weights;
  std::uint64_t seed = 0;
  // When true the marginal model trains on fully labeled samples only;
  // otherwise each head uses every sample where its label is present.
  bool multitask_labeled_only = false;
};

// Batch-mean loss terms for one epoch. Each term is the lambda-weighted
// per-batch sum divided by the batch size, averaged over the epoch's
// batches; a term whose index subset never appears is exactly 0.
struct LossBreakdown {
  double s1 = 0.0;  // supervision on y1 (through g)
  double s2 = 0.0;  // supervision on y2 (through f)
  double r1 = 0.0;  // reconstruction of y1 from imputed y2
  double r2 = 0.0;  // reconstruction of y2 from imputed y1
  double d = 0.0;   // probabilistic-duality regularizer

  double total() const { return s1 + s2 + r1 + r2 + d; }
};

using TrainHistory = std::vector<LossBreakdown>;

// Training-time view of a sample. Missing labels may be filled in by
// impute_missing, which marks them as estimates; imputed values are
// constants in every loss (no gradient flows back through the tower that
// produced them).
struct BatchRow {
  const std::vector<double>* x = nullptr;
  double y1 = 0.0;
  double y2 = 0.0;
  bool y1_present = false;
  bool y2_present = false;
  bool y1_imputed = false;
  bool y2_imputed = false;

  bool fully_labeled() const { return y1_present && y2_present; }
};

std::vector<BatchRow> make_rows(const Dataset& dataset,
                                std::span<const std::size_t> indices);

// Fills each row's missing label from the opposite tower: rows with only
// y1 get y2 <- f(x, y1), rows with only y2 get y1 <- g(x, y2). Values are
// detached estimates. Fully labeled and unlabeled rows are untouched.
void impute_missing(std::vector<BatchRow>& batch, const ModelConfig& config,
                    const DualTowerParams& params);

// s1 = lambda21 * sum l1(g(x, y2), y1) and s2 = lambda12 * sum
// l2(f(x, y1), y2) over the fully labeled rows of the batch. l1/l2 are
// cross-entropy (classification, honoring class weights) or MSE
// (regression).
std::pair<Var, Var> supervision_losses(Tape& tape,
                                       std::span<const BatchRow> batch,
                                       const ModelConfig& config,
                                       const DualTowerParams& params,
                                       const TrainConfig& train);

// r1 = lambda11 * sum l1(g(x, y2_imputed), y1) over rows with only y1;
// r2 symmetric. Rows must have been imputed.
std::pair<Var, Var> reconstruction_losses(Tape& tape,
                                          std::span<const BatchRow> batch,
                                          const ModelConfig& config,
                                          const DualTowerParams& params,
                                          const TrainConfig& train);

// Task loss of a scalar prediction against a hard target: weighted
// cross-entropy of the implied two-class distribution (classification) or
// squared error (regression).
Var task_loss(Tape& tape, TaskKind task,
              const std::optional<ClassWeights>& class_weights, Var prediction,
              double target);

// Squared log-space violation of the probabilistic-duality identity for
// four probabilities; logs are floored at kLogFloor.
double duality_gap_squared(double p_m1, double p_f, double p_m2, double p_g);

// d = lambda_d * sum over all (possibly imputed) rows of
// (log P_M(y1|x) + log P_f(y2|x,y1) - log P_M(y2|x) - log P_g(y1|x,y2))^2.
// Marginal probabilities are detached. Only defined for binary
// classification; lambda_d > 0 with a regression task is a configuration
// error.
Var duality_loss(Tape& tape, std::span<const BatchRow> batch,
                 const ModelConfig& config, const DualTowerParams& params,
                 const MultiTaskParams& marginals, const TrainConfig& train);

// Integrated training: every epoch shuffles the union of labeled and
// semi-labeled indices (unlabeled samples never train), walks batches of
// config.batch_size (final short batch kept), imputes, assembles the five
// loss terms, divides by the batch size, and applies one SGD step per
// parameter group. `marginals` is required when lambda_d > 0. A training
// run owns its parameter groups exclusively.
TrainHistory train(const Dataset& data, const ModelConfig& config,
                   DualTowerParams& params, const MultiTaskParams* marginals,
                   const TrainConfig& train);

// Marginal model training: head1 on rows with y1, head2 on rows with y2
// (or fully labeled rows only, per config), shared encoder updated by
// both.
TrainHistory pretrain_multitask(const Dataset& data, const ModelConfig& config,
                                MultiTaskParams& params,
                                const TrainConfig& train);

// Isolated training modes. A: supervision on fully labeled rows, updating
// all groups. B1: reconstruction of y1 on semi-labeled rows, updating
// theta0/theta1 and leaving theta2 bit-identical; B2 symmetric. C: duality
// loss over all label-bearing rows, updating all groups (requires a
// pretrained marginal model).
enum class TrainMode { A, B1, B2, C };

TrainHistory train_mode(TrainMode mode, const Dataset& data,
                        const ModelConfig& config, DualTowerParams& params,
                        const MultiTaskParams* marginals,
                        const TrainConfig& train);

// CSV with columns epoch,s1,s2,r1,r2,d,total.
void write_history_csv(const std::string& path, const TrainHistory& history);

}  // namespace dll

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dll/data.hpp"
#include "dll/mlp.hpp"
#include "dll/param.hpp"
#include "dll/tape.hpp"

namespace dll {

// Widths of the dual-tower model. The shared encoder maps features to a
// representation; each tower consumes the concatenation of that
// representation with a 1-wide label embedding (a classification label
// enters as a raw float in [0, 1] - either a hard 0/1 label or a relayed
// probability; a regression label enters unchanged). Tower outputs are one
// sigmoid probability (classification, probability of class 1) or one raw
// float (regression).
struct ModelConfig {
  std::vector<int> encoder_widths;    // {d, ...}
  std::vector<int> embedding_widths;  // {1, ...}
  std::vector<int> tower_widths;      // {enc_out + emb_out, ..., 1}
  Activation hidden_activation = Activation::Relu;
  TaskKind task = TaskKind::Regression;
  std::uint64_t seed = 0;

  int feature_dim() const { return encoder_widths.front(); }
};

ModelConfig default_model_config(int feature_dim, TaskKind task,
                                 std::uint64_t seed);

// Widths must compose: encoder output + embedding output = tower input,
// embedding input 1, tower output 1.
void validate_model_config(const ModelConfig& config);

// Three disjoint parameter groups: theta0 holds the shared encoder,
// theta1 holds Embedding 1 + Tower 1 (the y2 -> y1 side), theta2 holds
// Embedding 2 + Tower 2 (the y1 -> y2 side).
struct DualTowerParams {
  ParamGroup theta0{"theta0"};
  ParamGroup theta1{"theta1"};
  ParamGroup theta2{"theta2"};
};

// Marginal two-head model sharing one encoder; estimates each label from
// features alone.
struct MultiTaskParams {
  ParamGroup encoder{"m_encoder"};
  ParamGroup head1{"m_head1"};
  ParamGroup head2{"m_head2"};
};

DualTowerParams init_dual_tower(const ModelConfig& config);
MultiTaskParams init_multitask(const ModelConfig& config);

// Graph-building forward passes. The label argument may be any tape node
// (constant or tracked). Outputs are scalars.
Var f_forward(Tape& tape, const ModelConfig& config,
              const DualTowerParams& params, std::span<const double> x,
              Var y1);
Var g_forward(Tape& tape, const ModelConfig& config,
              const DualTowerParams& params, std::span<const double> x,
              Var y2);
std::pair<Var, Var> m_forward(Tape& tape, const ModelConfig& config,
                              const MultiTaskParams& params,
                              std::span<const double> x);

// Value-only forwards; bit-identical to the tape versions.
double f_eval(const ModelConfig& config, const DualTowerParams& params,
              std::span<const double> x, double y1);
double g_eval(const ModelConfig& config, const DualTowerParams& params,
              std::span<const double> x, double y2);
std::pair<double, double> m_eval(const ModelConfig& config,
                                 const MultiTaskParams& params,
                                 std::span<const double> x);

// Per-sample evaluator that caches the shared encoding, for inference
// loops that re-enter the towers many times with different label inputs.
// Produces the same bits as f_eval / g_eval.
class TowerEvaluator {
 public:
  TowerEvaluator(const ModelConfig& config, const DualTowerParams& params,
                 std::span<const double> x);

  double f(double y1) const;
  double g(double y2) const;

 private:
  double tower(const ParamGroup& group, const char* emb_prefix,
               const char* tower_prefix, double label) const;

  const ModelConfig& config_;
  const DualTowerParams& params_;
  std::vector<double> encoding_;
};

// Derived sub-network specs.
MLPSpec encoder_spec(const ModelConfig& config);
MLPSpec embedding_spec(const ModelConfig& config);
MLPSpec tower_spec(const ModelConfig& config);
MLPSpec head_spec(const ModelConfig& config);  // multi-task head

}  // namespace dll

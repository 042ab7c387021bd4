#include "dll/model.hpp"

#include "dll/error.hpp"

namespace dll {

namespace {

OutputActivation task_output(TaskKind task) {
  return task == TaskKind::BinaryClassification ? OutputActivation::Sigmoid
                                                : OutputActivation::Identity;
}

}  // namespace

MLPSpec encoder_spec(const ModelConfig& config) {
  return MLPSpec{config.encoder_widths, config.hidden_activation,
                 OutputActivation::Identity};
}

MLPSpec embedding_spec(const ModelConfig& config) {
  return MLPSpec{config.embedding_widths, config.hidden_activation,
                 OutputActivation::Identity};
}

MLPSpec tower_spec(const ModelConfig& config) {
  return MLPSpec{config.tower_widths, config.hidden_activation,
                 task_output(config.task)};
}

MLPSpec head_spec(const ModelConfig& config) {
  std::vector<int> widths = config.tower_widths;
  widths.front() = config.encoder_widths.back();
  return MLPSpec{std::move(widths), config.hidden_activation,
                 task_output(config.task)};
}

ModelConfig default_model_config(int feature_dim, TaskKind task,
                                 std::uint64_t seed) {
  ModelConfig config;
  config.encoder_widths = {feature_dim, 32, 16};
  config.embedding_widths = {1, 8};
  config.tower_widths = {24, 16, 1};
  config.task = task;
  config.seed = seed;
  return config;
}

void validate_model_config(const ModelConfig& config) {
  validate_mlp_spec(encoder_spec(config), "enc.");
  validate_mlp_spec(embedding_spec(config), "emb.");
  validate_mlp_spec(tower_spec(config), "tower.");
  if (config.embedding_widths.front() != 1) {
    throw ConfigError("model: embedding input width must be 1");
  }
  if (config.tower_widths.back() != 1) {
    throw ConfigError("model: tower output width must be 1");
  }
  const int fused =
      config.encoder_widths.back() + config.embedding_widths.back();
  if (config.tower_widths.front() != fused) {
    throw ConfigError("model: tower input width " +
                      std::to_string(config.tower_widths.front()) +
                      " != encoder output + embedding output = " +
                      std::to_string(fused));
  }
}

DualTowerParams init_dual_tower(const ModelConfig& config) {
  validate_model_config(config);
  DualTowerParams params;
  const Rng base(config.seed);
  {
    Rng rng = base.substream("theta0");
    init_mlp_params(encoder_spec(config), params.theta0, "enc.", rng);
  }
  {
    Rng rng = base.substream("theta1");
    init_mlp_params(embedding_spec(config), params.theta1, "emb1.", rng);
    init_mlp_params(tower_spec(config), params.theta1, "tw1.", rng);
  }
  {
    Rng rng = base.substream("theta2");
    init_mlp_params(embedding_spec(config), params.theta2, "emb2.", rng);
    init_mlp_params(tower_spec(config), params.theta2, "tw2.", rng);
  }
  return params;
}

MultiTaskParams init_multitask(const ModelConfig& config) {
  validate_model_config(config);
  MultiTaskParams params;
  const Rng base(config.seed);
  {
    Rng rng = base.substream("m_encoder");
    init_mlp_params(encoder_spec(config), params.encoder, "enc.", rng);
  }
  {
    Rng rng = base.substream("m_head1");
    init_mlp_params(head_spec(config), params.head1, "head1.", rng);
  }
  {
    Rng rng = base.substream("m_head2");
    init_mlp_params(head_spec(config), params.head2, "head2.", rng);
  }
  return params;
}

namespace {

Var tower_forward(Tape& tape, const ModelConfig& config,
                  const ParamGroup& theta0, const ParamGroup& side,
                  const char* emb_prefix, const char* tower_prefix,
                  std::span<const double> x, Var label) {
  if (!tape.value(label).is_scalar()) {
    throw DimensionError("tower: label input must be scalar");
  }
  Var xin = tape.constant(
      Tensor::vector(std::vector<double>(x.begin(), x.end())));
  Var enc = mlp_forward(tape, encoder_spec(config), theta0, "enc.", xin);
  Var lab = tape.as_vector(label);
  Var emb = mlp_forward(tape, embedding_spec(config), side, emb_prefix, lab);
  Var fused = tape.concat(enc, emb);
  Var out = mlp_forward(tape, tower_spec(config), side, tower_prefix, fused);
  return tape.at(out, 0);
}

}  // namespace

Var f_forward(Tape& tape, const ModelConfig& config,
              const DualTowerParams& params, std::span<const double> x,
              Var y1) {
  return tower_forward(tape, config, params.theta0, params.theta2, "emb2.",
                       "tw2.", x, y1);
}

Var g_forward(Tape& tape, const ModelConfig& config,
              const DualTowerParams& params, std::span<const double> x,
              Var y2) {
  return tower_forward(tape, config, params.theta0, params.theta1, "emb1.",
                       "tw1.", x, y2);
}

std::pair<Var, Var> m_forward(Tape& tape, const ModelConfig& config,
                              const MultiTaskParams& params,
                              std::span<const double> x) {
  Var xin = tape.constant(
      Tensor::vector(std::vector<double>(x.begin(), x.end())));
  Var enc = mlp_forward(tape, encoder_spec(config), params.encoder, "enc.",
                        xin);
  Var h1 = mlp_forward(tape, head_spec(config), params.head1, "head1.", enc);
  Var h2 = mlp_forward(tape, head_spec(config), params.head2, "head2.", enc);
  return {tape.at(h1, 0), tape.at(h2, 0)};
}

double f_eval(const ModelConfig& config, const DualTowerParams& params,
              std::span<const double> x, double y1) {
  return TowerEvaluator(config, params, x).f(y1);
}

double g_eval(const ModelConfig& config, const DualTowerParams& params,
              std::span<const double> x, double y2) {
  return TowerEvaluator(config, params, x).g(y2);
}

std::pair<double, double> m_eval(const ModelConfig& config,
                                 const MultiTaskParams& params,
                                 std::span<const double> x) {
  const std::vector<double> enc =
      mlp_eval(encoder_spec(config), params.encoder, "enc.", x);
  const std::vector<double> h1 =
      mlp_eval(head_spec(config), params.head1, "head1.", enc);
  const std::vector<double> h2 =
      mlp_eval(head_spec(config), params.head2, "head2.", enc);
  return {h1[0], h2[0]};
}

TowerEvaluator::TowerEvaluator(const ModelConfig& config,
                               const DualTowerParams& params,
                               std::span<const double> x)
    : config_(config), params_(params) {
  encoding_ = mlp_eval(encoder_spec(config_), params_.theta0, "enc.", x);
}

double TowerEvaluator::tower(const ParamGroup& group, const char* emb_prefix,
                             const char* tower_prefix, double label) const {
  const double lab[1] = {label};
  const std::vector<double> emb =
      mlp_eval(embedding_spec(config_), group, emb_prefix, lab);
  std::vector<double> fused;
  fused.reserve(encoding_.size() + emb.size());
  fused.insert(fused.end(), encoding_.begin(), encoding_.end());
  fused.insert(fused.end(), emb.begin(), emb.end());
  const std::vector<double> out =
      mlp_eval(tower_spec(config_), group, tower_prefix, fused);
  return out[0];
}

double TowerEvaluator::f(double y1) const {
  return tower(params_.theta2, "emb2.", "tw2.", y1);
}

double TowerEvaluator::g(double y2) const {
  return tower(params_.theta1, "emb1.", "tw1.", y2);
}

}  // namespace dll

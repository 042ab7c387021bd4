#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "dll/checkpoint.hpp"
#include "dll/error.hpp"
#include "dll/model.hpp"

using namespace dll;

namespace {

ModelConfig small_config(TaskKind task, std::uint64_t seed) {
  ModelConfig config;
  config.encoder_widths = {3, 6, 4};
  config.embedding_widths = {1, 3};
  config.tower_widths = {7, 5, 1};
  config.task = task;
  config.seed = seed;
  return config;
}

void zero_tower_head(ParamGroup& side, const char* tower_prefix) {
  // Final tower layer index is layer_count - 1 = 1 for {7,5,1}.
  side.at(std::string(tower_prefix) + "W1").fill(0.0);
  side.at(std::string(tower_prefix) + "b1").fill(0.0);
}

}  // namespace

TEST_CASE("model config widths must compose") {
  ModelConfig bad = small_config(TaskKind::Regression, 1);
  bad.tower_widths = {8, 5, 1};  // encoder 4 + embedding 3 = 7, not 8
  CHECK_THROWS_AS(validate_model_config(bad), ConfigError);
  bad = small_config(TaskKind::Regression, 1);
  bad.embedding_widths = {2, 3};
  CHECK_THROWS_AS(validate_model_config(bad), ConfigError);
}

TEST_CASE("init_params is seeded and groups are disjoint") {
  const ModelConfig config = small_config(TaskKind::BinaryClassification, 5);
  const DualTowerParams a = init_dual_tower(config);
  const DualTowerParams b = init_dual_tower(config);
  CHECK(bitwise_equal(a.theta0, b.theta0));
  CHECK(bitwise_equal(a.theta1, b.theta1));
  CHECK(bitwise_equal(a.theta2, b.theta2));

  ModelConfig other = config;
  other.seed = 6;
  const DualTowerParams c = init_dual_tower(other);
  CHECK(!bitwise_equal(a.theta0, c.theta0));

  // Group names differ and the (group, key) spaces are disjoint.
  CHECK(a.theta0.name() != a.theta1.name());
  for (const auto& [key, _] : a.theta1.entries()) {
    CHECK(!a.theta0.contains(key));
  }
  for (const auto& [key, _] : a.theta2.entries()) {
    // theta1 and theta2 use different key prefixes (emb1/tw1 vs emb2/tw2).
    CHECK(!a.theta1.contains(key));
  }
}

TEST_CASE("classification outputs are probabilities") {
  const ModelConfig config = small_config(TaskKind::BinaryClassification, 9);
  const DualTowerParams params = init_dual_tower(config);
  const std::vector<double> x{0.1, 0.9, -2.0};
  for (double y : {0.0, 0.37, 1.0}) {
    const double f = f_eval(config, params, x, y);
    const double g = g_eval(config, params, x, y);
    CHECK(f > 0.0);
    CHECK(f < 1.0);
    CHECK(g > 0.0);
    CHECK(g < 1.0);
  }
}

TEST_CASE("zeroed tower head pins the output") {
  const std::vector<double> x{0.5, 0.5, 0.5};
  ModelConfig config = small_config(TaskKind::BinaryClassification, 9);
  DualTowerParams params = init_dual_tower(config);
  zero_tower_head(params.theta2, "tw2.");
  CHECK(f_eval(config, params, x, 1.0) == 0.5);  // sigmoid(0)

  ModelConfig reg = small_config(TaskKind::Regression, 9);
  DualTowerParams reg_params = init_dual_tower(reg);
  zero_tower_head(reg_params.theta2, "tw2.");
  CHECK(f_eval(reg, reg_params, x, 1.0) == 0.0);
}

TEST_CASE("forward passes are deterministic and match the tape path") {
  const ModelConfig config = small_config(TaskKind::BinaryClassification, 3);
  const DualTowerParams params = init_dual_tower(config);
  const std::vector<double> x{0.4, -0.2, 1.3};
  const double v1 = f_eval(config, params, x, 0.7);
  const double v2 = f_eval(config, params, x, 0.7);
  CHECK(v1 == v2);

  Tape tape;
  Var out = f_forward(tape, config, params, x, tape.constant(0.7));
  CHECK(tape.value(out).scalar() == v1);

  Tape tape_g;
  Var out_g = g_forward(tape_g, config, params, x, tape_g.constant(0.2));
  CHECK(tape_g.value(out_g).scalar() == g_eval(config, params, x, 0.2));
}

TEST_CASE("swapping theta2 contents leaves g_forward unchanged") {
  const ModelConfig config = small_config(TaskKind::BinaryClassification, 3);
  DualTowerParams params = init_dual_tower(config);
  const std::vector<double> x{0.4, -0.2, 1.3};
  const double before = g_eval(config, params, x, 0.8);
  ModelConfig other = config;
  other.seed = 1234;
  params.theta2 = init_dual_tower(other).theta2;
  CHECK(g_eval(config, params, x, 0.8) == before);
}

TEST_CASE("parameter partition: f never touches theta1, g never theta2") {
  // tanh towers keep gradients alive everywhere (relu layers can go dead
  // at a single input, which would make the shared-dependence check vacuous).
  ModelConfig config = small_config(TaskKind::BinaryClassification, 8);
  config.hidden_activation = Activation::Tanh;
  const DualTowerParams params = init_dual_tower(config);
  const std::vector<double> x{0.4, 0.1, -0.6};

  Tape tape;
  tape.register_group(params.theta0);
  tape.register_group(params.theta1);
  tape.register_group(params.theta2);
  Var g_out = g_forward(tape, config, params, x, tape.constant(0.3));
  const GradientMap grads = tape.backward(g_out);
  for (const auto& [key, _] : params.theta2.entries()) {
    const Tensor* grad = grads.find("theta2", key);
    REQUIRE(grad != nullptr);
    for (std::size_t i = 0; i < grad->size(); ++i) CHECK((*grad)[i] == 0.0);
  }
  // Shared dependence: at least one theta0 gradient is nonzero.
  bool any_nonzero = false;
  for (const auto& [key, _] : params.theta0.entries()) {
    const Tensor* grad = grads.find("theta0", key);
    for (std::size_t i = 0; i < grad->size(); ++i) {
      if ((*grad)[i] != 0.0) any_nonzero = true;
    }
  }
  CHECK(any_nonzero);
}

TEST_CASE("composing the towers is well-typed (duality wiring)") {
  const ModelConfig config = small_config(TaskKind::BinaryClassification, 4);
  const DualTowerParams params = init_dual_tower(config);
  const std::vector<double> x{0.2, 0.5, 0.8};
  const double y2_hat = f_eval(config, params, x, 1.0);
  const double y1_round_trip = g_eval(config, params, x, y2_hat);
  CHECK(std::isfinite(y1_round_trip));
  CHECK(y1_round_trip > 0.0);
  CHECK(y1_round_trip < 1.0);
}

TEST_CASE("multi-task model heads") {
  ModelConfig config = small_config(TaskKind::BinaryClassification, 12);
  MultiTaskParams params = init_multitask(config);
  const std::vector<double> x{0.3, 0.3, 0.3};
  const auto [h1, h2] = m_eval(config, params, x);
  CHECK(std::isfinite(h1));
  CHECK(std::isfinite(h2));

  // Zeroed heads give (0.5, 0.5) for classification.
  params.head1.at("head1.W1").fill(0.0);
  params.head1.at("head1.b1").fill(0.0);
  params.head2.at("head2.W1").fill(0.0);
  params.head2.at("head2.b1").fill(0.0);
  const auto [z1, z2] = m_eval(config, params, x);
  CHECK(z1 == 0.5);
  CHECK(z2 == 0.5);

  // Deterministic given params.
  const auto [r1, r2] = m_eval(config, params, x);
  CHECK(r1 == z1);
  CHECK(r2 == z2);
}

TEST_CASE("checkpoint round trip is bit-exact") {
  const ModelConfig config = small_config(TaskKind::BinaryClassification, 77);
  const DualTowerParams params = init_dual_tower(config);
  const auto path =
      std::filesystem::temp_directory_path() / "dll_ckpt_test.bin";
  save_checkpoint(path.string(), make_checkpoint(config, params));
  const Checkpoint loaded = load_checkpoint(path.string());
  CHECK(loaded.kind == "dualtower");
  CHECK(loaded.config.encoder_widths == config.encoder_widths);
  CHECK(loaded.config.task == config.task);
  CHECK(loaded.config.seed == config.seed);
  const DualTowerParams restored = dual_tower_from_checkpoint(loaded);
  CHECK(bitwise_equal(restored.theta0, params.theta0));
  CHECK(bitwise_equal(restored.theta1, params.theta1));
  CHECK(bitwise_equal(restored.theta2, params.theta2));
  std::filesystem::remove(path);

  CHECK_THROWS_AS(load_checkpoint("/nonexistent/never.ckpt"), ParseError);
}

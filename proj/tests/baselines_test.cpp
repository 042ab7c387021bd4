#include "doctest.h"
#include "dll/baselines.hpp"
#include "dll/error.hpp"
#include "dll/synthetic.hpp"

using namespace dll;

namespace {

BaselineConfig quick_config(TaskKind task, std::uint64_t seed) {
  BaselineConfig config;
  config.model.encoder_widths = {4, 8, 4};
  config.model.embedding_widths = {1, 2};
  config.model.tower_widths = {6, 4, 1};
  config.model.task = task;
  config.train.epochs = 5;
  config.train.batch_size = 4;
  config.train.learning_rate = 0.05;
  config.seed = seed;
  return config;
}

Dataset masked_classification(std::uint64_t seed) {
  return mask_labels(gen_synthetic_classification(60, 4, 91), 0.3, 0.3, seed);
}

}  // namespace

TEST_CASE("component counts per scheme") {
  const Dataset data = masked_classification(1);
  const BaselineConfig config = quick_config(TaskKind::BinaryClassification, 7);
  CHECK(baseline_fit(BaselineKind::ID, data, config).component_count() == 2);
  CHECK(baseline_fit(BaselineKind::COL, data, config).component_count() == 1);
  CHECK(baseline_fit(BaselineKind::SSL, data, config).component_count() == 2);
  CHECK(baseline_fit(BaselineKind::LS, data, config).component_count() == 2);
  CHECK(baseline_fit(BaselineKind::DSML, data, config).component_count() == 3);
  CHECK(baseline_fit(BaselineKind::DSML_REV, data, config).component_count() ==
        3);
}

TEST_CASE("ID trains each model on every sample carrying its label") {
  const Dataset data = masked_classification(2);
  const DatasetSplit split = partition(data);
  const BaselineConfig config = quick_config(TaskKind::BinaryClassification, 7);
  const BaselinePredictor p = baseline_fit(BaselineKind::ID, data, config);
  CHECK(p.components[0].train_count ==
        split.labeled.size() + split.y1_only.size());
  CHECK(p.components[1].train_count ==
        split.labeled.size() + split.y2_only.size());
}

TEST_CASE("ID on fully labeled data fits both models on all n samples") {
  const Dataset data = gen_synthetic_classification(40, 4, 17);
  const BaselineConfig config = quick_config(TaskKind::BinaryClassification, 7);
  const BaselinePredictor p = baseline_fit(BaselineKind::ID, data, config);
  CHECK(p.components[0].train_count == 40);
  CHECK(p.components[1].train_count == 40);
}

TEST_CASE("stage subsets are respected") {
  const Dataset data = masked_classification(3);
  const DatasetSplit split = partition(data);
  const BaselineConfig config = quick_config(TaskKind::BinaryClassification, 7);

  const BaselinePredictor col = baseline_fit(BaselineKind::COL, data, config);
  CHECK(col.multi_components[0].train_count == split.labeled.size());

  const BaselinePredictor ssl = baseline_fit(BaselineKind::SSL, data, config);
  CHECK(ssl.multi_components[0].train_count == split.labeled.size());
  CHECK(ssl.multi_components[1].train_count ==
        split.labeled.size() + split.y1_only.size() + split.y2_only.size());

  const BaselinePredictor ls = baseline_fit(BaselineKind::LS, data, config);
  CHECK(ls.components[0].train_count ==
        split.labeled.size() + split.y2_only.size());
  CHECK(ls.components[1].train_count ==
        split.labeled.size() + split.y1_only.size());

  const BaselinePredictor dsml = baseline_fit(BaselineKind::DSML, data, config);
  CHECK(dsml.components[2].train_count ==
        split.labeled.size() + split.y1_only.size() + split.y2_only.size());
}

TEST_CASE("SSL stage 1 coincides with COL bit-for-bit under one seed") {
  const Dataset data = masked_classification(4);
  const BaselineConfig config = quick_config(TaskKind::BinaryClassification, 9);
  const BaselinePredictor col = baseline_fit(BaselineKind::COL, data, config);
  const BaselinePredictor ssl = baseline_fit(BaselineKind::SSL, data, config);
  CHECK(bitwise_equal(col.multi_components[0].params.encoder,
                      ssl.multi_components[0].params.encoder));
  CHECK(bitwise_equal(col.multi_components[0].params.head1,
                      ssl.multi_components[0].params.head1));
  CHECK(bitwise_equal(col.multi_components[0].params.head2,
                      ssl.multi_components[0].params.head2));
}

TEST_CASE("baselines are deterministic under a fixed seed") {
  const Dataset data = masked_classification(5);
  const BaselineConfig config = quick_config(TaskKind::BinaryClassification, 3);
  const BaselinePredictor a = baseline_fit(BaselineKind::DSML, data, config);
  const BaselinePredictor b = baseline_fit(BaselineKind::DSML, data, config);
  for (std::size_t i = 0; i < a.components.size(); ++i) {
    CHECK(bitwise_equal(a.components[i].params, b.components[i].params));
  }
}

TEST_CASE("x-only schemes ignore label values at prediction time") {
  const Dataset data = masked_classification(6);
  const BaselineConfig config = quick_config(TaskKind::BinaryClassification, 5);
  for (const BaselineKind kind :
       {BaselineKind::ID, BaselineKind::COL, BaselineKind::SSL}) {
    const BaselinePredictor p = baseline_fit(kind, data, config);
    Sample with_label{{0.2, 0.4, 0.6, 0.8}, 1.0, std::nullopt};
    Sample flipped = with_label;
    flipped.y1 = 0.0;
    const PresenceMask u{true, false};
    CHECK(*baseline_predict(p, with_label, u).y2 ==
          *baseline_predict(p, flipped, u).y2);
    // Single- and double-label answers coincide for these schemes.
    Sample unlabeled{{0.2, 0.4, 0.6, 0.8}, std::nullopt, std::nullopt};
    CHECK(*baseline_predict(p, with_label, u).y2 ==
          *baseline_predict(p, unlabeled, PresenceMask{false, false}).y2);
  }
}

TEST_CASE("label-consuming schemes read the revealed label") {
  const Dataset data = masked_classification(7);
  const BaselineConfig config = quick_config(TaskKind::BinaryClassification, 5);
  const BaselinePredictor ls = baseline_fit(BaselineKind::LS, data, config);
  Sample a{{0.2, 0.4, 0.6, 0.8}, std::nullopt, 1.0};
  Sample b = a;
  b.y2 = 0.0;
  const PresenceMask u{false, true};
  CHECK(*baseline_predict(ls, a, u).y1 != *baseline_predict(ls, b, u).y1);
}

TEST_CASE("LS double-label chains stage 1 into stage 2") {
  const Dataset data = masked_classification(8);
  const BaselineConfig config = quick_config(TaskKind::BinaryClassification, 5);
  const BaselinePredictor ls = baseline_fit(BaselineKind::LS, data, config);
  const Sample s{{0.3, 0.1, 0.9, 0.5}, std::nullopt, std::nullopt};
  const BaselinePrediction both =
      baseline_predict(ls, s, PresenceMask{false, false});
  REQUIRE(both.y1.has_value());
  REQUIRE(both.y2.has_value());
  // y1 must equal the conditioned prediction at the thresholded y2.
  Sample revealed = s;
  revealed.y2 = *both.y2 >= 0.5 ? 1.0 : 0.0;
  const BaselinePrediction chained =
      baseline_predict(ls, revealed, PresenceMask{false, true});
  CHECK(*both.y1 == *chained.y1);
}

TEST_CASE("DSML single-y2 predictions use the third model with known y1") {
  const Dataset data = masked_classification(9);
  const BaselineConfig config = quick_config(TaskKind::BinaryClassification, 5);
  const BaselinePredictor dsml = baseline_fit(BaselineKind::DSML, data, config);
  Sample a{{0.3, 0.1, 0.9, 0.5}, 1.0, std::nullopt};
  Sample b = a;
  b.y1 = 0.0;
  const PresenceMask u{true, false};
  // Conditioning on different y1 values moves the prediction.
  CHECK(*baseline_predict(dsml, a, u).y2 != *baseline_predict(dsml, b, u).y2);
}

TEST_CASE("DSML_REV mirrors DSML through the label swap") {
  Dataset data = masked_classification(10);
  const BaselineConfig config = quick_config(TaskKind::BinaryClassification, 6);
  const BaselinePredictor rev = baseline_fit(BaselineKind::DSML_REV, data, config);

  Dataset swapped = data;
  for (Sample& s : swapped.samples) std::swap(s.y1, s.y2);
  const BaselinePredictor forward =
      baseline_fit(BaselineKind::DSML, swapped, config);

  const Sample s{{0.3, 0.1, 0.9, 0.5}, std::nullopt, std::nullopt};
  const BaselinePrediction rp =
      baseline_predict(rev, s, PresenceMask{false, false});
  const BaselinePrediction fp =
      baseline_predict(forward, s, PresenceMask{false, false});
  CHECK(*rp.y1 == *fp.y2);
  CHECK(*rp.y2 == *fp.y1);
}

TEST_CASE("errors") {
  const BaselineConfig config = quick_config(TaskKind::BinaryClassification, 5);
  SUBCASE("empty required subset names the stage") {
    Dataset no_labeled;
    no_labeled.task = TaskKind::BinaryClassification;
    no_labeled.feature_dim = 4;
    no_labeled.samples = {Sample{{0.1, 0.2, 0.3, 0.4}, 1.0, std::nullopt}};
    CHECK_THROWS_WITH_AS(baseline_fit(BaselineKind::COL, no_labeled, config),
                         doctest::Contains("stage"), ConfigError);
  }
  SUBCASE("fully labeled prediction queries violate the contract") {
    const Dataset data = masked_classification(11);
    const BaselinePredictor p = baseline_fit(BaselineKind::ID, data, config);
    CHECK_THROWS_AS(baseline_predict(p, Sample{{0.1, 0.2, 0.3, 0.4}, 1.0, 1.0},
                                     PresenceMask{true, true}),
                    ContractError);
  }
}

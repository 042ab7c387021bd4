#include <cmath>

#include "doctest.h"
#include "dll/error.hpp"
#include "dll/metrics.hpp"
#include "dll/rng.hpp"
#include "dll/synthetic.hpp"

using namespace dll;

TEST_CASE("classification metrics") {
  SUBCASE("perfect predictions") {
    const ClassificationMetrics m =
        classification_metrics({1, 0, 1, 0}, {1, 0, 1, 0});
    CHECK(m.accuracy == 1.0);
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == 1.0);
  }
  SUBCASE("hand counts: tp=fp=fn=tn=1") {
    const ClassificationMetrics m =
        classification_metrics({1, 1, 0, 0}, {1, 0, 1, 0});
    CHECK(m.accuracy == 0.5);
    CHECK(m.precision == 0.5);
    CHECK(m.recall == 0.5);
    CHECK(m.f1 == 0.5);
  }
  SUBCASE("empty denominators fall back to zero") {
    const ClassificationMetrics m = classification_metrics({0, 0}, {0, 0});
    CHECK(m.accuracy == 1.0);
    CHECK(m.precision == 0.0);
    CHECK(m.recall == 0.0);
    CHECK(m.f1 == 0.0);
  }
  SUBCASE("order invariance") {
    const ClassificationMetrics a =
        classification_metrics({1, 0, 1, 1}, {0, 0, 1, 1});
    const ClassificationMetrics b =
        classification_metrics({1, 1, 0, 1}, {1, 1, 0, 0});
    CHECK(a.f1 == b.f1);
    CHECK(a.accuracy == b.accuracy);
  }
  SUBCASE("contract errors") {
    CHECK_THROWS_AS(classification_metrics({1}, {1, 0}), ContractError);
    CHECK_THROWS_AS(classification_metrics({2}, {1}), ContractError);
  }
}

TEST_CASE("mape") {
  CHECK(mape({1.0, 2.0}, {1.0, 2.0}) == 0.0);
  CHECK(mape({1.1, 1.8}, {1.0, 2.0}) == doctest::Approx(0.1).epsilon(1e-12));
  SUBCASE("scale invariance") {
    const double base = mape({1.1, 1.8}, {1.0, 2.0});
    CHECK(mape({3.3, 5.4}, {3.0, 6.0}) == doctest::Approx(base));
  }
  SUBCASE("paired permutation invariance") {
    CHECK(mape({1.1, 1.8}, {1.0, 2.0}) ==
          doctest::Approx(mape({1.8, 1.1}, {2.0, 1.0})));
  }
  SUBCASE("zero truths and mismatched lengths are contract errors") {
    CHECK_THROWS_AS(mape({1.0}, {0.0}), ContractError);
    CHECK_THROWS_AS(mape({1.0, 2.0}, {1.0}), ContractError);
  }
}

namespace {

Dataset risk_dataset(TaskKind task) {
  Dataset d;
  d.task = task;
  d.feature_dim = 2;
  d.samples = {Sample{{0.1, 0.2}, 1.0, 1.0}};
  return d;
}

}  // namespace

TEST_CASE("empirical risk") {
  // Stub predictors with closed-form values.
  const LabelFn f = [](const std::vector<double>&, double y1) {
    return 0.8 * y1;
  };
  const LabelFn g = [](const std::vector<double>&, double y2) {
    return 0.5 * y2;
  };

  SUBCASE("single-indicator selection on a fully labeled singleton") {
    Dataset d = risk_dataset(TaskKind::Regression);
    RiskWeights w;
    w.alpha = {1.0, 0.0, 0.0, 0.0};
    // l2(f(x, y1), y2) = (0.8 - 1)^2 = 0.04, clipped at 1: unchanged.
    CHECK(empirical_risk(f, g, d, w) == doctest::Approx(0.04).epsilon(1e-12));
  }
  SUBCASE("all-unlabeled dataset has zero risk") {
    Dataset d = risk_dataset(TaskKind::Regression);
    d.samples[0].y1.reset();
    d.samples[0].y2.reset();
    RiskWeights w;
    CHECK(empirical_risk(f, g, d, w) == 0.0);
  }
  SUBCASE("risk stays within [0, 1]") {
    const LabelFn wild = [](const std::vector<double>&, double) {
      return 100.0;
    };
    Dataset d = risk_dataset(TaskKind::Regression);
    RiskWeights w;
    const double r = empirical_risk(wild, wild, d, w);
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
  }
  SUBCASE("risk is affine in alpha (convex combination property)") {
    Dataset d;
    d.task = TaskKind::Regression;
    d.feature_dim = 2;
    d.samples = {Sample{{0.1, 0.2}, 1.0, 1.0},
                 Sample{{0.3, 0.4}, 2.0, std::nullopt},
                 Sample{{0.5, 0.6}, std::nullopt, 3.0}};
    RiskWeights a;
    a.alpha = {0.7, 0.1, 0.1, 0.1};
    RiskWeights b;
    b.alpha = {0.1, 0.3, 0.3, 0.3};
    const double ra = empirical_risk(f, g, d, a);
    const double rb = empirical_risk(f, g, d, b);
    for (double t : {0.0, 0.25, 0.5, 1.0}) {
      RiskWeights mix;
      for (int j = 0; j < 4; ++j) {
        mix.alpha[j] = t * a.alpha[j] + (1.0 - t) * b.alpha[j];
      }
      CHECK(empirical_risk(f, g, d, mix) ==
            doctest::Approx(t * ra + (1.0 - t) * rb).epsilon(1e-12));
    }
  }
  SUBCASE("alpha must be normalized") {
    Dataset d = risk_dataset(TaskKind::Regression);
    RiskWeights w;
    w.alpha = {0.5, 0.5, 0.5, 0.5};
    CHECK_THROWS_AS(empirical_risk(f, g, d, w), ContractError);
  }
}

TEST_CASE("summarize computes mean and sample sd") {
  const MetricSummary s = summarize({1.0, 2.0, 3.0});
  CHECK(s.mean == doctest::Approx(2.0));
  CHECK(s.sd == doctest::Approx(1.0));
  CHECK(summarize({5.0}).sd == 0.0);
  CHECK(summarize({}).values.empty());
}

#include "dll/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "dll/error.hpp"
#include "dll/rng.hpp"

namespace dll {

namespace {

void check_args(std::size_t n, std::size_t d) {
  if (n < 1) throw ContractError("synthetic: n must be >= 1");
  if (d < 2) throw ContractError("synthetic: d must be >= 2");
}

std::vector<double> draw_slopes(std::size_t d, double scale, Rng& rng) {
  std::vector<double> a(d);
  for (double& v : a) v = rng.uniform(0.5, 1.5) * scale;
  return a;
}

double upper_median(std::vector<double> values) {
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  return values[mid];
}

}  // namespace

double RegressionTruth::y2(const std::vector<double>& x) const {
  double acc = 1.0;
  for (std::size_t j = 0; j < slope.size(); ++j) acc += slope[j] * x[j];
  return acc;
}

double RegressionTruth::y1(const std::vector<double>& x) const {
  return 0.5 * y2(x) + 1.0 + std::sin(x[0]);
}

RegressionTruth regression_truth(std::size_t d, std::uint64_t seed) {
  Rng rng = Rng(seed).substream("regression.slopes");
  // Slopes shrink with d so the label scale stays O(1) for any feature
  // count (y2 in [1, 2.5]).
  return RegressionTruth{draw_slopes(d, 1.0 / static_cast<double>(d), rng)};
}

Dataset gen_synthetic_regression(std::size_t n, std::size_t d,
                                 std::uint64_t seed, RegressionTruth* truth) {
  check_args(n, d);
  const RegressionTruth model = regression_truth(d, seed);
  Rng rng = Rng(seed).substream("regression.features");

  Dataset out;
  out.task = TaskKind::Regression;
  out.feature_dim = d;
  out.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    s.x.resize(d);
    for (double& v : s.x) v = rng.uniform();
    s.y2 = model.y2(s.x);
    s.y1 = model.y1(s.x);
    out.samples.push_back(std::move(s));
  }
  if (truth) *truth = model;
  return out;
}

Dataset gen_synthetic_classification(std::size_t n, std::size_t d,
                                     std::uint64_t seed,
                                     ClassificationTruth* truth) {
  check_args(n, d);
  ClassificationTruth model;
  {
    Rng rng = Rng(seed).substream("classification.slopes");
    model.slope = draw_slopes(d, 1.0, rng);
  }
  Rng rng = Rng(seed).substream("classification.features");

  Dataset out;
  out.task = TaskKind::BinaryClassification;
  out.feature_dim = d;
  out.samples.reserve(n);
  std::vector<double> t(n);
  std::vector<double> shifted(n);
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    s.x.resize(d);
    for (double& v : s.x) v = rng.uniform();
    double latent = rng.normal(0.0, model.noise_sd);
    for (std::size_t j = 0; j < d; ++j) latent += model.slope[j] * s.x[j];
    t[i] = latent;
    shifted[i] = latent + 0.5 * s.x[1];
    out.samples.push_back(std::move(s));
  }
  model.threshold1 = upper_median(t);
  model.threshold2 = upper_median(shifted);
  for (std::size_t i = 0; i < n; ++i) {
    out.samples[i].y1 = t[i] > model.threshold1 ? 1.0 : 0.0;
    out.samples[i].y2 = shifted[i] > model.threshold2 ? 1.0 : 0.0;
  }
  if (truth) *truth = model;
  return out;
}

}  // namespace dll

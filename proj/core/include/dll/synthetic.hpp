#pragma once

#include <cstdint>
#include <vector>

#include "dll/data.hpp"

namespace dll {

// Ground truth of the regression generator, published so tests can check
// generated labels against the closed form.
struct RegressionTruth {
  std::vector<double> slope;  // positive, one per feature

  double y2(const std::vector<double>& x) const;
  // y1 = 0.5 * y2 + 1 + sin(x0); both labels stay strictly positive.
  double y1(const std::vector<double>& x) const;
};

RegressionTruth regression_truth(std::size_t d, std::uint64_t seed);

// Fully labeled regression dataset: x uniform in [0,1]^d, labels from
// RegressionTruth. n >= 1, d >= 2.
Dataset gen_synthetic_regression(std::size_t n, std::size_t d,
                                 std::uint64_t seed,
                                 RegressionTruth* truth = nullptr);

// Latent construction of the classification generator: t = b.x + noise,
// y1 = [t > median(t)], y2 = [t + 0.5*x1 > median(t + 0.5*x1)]. Both labels
// split roughly 50/50 and are strongly correlated through t.
struct ClassificationTruth {
  std::vector<double> slope;
  double noise_sd = 0.1;
  double threshold1 = 0.0;  // median of t over the generated batch
  double threshold2 = 0.0;  // median of t + 0.5*x1
};

Dataset gen_synthetic_classification(std::size_t n, std::size_t d,
                                     std::uint64_t seed,
                                     ClassificationTruth* truth = nullptr);

}  // namespace dll

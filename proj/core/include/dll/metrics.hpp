#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dll/data.hpp"
#include "dll/train.hpp"

namespace dll {

// Positive class is 1. When a denominator is empty (no positive
// predictions or no positive truths), precision/recall/f1 fall back to 0;
// accuracy is unaffected.
struct ClassificationMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

ClassificationMetrics classification_metrics(const std::vector<int>& predicted,
                                             const std::vector<int>& truth);

// Mean of |truth - predicted| / |truth|; every truth must be nonzero.
double mape(const std::vector<double>& predicted,
            const std::vector<double>& truth);

// Coefficients of the combined risk; must sum to 1.
struct RiskWeights {
  std::array<double, 4> alpha{0.25, 0.25, 0.25, 0.25};
};

using LabelFn = std::function<double(const std::vector<double>&, double)>;

// Combined empirical risk over a dataset with presence masks:
// mean over samples of
//   a1*[u=(1,1)]*l2(f(x,y1),y2) + a2*[u=(1,1)]*l1(g(x,y2),y1)
// + a3*[u1=1]*l1(g(x,f(x,y1)),y1) + a4*[u2=1]*l2(f(x,g(x,y2)),y2),
// with each loss clipped into [0, 1]. The clipping belongs to this
// evaluation quantity only; training losses are never clipped.
double empirical_risk(const LabelFn& f, const LabelFn& g,
                      const Dataset& dataset, const RiskWeights& weights,
                      std::optional<ClassWeights> class_weights = {});

struct MetricSummary {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation; 0 for a single value
  std::vector<double> values;
};

MetricSummary summarize(std::vector<double> values);

// Accumulates per-seed metric values keyed by method -> task panel
// ("Single-y1", ..., "Double-y2") -> metric name.
class ResultsTable {
 public:
  void add(const std::string& method, const std::string& panel,
           const std::string& metric, double value);
  const std::map<std::string,
                 std::map<std::string, std::map<std::string, std::vector<double>>>>&
  cells() const {
    return cells_;
  }

 private:
  std::map<std::string,
           std::map<std::string, std::map<std::string, std::vector<double>>>>
      cells_;
};

}  // namespace dll

#include "dll/metrics.hpp"

#include <cmath>

#include "dll/error.hpp"

namespace dll {

ClassificationMetrics classification_metrics(const std::vector<int>& predicted,
                                             const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) {
    throw ContractError("classification_metrics: length mismatch");
  }
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const int p = predicted[i];
    const int t = truth[i];
    if ((p != 0 && p != 1) || (t != 0 && t != 1)) {
      throw ContractError("classification_metrics: labels must be 0 or 1");
    }
    if (p == 1 && t == 1) {
      ++tp;
    } else if (p == 1) {
      ++fp;
    } else if (t == 1) {
      ++fn;
    } else {
      ++tn;
    }
  }
  ClassificationMetrics m;
  const std::size_t n = predicted.size();
  m.accuracy = n ? static_cast<double>(tp + tn) / static_cast<double>(n) : 0.0;
  m.precision = (tp + fp) ? static_cast<double>(tp) /
                                static_cast<double>(tp + fp)
                          : 0.0;
  m.recall =
      (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  m.f1 = (m.precision + m.recall) > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

double mape(const std::vector<double>& predicted,
            const std::vector<double>& truth) {
  if (predicted.size() != truth.size()) {
    throw ContractError("mape: length mismatch");
  }
  if (predicted.empty()) {
    throw ContractError("mape: empty input");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (truth[i] == 0.0) {
      throw ContractError("mape: zero true value at index " +
                          std::to_string(i));
    }
    acc += std::abs(truth[i] - predicted[i]) / std::abs(truth[i]);
  }
  return acc / static_cast<double>(predicted.size());
}

namespace {

double clip01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

// Task loss in [0, 1]: clipped cross-entropy of the predicted probability
// (classification) or clipped squared error (regression).
double clipped_loss(TaskKind task, double prediction, double target,
                    const std::optional<ClassWeights>& class_weights) {
  if (task == TaskKind::BinaryClassification) {
    const double p_target =
        target > 0.5 ? prediction : 1.0 - prediction;
    double loss = -std::log(std::max(p_target, kLogFloor));
    if (class_weights) {
      loss *= target > 0.5 ? class_weights->positive : class_weights->negative;
    }
    return clip01(loss);
  }
  const double d = prediction - target;
  return clip01(d * d);
}

}  // namespace

double empirical_risk(const LabelFn& f, const LabelFn& g,
                      const Dataset& dataset, const RiskWeights& weights,
                      std::optional<ClassWeights> class_weights) {
  double alpha_sum = 0.0;
  for (double a : weights.alpha) {
    if (a < 0.0 || a > 1.0) {
      throw ContractError("empirical_risk: alpha entries must lie in [0, 1]");
    }
    alpha_sum += a;
  }
  if (std::abs(alpha_sum - 1.0) > 1e-9) {
    throw ContractError("empirical_risk: alpha must sum to 1");
  }
  if (dataset.samples.empty()) return 0.0;

  const auto& [a1, a2, a3, a4] = weights.alpha;
  double acc = 0.0;
  for (const Sample& s : dataset.samples) {
    const PresenceMask u = presence_indicator(s);
    double term = 0.0;
    if (u.y1_present && u.y2_present) {
      if (a1 != 0.0) {
        term += a1 * clipped_loss(dataset.task, f(s.x, *s.y1), *s.y2,
                                  class_weights);
      }
      if (a2 != 0.0) {
        term += a2 * clipped_loss(dataset.task, g(s.x, *s.y2), *s.y1,
                                  class_weights);
      }
    }
    if (u.y1_present && a3 != 0.0) {
      term += a3 * clipped_loss(dataset.task, g(s.x, f(s.x, *s.y1)), *s.y1,
                                class_weights);
    }
    if (u.y2_present && a4 != 0.0) {
      term += a4 * clipped_loss(dataset.task, f(s.x, g(s.x, *s.y2)), *s.y2,
                                class_weights);
    }
    acc += term;
  }
  return acc / static_cast<double>(dataset.samples.size());
}

MetricSummary summarize(std::vector<double> values) {
  MetricSummary out;
  out.values = std::move(values);
  if (out.values.empty()) return out;
  double sum = 0.0;
  for (double v : out.values) sum += v;
  out.mean = sum / static_cast<double>(out.values.size());
  if (out.values.size() > 1) {
    double ss = 0.0;
    for (double v : out.values) {
      const double d = v - out.mean;
      ss += d * d;
    }
    out.sd = std::sqrt(ss / static_cast<double>(out.values.size() - 1));
  }
  return out;
}

void ResultsTable::add(const std::string& method, const std::string& panel,
                       const std::string& metric, double value) {
  cells_[method][panel][metric].push_back(value);
}

}  // namespace dll

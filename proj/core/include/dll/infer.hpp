#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dll/data.hpp"
#include "dll/model.hpp"

namespace dll {

struct InferenceConfig {
  double y0 = 1.0;     // label initialization for alternate inference
  int iterations = 1000;
  // Convergence tolerance on max(|dy1|, |dy2|) between consecutive full
  // iterations; absent means always run all iterations.
  std::optional<double> epsilon;
};

// 0.5 for binary classification, 1.0 for regression.
double default_label_init(TaskKind task);

// Inference never mutates parameters; distinct samples may be inferred
// from the same model concurrently.

// p >= 0.5 maps to class 1.
int threshold_class(double probability);

// Per-iteration (y1, y2) iterates of one alternate-inference run.
struct InferenceTrace {
  std::vector<std::pair<double, double>> iterates;
  std::optional<std::size_t> converged_at;  // 1-based iteration index
};

struct LabelEstimate {
  double value = 0.0;               // probability or regression value
  std::optional<int> label;         // thresholded class, classification only
};

// Prediction for the single missing label of a semi-labeled sample:
// missing y2 comes from f(x, y1), missing y1 from g(x, y2). Exactly one
// label must be present.
struct DirectResult {
  std::optional<LabelEstimate> y1;
  std::optional<LabelEstimate> y2;
};
DirectResult direct_infer(const Sample& sample, const ModelConfig& config,
                          const DualTowerParams& params);

// Fixed-point solve of y2 = f(x, y1), y1 = g(x, y2) by iterated
// cross-substitution from y1 = y2 = y0. Classification relays raw
// probabilities between the towers and thresholds only the final values.
struct AlternateResult {
  LabelEstimate y1;
  LabelEstimate y2;
  InferenceTrace trace;
};
AlternateResult alternate_infer(const Sample& sample,
                                const ModelConfig& config,
                                const DualTowerParams& params,
                                const InferenceConfig& inference);

// Generic driver over two scalar step maps (x is baked into the
// callables); alternate_infer wires the towers into this.
struct SolveResult {
  double y1 = 0.0;
  double y2 = 0.0;
  InferenceTrace trace;
};
SolveResult alternate_solve(const std::function<double(double)>& f,
                            const std::function<double(double)>& g,
                            const InferenceConfig& inference);

// One probe application of f after the loop: |f(x, y1) - y2|. The final g
// step makes y1 = g(x, y2) exact by assignment, so this residual is the
// remaining equilibrium gap.
double equilibrium_residual(const Sample& sample, const ModelConfig& config,
                            const DualTowerParams& params,
                            const AlternateResult& result);

// Whole-dataset inference: semi-labeled samples go through direct_infer,
// unlabeled ones through alternate_infer; fully labeled samples need no
// prediction.
struct DatasetInference {
  struct SinglePrediction {
    std::size_t index = 0;
    DirectResult result;
  };
  struct DoublePrediction {
    std::size_t index = 0;
    LabelEstimate y1;
    LabelEstimate y2;
    std::optional<std::size_t> converged_at;
  };

  std::vector<SinglePrediction> singles;
  std::vector<DoublePrediction> doubles;
  // Populated when traces are requested.
  std::vector<std::pair<std::size_t, InferenceTrace>> traces;

  // Aggregates over the double predictions (meaningful when epsilon set).
  std::size_t converged_count = 0;
  std::map<std::size_t, std::size_t> iteration_histogram;

  std::size_t predicted_label_count() const {
    return singles.size() + 2 * doubles.size();
  }
  double converged_fraction() const {
    return doubles.empty() ? 0.0
                           : static_cast<double>(converged_count) /
                                 static_cast<double>(doubles.size());
  }
};

DatasetInference infer_dataset(const Dataset& dataset,
                               const ModelConfig& config,
                               const DualTowerParams& params,
                               const InferenceConfig& inference,
                               bool keep_traces = false);

// CSV with columns sample_id,iteration,y1_hat,y2_hat.
void write_trace_csv(const std::string& path, const DatasetInference& result);

}  // namespace dll

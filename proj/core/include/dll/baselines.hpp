#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dll/data.hpp"
#include "dll/model.hpp"
#include "dll/train.hpp"

namespace dll {

// Decomposition schemes compared against the dual-tower model. All are
// built on the same MLP stack (widths derived from the shared
// ModelConfig), the same optimizer and the same epoch budget so that
// differences isolate the learning scheme.
//
//   ID       two independent single-label models, y1 from x and y2 from x
//   COL      one two-head model fit on fully labeled samples
//   SSL      two-head model fit on fully labeled samples, used to impute
//            the semi-labeled ones, then refit on the union
//   LS       y2-from-x model chained into a y1-from-(x, y2) model
//   DSML     three-stage model reuse passing predicted labels both ways
//   DSML_REV DSML with the label roles swapped throughout
enum class BaselineKind { ID, COL, SSL, LS, DSML, DSML_REV };

std::string to_string(BaselineKind kind);
BaselineKind baseline_kind_from_string(const std::string& s);

struct BaselineConfig {
  ModelConfig model;   // widths family + task; seed unused here
  TrainConfig train;   // epochs, batch, lr, class weights
  std::uint64_t seed = 0;
};

// Single-output component net: features (optionally with one conditioning
// label appended) -> one probability or value.
struct ComponentNet {
  std::string role;       // e.g. "p(y2|x)"
  MLPSpec spec;
  ParamGroup params;
  bool label_conditioned = false;
  std::size_t train_count = 0;  // samples that contributed gradients
};

// Two-head component (shared encoder) for the multi-output schemes.
struct MultiOutputNet {
  std::string role;
  MultiTaskParams params;
  std::size_t train_count = 0;
};

struct BaselinePredictor {
  BaselineKind kind = BaselineKind::ID;
  TaskKind task = TaskKind::Regression;
  ModelConfig model;  // widths family used by the components
  std::vector<ComponentNet> components;
  std::vector<MultiOutputNet> multi_components;

  std::size_t component_count() const {
    return components.size() + multi_components.size();
  }
};

// Fits one scheme on the (partially labeled) training data. Stages raise a
// configuration error naming themselves when their required subset is
// empty.
BaselinePredictor baseline_fit(BaselineKind kind, const Dataset& trainData,
                               const BaselineConfig& config);

// Predictions for the missing labels of one sample (probabilities for
// classification). Schemes that never condition on labels return the same
// answer regardless of which labels are present; at least one label must
// be missing.
struct BaselinePrediction {
  std::optional<double> y1;
  std::optional<double> y2;
};
BaselinePrediction baseline_predict(const BaselinePredictor& predictor,
                                    const Sample& sample,
                                    const PresenceMask& presence);

}  // namespace dll

#include "dll/data.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "dll/error.hpp"

namespace dll {

std::string to_string(TaskKind task) {
  return task == TaskKind::BinaryClassification ? "binary_classification"
                                                : "regression";
}

TaskKind task_kind_from_string(const std::string& s) {
  if (s == "binary_classification" || s == "classification") {
    return TaskKind::BinaryClassification;
  }
  if (s == "regression") return TaskKind::Regression;
  throw ConfigError("unknown task kind '" + s + "'");
}

PresenceMask presence_indicator(const Sample& sample) {
  return PresenceMask{sample.y1.has_value(), sample.y2.has_value()};
}

DatasetSplit partition(const Dataset& dataset) {
  DatasetSplit split;
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    const PresenceMask u = presence_indicator(dataset.samples[i]);
    if (u.y1_present && u.y2_present) {
      split.labeled.push_back(i);
    } else if (u.y1_present) {
      split.y1_only.push_back(i);
    } else if (u.y2_present) {
      split.y2_only.push_back(i);
    } else {
      split.unlabeled.push_back(i);
    }
  }
  return split;
}

Dataset mask_labels(const Dataset& dataset, double rate1, double rate2,
                    std::uint64_t seed) {
  if (rate1 < 0.0 || rate1 > 1.0 || rate2 < 0.0 || rate2 > 1.0) {
    throw ContractError("mask_labels: rates must lie in [0, 1]");
  }
  Dataset out = dataset;
  Rng rng(seed);
  for (Sample& s : out.samples) {
    if (!s.y1.has_value() || !s.y2.has_value()) {
      throw ContractError("mask_labels: input dataset must be fully labeled");
    }
    // One draw per label per sample, in (y1, y2) order.
    if (rng.uniform() < rate1) s.y1.reset();
    if (rng.uniform() < rate2) s.y2.reset();
  }
  return out;
}

TrainValTest train_val_test_split(const Dataset& dataset,
                                  std::uint64_t seed) {
  std::vector<std::size_t> order(dataset.samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  shuffle(order, rng);

  const std::size_t n = order.size();
  const std::size_t n_train = static_cast<std::size_t>(
      static_cast<double>(n) * 0.64);
  const std::size_t n_val = static_cast<std::size_t>(
      static_cast<double>(n) * 0.16);

  TrainValTest out;
  for (Dataset* part : {&out.train, &out.val, &out.test}) {
    part->task = dataset.task;
    part->feature_dim = dataset.feature_dim;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Sample& s = dataset.samples[order[i]];
    if (i < n_train) {
      out.train.samples.push_back(s);
    } else if (i < n_train + n_val) {
      out.val.samples.push_back(s);
    } else {
      out.test.samples.push_back(s);
    }
  }
  return out;
}

void validate_dataset(const Dataset& dataset) {
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    const Sample& s = dataset.samples[i];
    if (s.x.size() != dataset.feature_dim) {
      throw ContractError("dataset: sample " + std::to_string(i) + " has " +
                          std::to_string(s.x.size()) + " features, expected " +
                          std::to_string(dataset.feature_dim));
    }
    if (dataset.task == TaskKind::BinaryClassification) {
      for (const auto& y : {s.y1, s.y2}) {
        if (y.has_value() && *y != 0.0 && *y != 1.0) {
          throw ContractError("dataset: sample " + std::to_string(i) +
                              " has non-binary label");
        }
      }
    }
  }
}

void MinMaxScaler::fit(const Dataset& dataset) {
  if (dataset.samples.empty()) {
    throw ContractError("scaler: cannot fit on an empty dataset");
  }
  const std::size_t d = dataset.feature_dim;
  mins_.assign(d, std::numeric_limits<double>::infinity());
  maxs_.assign(d, -std::numeric_limits<double>::infinity());
  for (const Sample& s : dataset.samples) {
    for (std::size_t j = 0; j < d; ++j) {
      mins_[j] = std::min(mins_[j], s.x[j]);
      maxs_[j] = std::max(maxs_[j], s.x[j]);
    }
  }
}

void MinMaxScaler::transform(Dataset& dataset) const {
  if (!fitted()) throw ContractError("scaler: transform before fit");
  for (Sample& s : dataset.samples) {
    for (std::size_t j = 0; j < s.x.size(); ++j) {
      const double range = maxs_[j] - mins_[j];
      s.x[j] = range > 0.0 ? (s.x[j] - mins_[j]) / range : 0.0;
    }
  }
}

}  // namespace dll

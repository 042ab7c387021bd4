#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dll/rng.hpp"

namespace dll {

enum class TaskKind { BinaryClassification, Regression };

std::string to_string(TaskKind task);
TaskKind task_kind_from_string(const std::string& s);

// One observation: features plus two optional labels. For binary
// classification, present labels are 0 or 1 (stored as doubles).
struct Sample {
  std::vector<double> x;
  std::optional<double> y1;
  std::optional<double> y2;
};

struct PresenceMask {
  bool y1_present = false;
  bool y2_present = false;

  bool operator==(const PresenceMask&) const = default;
};

struct Dataset {
  TaskKind task = TaskKind::Regression;
  std::size_t feature_dim = 0;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
};

// Disjoint index lists by label presence; together they cover the dataset
// and each list preserves dataset order.
struct DatasetSplit {
  std::vector<std::size_t> labeled;    // both labels present
  std::vector<std::size_t> y1_only;
  std::vector<std::size_t> y2_only;
  std::vector<std::size_t> unlabeled;
};

PresenceMask presence_indicator(const Sample& sample);

DatasetSplit partition(const Dataset& dataset);

// Independently removes each label with its rate via seeded Bernoulli
// draws. The input must be fully labeled.
Dataset mask_labels(const Dataset& dataset, double rate1, double rate2,
                    std::uint64_t seed);

// Seeded shuffle, then contiguous 64% / 16% / rest cut (sizes floored,
// remainder to test).
struct TrainValTest {
  Dataset train;
  Dataset val;
  Dataset test;
};
TrainValTest train_val_test_split(const Dataset& dataset, std::uint64_t seed);

// Checks feature dims and (for classification) 0/1 labels.
void validate_dataset(const Dataset& dataset);

// Min-max feature scaling to [0, 1] with statistics taken from one
// (training) dataset. Degenerate features (max == min) map to 0.
class MinMaxScaler {
 public:
  void fit(const Dataset& dataset);
  void transform(Dataset& dataset) const;
  bool fitted() const { return !mins_.empty(); }

 private:
  std::vector<double> mins_;
  std::vector<double> maxs_;
};

}  // namespace dll

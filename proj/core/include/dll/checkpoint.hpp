#pragma once

#include <string>
#include <vector>

#include "dll/model.hpp"
#include "dll/param.hpp"

namespace dll {

// Versioned binary container for a model configuration plus its parameter
// groups. Doubles are stored as raw little-endian IEEE-754 bytes, so a
// save/load round trip is bit-exact.
struct Checkpoint {
  std::string kind;  // e.g. "dualtower", "multitask"
  ModelConfig config;
  std::vector<ParamGroup> groups;
};

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

Checkpoint make_checkpoint(const ModelConfig& config,
                           const DualTowerParams& params);
Checkpoint make_checkpoint(const ModelConfig& config,
                           const MultiTaskParams& params);

DualTowerParams dual_tower_from_checkpoint(const Checkpoint& checkpoint);
MultiTaskParams multitask_from_checkpoint(const Checkpoint& checkpoint);

}  // namespace dll

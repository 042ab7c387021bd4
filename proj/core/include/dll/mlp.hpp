#pragma once

#include <span>
#include <string>
#include <vector>

#include "dll/param.hpp"
#include "dll/rng.hpp"
#include "dll/tape.hpp"

namespace dll {

enum class Activation { Relu, Tanh };
enum class OutputActivation { Identity, Sigmoid, Softmax };

// Fully connected net: widths = {input, hidden..., output}. The hidden
// activation is applied after every layer but the last, the output
// activation after the last.
struct MLPSpec {
  std::vector<int> widths;
  Activation hidden = Activation::Relu;
  OutputActivation output = OutputActivation::Identity;

  int layer_count() const { return static_cast<int>(widths.size()) - 1; }
  int input_width() const { return widths.front(); }
  int output_width() const { return widths.back(); }
};

void validate_mlp_spec(const MLPSpec& spec, const std::string& prefix);

// Weight key "<prefix>W<i>" of shape [widths[i], widths[i+1]], bias
// "<prefix>b<i>" of shape [widths[i+1]]; init_uniform with fan_in =
// widths[i]. Entries are appended in layer order.
void init_mlp_params(const MLPSpec& spec, ParamGroup& group,
                     const std::string& prefix, Rng& rng);

// Graph-building forward pass. Dimension errors name the offending layer.
Var mlp_forward(Tape& tape, const MLPSpec& spec, const ParamGroup& group,
                const std::string& prefix, Var input);

// Value-only forward pass over the same kernels (bit-identical to the
// value of mlp_forward).
std::vector<double> mlp_eval(const MLPSpec& spec, const ParamGroup& group,
                             const std::string& prefix,
                             std::span<const double> input);

}  // namespace dll

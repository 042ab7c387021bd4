#include "dll/mlp.hpp"

#include <cmath>

#include "dll/error.hpp"

namespace dll {

void validate_mlp_spec(const MLPSpec& spec, const std::string& prefix) {
  if (spec.widths.size() < 2) {
    throw ConfigError("mlp '" + prefix + "': need at least input and output widths");
  }
  for (int w : spec.widths) {
    if (w <= 0) {
      throw ConfigError("mlp '" + prefix + "': non-positive width");
    }
  }
}

void init_mlp_params(const MLPSpec& spec, ParamGroup& group,
                     const std::string& prefix, Rng& rng) {
  validate_mlp_spec(spec, prefix);
  for (int l = 0; l < spec.layer_count(); ++l) {
    const auto in = static_cast<std::size_t>(spec.widths[l]);
    const auto out = static_cast<std::size_t>(spec.widths[l + 1]);
    group.insert(prefix + "W" + std::to_string(l),
                 init_uniform({in, out}, in, rng));
    group.insert(prefix + "b" + std::to_string(l),
                 init_uniform({out}, in, rng));
  }
}

Var mlp_forward(Tape& tape, const MLPSpec& spec, const ParamGroup& group,
                const std::string& prefix, Var input) {
  validate_mlp_spec(spec, prefix);
  const Tensor& in = tape.value(input);
  if (in.rank() != 1 ||
      in.shape()[0] != static_cast<std::size_t>(spec.input_width())) {
    throw DimensionError("mlp '" + prefix + "' layer 0: input " +
                         in.shape_str() + ", expected [" +
                         std::to_string(spec.input_width()) + "]");
  }
  Var h = input;
  for (int l = 0; l < spec.layer_count(); ++l) {
    const std::string ws = prefix + "W" + std::to_string(l);
    const std::string bs = prefix + "b" + std::to_string(l);
    if (!group.contains(ws) || !group.contains(bs)) {
      throw DimensionError("mlp '" + prefix + "' layer " + std::to_string(l) +
                           ": missing parameters in group '" + group.name() +
                           "'");
    }
    h = tape.affine(h, tape.param(group, ws), tape.param(group, bs));
    const bool last = l + 1 == spec.layer_count();
    if (!last) {
      h = spec.hidden == Activation::Relu ? tape.relu(h) : tape.tanh(h);
    } else {
      switch (spec.output) {
        case OutputActivation::Identity:
          break;
        case OutputActivation::Sigmoid:
          h = tape.sigmoid(h);
          break;
        case OutputActivation::Softmax:
          h = tape.softmax(h);
          break;
      }
    }
  }
  return h;
}

std::vector<double> mlp_eval(const MLPSpec& spec, const ParamGroup& group,
                             const std::string& prefix,
                             std::span<const double> input) {
  validate_mlp_spec(spec, prefix);
  if (input.size() != static_cast<std::size_t>(spec.input_width())) {
    throw DimensionError("mlp '" + prefix + "' layer 0: input [" +
                         std::to_string(input.size()) + "], expected [" +
                         std::to_string(spec.input_width()) + "]");
  }
  std::vector<double> h(input.begin(), input.end());
  std::vector<double> next;
  for (int l = 0; l < spec.layer_count(); ++l) {
    const Tensor& w = group.at(prefix + "W" + std::to_string(l));
    const Tensor& b = group.at(prefix + "b" + std::to_string(l));
    next.assign(w.cols(), 0.0);
    kernels::affine(h, w, b, next);
    const bool last = l + 1 == spec.layer_count();
    if (!last) {
      if (spec.hidden == Activation::Relu) {
        for (double& v : next) {
          if (v < 0.0) v = 0.0;
        }
      } else {
        for (double& v : next) v = std::tanh(v);
      }
    } else {
      switch (spec.output) {
        case OutputActivation::Identity:
          break;
        case OutputActivation::Sigmoid:
          for (double& v : next) v = kernels::sigmoid(v);
          break;
        case OutputActivation::Softmax: {
          std::vector<double> soft(next.size());
          kernels::softmax(next, soft);
          next = std::move(soft);
          break;
        }
      }
    }
    h = std::move(next);
  }
  return h;
}

}  // namespace dll

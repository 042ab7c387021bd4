#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dll/param.hpp"
#include "dll/tensor.hpp"

namespace dll {

// Probability floor applied inside every log-of-probability expression.
inline constexpr double kLogFloor = 1e-12;

// Handle into a Tape node.
struct Var {
  int id = -1;
};

// Records a computation graph for one forward pass and plays it backwards.
// Nodes are appended in topological order, so reverse iteration is a valid
// reverse sweep. Parameter tensors are copied into leaf nodes; backward
// never touches the originating ParamGroup.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var constant(double value);

  // Leaf for one parameter tensor; repeated calls for the same
  // (group, key) return the same node so gradients accumulate.
  Var param(const ParamGroup& group, const std::string& key);
  // Registers every entry of the group, so backward() reports a (possibly
  // zero) gradient for each of them.
  void register_group(const ParamGroup& group);

  Var affine(Var x, Var w, Var b);
  Var relu(Var v);
  Var tanh(Var v);
  Var sigmoid(Var v);
  Var softmax(Var v);
  Var concat(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var v, double c);
  Var square(Var v);
  Var sum(Var v);
  Var at(Var v, std::size_t i);
  // Scalar -> rank-1 [1] view with pass-through gradient.
  Var as_vector(Var scalar);
  Var log_clamped(Var v, double floor = kLogFloor);

  // Mean of squared elementwise differences.
  Var mse(Var a, Var b);

  // -weight(label) * log(max(prob[label], kLogFloor)). `prob` must hold a
  // distribution: entries >= 0 summing to 1 within 1e-6.
  Var cross_entropy(Var prob, std::size_t label,
                    const std::vector<double>* class_weights = nullptr);

  // Scalar probability p -> distribution [1-p, p].
  Var bernoulli_pair(Var p);

  const Tensor& value(Var v) const;
  std::size_t node_count() const { return nodes_.size(); }

  // Reverse sweep from a scalar loss. Returns one gradient per registered
  // parameter; parameters that do not reach the loss get zero tensors.
  GradientMap backward(Var loss);

  // Gradient buffer of a node after backward(); test hook.
  const Tensor& grad(Var v) const;

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::function<void(Tape&, const Tensor&)> back;  // null for leaves
  };

  Var push(Tensor value, std::function<void(Tape&, const Tensor&)> back);
  Tensor& grad_buf(int id) { return nodes_[id].grad; }
  const Node& node(Var v) const;

  std::vector<Node> nodes_;
  std::map<std::string, int> param_leaves_;  // qualified key -> node id
};

}  // namespace dll

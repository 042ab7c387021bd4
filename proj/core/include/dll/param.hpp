#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dll/rng.hpp"
#include "dll/tensor.hpp"

namespace dll {

// Named, ordered collection of parameter tensors. Keys are unique and
// iteration follows insertion order. Read-only use is thread-safe;
// mutation (sgd_step) needs exclusive access.
class ParamGroup {
 public:
  ParamGroup() = default;
  explicit ParamGroup(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }

  void insert(const std::string& key, Tensor value);
  bool contains(const std::string& key) const;
  Tensor& at(const std::string& key);
  const Tensor& at(const std::string& key) const;

  const std::vector<std::pair<std::string, Tensor>>& entries() const {
    return entries_;
  }
  std::vector<std::pair<std::string, Tensor>>& entries() { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::string name_;
  std::vector<std::pair<std::string, Tensor>> entries_;
  std::map<std::string, std::size_t> index_;
};

bool bitwise_equal(const ParamGroup& a, const ParamGroup& b);

// Gradients keyed by "<group>/<key>". Ordered so that iteration (and hence
// any reduction built on it) is deterministic.
class GradientMap {
 public:
  static std::string qualify(const std::string& group, const std::string& key);

  void set(const std::string& group, const std::string& key, Tensor grad);
  const Tensor* find(const std::string& group, const std::string& key) const;
  bool empty() const { return grads_.empty(); }
  std::size_t size() const { return grads_.size(); }

  const std::map<std::string, Tensor>& entries() const { return grads_; }

 private:
  std::map<std::string, Tensor> grads_;
};

// params <- params - lr * grad for every entry present in `grads`. Entries
// without a gradient are left untouched (so an empty map or lr = 0 is a
// no-op). Gradient keys for this group that name no parameter violate the
// contract; non-finite gradients raise a numeric error naming the key.
void sgd_step(ParamGroup& params, const GradientMap& grads, double lr);

// Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
Tensor init_uniform(std::vector<std::size_t> shape, std::size_t fan_in,
                    Rng& rng);

}  // namespace dll

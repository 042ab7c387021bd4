#include "dll/param.hpp"

#include <cmath>

#include "dll/error.hpp"

namespace dll {

void ParamGroup::insert(const std::string& key, Tensor value) {
  if (index_.count(key)) {
    throw ContractError("param group '" + name_ + "': duplicate key '" + key +
                        "'");
  }
  index_[key] = entries_.size();
  entries_.emplace_back(key, std::move(value));
}

bool ParamGroup::contains(const std::string& key) const {
  return index_.count(key) != 0;
}

Tensor& ParamGroup::at(const std::string& key) {
  auto it = index_.find(key);
  if (it == index_.end()) {
    throw ContractError("param group '" + name_ + "': no key '" + key + "'");
  }
  return entries_[it->second].second;
}

const Tensor& ParamGroup::at(const std::string& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) {
    throw ContractError("param group '" + name_ + "': no key '" + key + "'");
  }
  return entries_[it->second].second;
}

bool bitwise_equal(const ParamGroup& a, const ParamGroup& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.entries()[i].first != b.entries()[i].first) return false;
    if (!bitwise_equal(a.entries()[i].second, b.entries()[i].second)) {
      return false;
    }
  }
  return true;
}

std::string GradientMap::qualify(const std::string& group,
                                 const std::string& key) {
  return group + "/" + key;
}

void GradientMap::set(const std::string& group, const std::string& key,
                      Tensor grad) {
  grads_[qualify(group, key)] = std::move(grad);
}

const Tensor* GradientMap::find(const std::string& group,
                                const std::string& key) const {
  auto it = grads_.find(qualify(group, key));
  return it == grads_.end() ? nullptr : &it->second;
}

void sgd_step(ParamGroup& params, const GradientMap& grads, double lr) {
  if (lr < 0.0) {
    throw ContractError("sgd_step: negative learning rate");
  }
  const std::string prefix = params.name() + "/";
  for (const auto& [qualified, grad] : grads.entries()) {
    if (qualified.rfind(prefix, 0) == 0 &&
        !params.contains(qualified.substr(prefix.size()))) {
      throw ContractError("sgd_step: gradient '" + qualified +
                          "' names no parameter");
    }
  }
  for (auto& [key, value] : params.entries()) {
    const Tensor* grad = grads.find(params.name(), key);
    if (!grad) continue;
    if (!grad->same_shape(value)) {
      throw DimensionError("sgd_step: gradient shape " + grad->shape_str() +
                           " vs parameter " + value.shape_str() + " for '" +
                           key + "'");
    }
    if (!grad->all_finite()) {
      throw NumericError("sgd_step: non-finite gradient for '" +
                         GradientMap::qualify(params.name(), key) + "'");
    }
    for (std::size_t i = 0; i < value.size(); ++i) {
      value[i] -= lr * (*grad)[i];
    }
  }
}

Tensor init_uniform(std::vector<std::size_t> shape, std::size_t fan_in,
                    Rng& rng) {
  Tensor t = Tensor::zeros(std::move(shape));
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = rng.uniform(-bound, bound);
  }
  return t;
}

}  // namespace dll

#include "dll/tape.hpp"

#include <cmath>

#include "dll/error.hpp"

namespace dll {

namespace {

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shapes " + a.shape_str() +
                         " and " + b.shape_str() + " differ");
  }
}

}  // namespace

const Tape::Node& Tape::node(Var v) const {
  if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
    throw ContractError("tape: invalid var");
  }
  return nodes_[v.id];
}

const Tensor& Tape::value(Var v) const { return node(v).value; }

const Tensor& Tape::grad(Var v) const { return node(v).grad; }

Var Tape::push(Tensor value, std::function<void(Tape&, const Tensor&)> back) {
  nodes_.push_back(Node{std::move(value), Tensor::zeros({}), std::move(back)});
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(Tensor value) { return push(std::move(value), nullptr); }

Var Tape::constant(double value) { return push(Tensor(value), nullptr); }

Var Tape::param(const ParamGroup& group, const std::string& key) {
  const std::string qualified = GradientMap::qualify(group.name(), key);
  auto it = param_leaves_.find(qualified);
  if (it != param_leaves_.end()) return Var{it->second};
  Var v = push(group.at(key), nullptr);
  param_leaves_[qualified] = v.id;
  return v;
}

void Tape::register_group(const ParamGroup& group) {
  for (const auto& [key, _] : group.entries()) param(group, key);
}

Var Tape::affine(Var xv, Var wv, Var bv) {
  const Tensor& x = value(xv);
  const Tensor& w = value(wv);
  const Tensor& b = value(bv);
  if (x.rank() != 1 || w.rank() != 2 || b.rank() != 1 ||
      x.shape()[0] != w.rows() || b.shape()[0] != w.cols()) {
    throw DimensionError("affine: x " + x.shape_str() + ", w " +
                         w.shape_str() + ", b " + b.shape_str());
  }
  Tensor out = Tensor::zeros({w.cols()});
  kernels::affine(x.values(), w, b, out.values());
  const int xi = xv.id, wi = wv.id, bi = bv.id;
  return push(std::move(out), [xi, wi, bi](Tape& t, const Tensor& g) {
    const Tensor& x = t.nodes_[xi].value;
    const Tensor& w = t.nodes_[wi].value;
    Tensor& gx = t.grad_buf(xi);
    Tensor& gw = t.grad_buf(wi);
    Tensor& gb = t.grad_buf(bi);
    const std::size_t in = w.rows(), n = w.cols();
    for (std::size_t k = 0; k < in; ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += g[j] * w.at(k, j);
      gx[k] += acc;
      for (std::size_t j = 0; j < n; ++j) gw[k * n + j] += x[k] * g[j];
    }
    for (std::size_t j = 0; j < n; ++j) gb[j] += g[j];
  });
}

Var Tape::relu(Var v) {
  Tensor out = value(v);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] < 0.0) out[i] = 0.0;
  }
  const int vi = v.id;
  return push(std::move(out), [vi](Tape& t, const Tensor& g) {
    const Tensor& x = t.nodes_[vi].value;
    Tensor& gx = t.grad_buf(vi);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] > 0.0) gx[i] += g[i];
    }
  });
}

Var Tape::tanh(Var v) {
  Tensor out = value(v);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
  const int vi = v.id;
  const int oi = static_cast<int>(nodes_.size());
  return push(std::move(out), [vi, oi](Tape& t, const Tensor& g) {
    const Tensor& y = t.nodes_[oi].value;
    Tensor& gx = t.grad_buf(vi);
    for (std::size_t i = 0; i < y.size(); ++i) {
      gx[i] += g[i] * (1.0 - y[i] * y[i]);
    }
  });
}

Var Tape::sigmoid(Var v) {
  Tensor out = value(v);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = kernels::sigmoid(out[i]);
  }
  const int vi = v.id;
  const int oi = static_cast<int>(nodes_.size());
  return push(std::move(out), [vi, oi](Tape& t, const Tensor& g) {
    const Tensor& y = t.nodes_[oi].value;
    Tensor& gx = t.grad_buf(vi);
    for (std::size_t i = 0; i < y.size(); ++i) {
      gx[i] += g[i] * y[i] * (1.0 - y[i]);
    }
  });
}

Var Tape::softmax(Var v) {
  const Tensor& x = value(v);
  if (x.rank() != 1) {
    throw DimensionError("softmax: expected rank-1, got " + x.shape_str());
  }
  Tensor out = Tensor::zeros(x.shape());
  kernels::softmax(x.values(), out.values());
  const int vi = v.id;
  const int oi = static_cast<int>(nodes_.size());
  return push(std::move(out), [vi, oi](Tape& t, const Tensor& g) {
    const Tensor& y = t.nodes_[oi].value;
    Tensor& gx = t.grad_buf(vi);
    double dot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) dot += g[i] * y[i];
    for (std::size_t i = 0; i < y.size(); ++i) {
      gx[i] += y[i] * (g[i] - dot);
    }
  });
}

Var Tape::concat(Var a, Var b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (ta.rank() != 1 || tb.rank() != 1) {
    throw DimensionError("concat: expected rank-1 operands");
  }
  std::vector<double> vals;
  vals.reserve(ta.size() + tb.size());
  vals.insert(vals.end(), ta.values().begin(), ta.values().end());
  vals.insert(vals.end(), tb.values().begin(), tb.values().end());
  const int ai = a.id, bi = b.id;
  const std::size_t na = ta.size();
  return push(Tensor::vector(std::move(vals)),
              [ai, bi, na](Tape& t, const Tensor& g) {
                Tensor& ga = t.grad_buf(ai);
                Tensor& gb = t.grad_buf(bi);
                for (std::size_t i = 0; i < na; ++i) ga[i] += g[i];
                for (std::size_t i = 0; i < gb.size(); ++i) {
                  gb[i] += g[na + i];
                }
              });
}

Var Tape::add(Var a, Var b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  check_same_shape(ta, tb, "add");
  Tensor out = ta;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += tb[i];
  const int ai = a.id, bi = b.id;
  return push(std::move(out), [ai, bi](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_buf(ai);
    Tensor& gb = t.grad_buf(bi);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i];
      gb[i] += g[i];
    }
  });
}

Var Tape::sub(Var a, Var b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  check_same_shape(ta, tb, "sub");
  Tensor out = ta;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= tb[i];
  const int ai = a.id, bi = b.id;
  return push(std::move(out), [ai, bi](Tape& t, const Tensor& g) {
    Tensor& ga = t.grad_buf(ai);
    Tensor& gb = t.grad_buf(bi);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i];
      gb[i] -= g[i];
    }
  });
}

Var Tape::mul(Var a, Var b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  check_same_shape(ta, tb, "mul");
  Tensor out = ta;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= tb[i];
  const int ai = a.id, bi = b.id;
  return push(std::move(out), [ai, bi](Tape& t, const Tensor& g) {
    const Tensor& x = t.nodes_[ai].value;
    const Tensor& y = t.nodes_[bi].value;
    Tensor& ga = t.grad_buf(ai);
    Tensor& gb = t.grad_buf(bi);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i] * y[i];
      gb[i] += g[i] * x[i];
    }
  });
}

Var Tape::scale(Var v, double c) {
  Tensor out = value(v);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c;
  const int vi = v.id;
  return push(std::move(out), [vi, c](Tape& t, const Tensor& g) {
    Tensor& gx = t.grad_buf(vi);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += c * g[i];
  });
}

Var Tape::square(Var v) {
  Tensor out = value(v);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= out[i];
  const int vi = v.id;
  return push(std::move(out), [vi](Tape& t, const Tensor& g) {
    const Tensor& x = t.nodes_[vi].value;
    Tensor& gx = t.grad_buf(vi);
    for (std::size_t i = 0; i < g.size(); ++i) {
      gx[i] += 2.0 * x[i] * g[i];
    }
  });
}

Var Tape::sum(Var v) {
  const Tensor& x = value(v);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i];
  const int vi = v.id;
  return push(Tensor(acc), [vi](Tape& t, const Tensor& g) {
    Tensor& gx = t.grad_buf(vi);
    const double gs = g[0];
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gs;
  });
}

Var Tape::at(Var v, std::size_t i) {
  const Tensor& x = value(v);
  if (i >= x.size()) {
    throw DimensionError("at: index " + std::to_string(i) + " out of " +
                         x.shape_str());
  }
  const int vi = v.id;
  return push(Tensor(x[i]), [vi, i](Tape& t, const Tensor& g) {
    t.grad_buf(vi)[i] += g[0];
  });
}

Var Tape::as_vector(Var scalar) {
  const Tensor& x = value(scalar);
  if (!x.is_scalar()) {
    throw ContractError("as_vector: expected scalar, got " + x.shape_str());
  }
  const int vi = scalar.id;
  return push(Tensor::vector({x.scalar()}), [vi](Tape& t, const Tensor& g) {
    t.grad_buf(vi)[0] += g[0];
  });
}

Var Tape::log_clamped(Var v, double floor) {
  const Tensor& x = value(v);
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::log(out[i] < floor ? floor : out[i]);
  }
  const int vi = v.id;
  return push(std::move(out), [vi, floor](Tape& t, const Tensor& g) {
    const Tensor& x = t.nodes_[vi].value;
    Tensor& gx = t.grad_buf(vi);
    for (std::size_t i = 0; i < g.size(); ++i) {
      // Clamped entries are constants; no gradient.
      if (x[i] >= floor) gx[i] += g[i] / x[i];
    }
  });
}

Var Tape::mse(Var a, Var b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  check_same_shape(ta, tb, "mse");
  const std::size_t n = ta.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = ta[i] - tb[i];
    acc += d * d;
  }
  const int ai = a.id, bi = b.id;
  return push(Tensor(acc / static_cast<double>(n)),
              [ai, bi, n](Tape& t, const Tensor& g) {
                const Tensor& x = t.nodes_[ai].value;
                const Tensor& y = t.nodes_[bi].value;
                Tensor& ga = t.grad_buf(ai);
                Tensor& gb = t.grad_buf(bi);
                const double c = 2.0 * g[0] / static_cast<double>(n);
                for (std::size_t i = 0; i < n; ++i) {
                  const double d = c * (x[i] - y[i]);
                  ga[i] += d;
                  gb[i] -= d;
                }
              });
}

Var Tape::cross_entropy(Var prob, std::size_t label,
                        const std::vector<double>* class_weights) {
  const Tensor& p = value(prob);
  if (p.rank() != 1) {
    throw ContractError("cross_entropy: expected rank-1 distribution");
  }
  if (label >= p.size()) {
    throw ContractError("cross_entropy: label " + std::to_string(label) +
                        " out of range for " + p.shape_str());
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0) {
      throw ContractError("cross_entropy: negative probability");
    }
    sum += p[i];
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw ContractError("cross_entropy: distribution sums to " +
                        std::to_string(sum));
  }
  double w = 1.0;
  if (class_weights) {
    if (class_weights->size() != p.size()) {
      throw ContractError("cross_entropy: class weight count mismatch");
    }
    w = (*class_weights)[label];
  }
  const double pl = p[label];
  const double clamped = pl < kLogFloor ? kLogFloor : pl;
  const int pi = prob.id;
  return push(Tensor(-w * std::log(clamped)),
              [pi, label, w, pl](Tape& t, const Tensor& g) {
                if (pl < kLogFloor) return;  // clamped: constant
                t.grad_buf(pi)[label] += -w / pl * g[0];
              });
}

Var Tape::bernoulli_pair(Var p) {
  const Tensor& tp = value(p);
  if (!tp.is_scalar()) {
    throw ContractError("bernoulli_pair: expected scalar probability");
  }
  const double v = tp.scalar();
  const int pi = p.id;
  return push(Tensor::vector({1.0 - v, v}), [pi](Tape& t, const Tensor& g) {
    t.grad_buf(pi)[0] += g[1] - g[0];
  });
}

GradientMap Tape::backward(Var loss) {
  const Tensor& lv = value(loss);
  if (!lv.is_scalar()) {
    throw ContractError("backward: loss has shape " + lv.shape_str() +
                        ", expected scalar");
  }
  for (Node& n : nodes_) {
    n.grad = Tensor::zeros(n.value.shape());
  }
  nodes_[loss.id].grad[0] = 1.0;
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.back) n.back(*this, n.grad);
  }
  GradientMap out;
  for (const auto& [qualified, id] : param_leaves_) {
    const auto slash = qualified.find('/');
    out.set(qualified.substr(0, slash), qualified.substr(slash + 1),
            nodes_[id].grad);
  }
  return out;
}

}  // namespace dll

#include "dll/tensor.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "dll/error.hpp"

namespace dll {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (shape_product(shape_) != values_.size()) {
    throw DimensionError("tensor: shape " + shape_str() + " does not match " +
                         std::to_string(values_.size()) + " values");
  }
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  const std::size_t n = shape_product(shape);
  return Tensor(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

double Tensor::scalar() const {
  if (!is_scalar()) {
    throw ContractError("tensor: scalar() on shape " + shape_str());
  }
  return values_[0];
}

double Tensor::at(std::size_t r, std::size_t c) const {
  return values_[r * shape_[1] + c];
}

std::size_t Tensor::rows() const { return shape_.at(0); }
std::size_t Tensor::cols() const { return shape_.at(1); }

bool Tensor::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Tensor::fill(double v) {
  for (double& x : values_) x = v;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << 'x';
    os << shape_[i];
  }
  os << ']';
  return os.str();
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) return false;
  return std::memcmp(a.values().data(), b.values().data(),
                     a.size() * sizeof(double)) == 0;
}

namespace kernels {

void affine(std::span<const double> x, const Tensor& w, const Tensor& b,
            std::span<double> out) {
  const std::size_t in = w.rows();
  const std::size_t n = w.cols();
  for (std::size_t j = 0; j < n; ++j) out[j] = b[j];
  const double* wp = w.values().data();
  for (std::size_t k = 0; k < in; ++k) {
    const double xk = x[k];
    const double* row = wp + k * n;
    for (std::size_t j = 0; j < n; ++j) out[j] += xk * row[j];
  }
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void softmax(std::span<const double> in, std::span<double> out) {
  double m = in[0];
  for (double v : in) m = v > m ? v : m;
  double sum = 0.0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = std::exp(in[i] - m);
    sum += out[i];
  }
  for (std::size_t i = 0; i < in.size(); ++i) out[i] /= sum;
}

}  // namespace kernels

}  // namespace dll

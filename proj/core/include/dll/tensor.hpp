#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace dll {

// Dense row-major tensor of doubles. Rank 0 (empty shape) is a scalar with
// exactly one element. Safe to share across threads read-only.
class Tensor {
 public:
  Tensor() : values_(1, 0.0) {}
  explicit Tensor(double scalar) : values_(1, scalar) {}
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor vector(std::vector<double> values);
  // rows x cols, row-major.
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> values);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return values_.size(); }

  bool is_scalar() const { return shape_.empty(); }
  double scalar() const;

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  // Matrix accessors; tensor must be rank 2.
  double at(std::size_t r, std::size_t c) const;
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;

  void fill(double v);

  std::string shape_str() const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
};

bool bitwise_equal(const Tensor& a, const Tensor& b);

namespace kernels {

// out[j] = b[j] + sum_k x[k] * W(k, j), with k ascending. Both the tape
// forward pass and the fast evaluation path call this, so the two produce
// bit-identical values.
void affine(std::span<const double> x, const Tensor& w, const Tensor& b,
            std::span<double> out);

double sigmoid(double x);
void softmax(std::span<const double> in, std::span<double> out);

}  // namespace kernels

}  // namespace dll

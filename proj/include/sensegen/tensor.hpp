#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace sensegen {

// Dense row-major array of 64-bit floats. Rank 1 (vectors) and rank 2
// (matrices) cover everything the models need; rank 0 is not used, scalars
// are shape {1}.
class Tensor {
public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);  // zero-filled
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor full(std::vector<std::size_t> shape, double v);
  static Tensor scalar(double v);
  static Tensor vector(std::vector<double> v);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> v);
  static Tensor identity(std::size_t n);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return values_.size(); }
  std::size_t rows() const;
  std::size_t cols() const;

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& at(std::size_t r, std::size_t c);
  double at(std::size_t r, std::size_t c) const;

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;

  // "[2x3]" for error messages
  std::string shape_str() const;

private:
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
};

// Value kernels. The tape records these same computations, so forward
// results are identical whether or not gradients are being tracked.
namespace tops {

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
// a*x + b elementwise
Tensor axpb(const Tensor& x, double a, double b);
Tensor clamp_min(const Tensor& x, double lo);
Tensor clamp(const Tensor& x, double lo, double hi);
Tensor softmax(const Tensor& x);
double log_sum_exp(const Tensor& x);
double sum(const Tensor& x);
Tensor slice(const Tensor& x, std::size_t offset, std::size_t len);

double sigmoid(double x);

// gradient helpers
Tensor outer(const Tensor& u, const Tensor& v);          // u[m] v[k] -> [m,k]
Tensor matmul_tn(const Tensor& a, const Tensor& b);      // a^T * b
Tensor matmul_nt(const Tensor& a, const Tensor& b);      // a * b^T
Tensor matvec_t(const Tensor& a, const Tensor& u);       // a^T * u, u vector

}  // namespace tops

}  // namespace sensegen

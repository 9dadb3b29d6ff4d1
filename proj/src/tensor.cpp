#include "sensegen/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sensegen/errors.hpp"

namespace sensegen {

namespace {

std::size_t extent_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) {
    if (e == 0) throw ShapeError("tensor extents must be positive");
    n *= e;
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), values_(extent_product(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (extent_product(shape_) != values_.size()) {
    throw ShapeError("value count " + std::to_string(values_.size()) +
                     " does not match shape " + shape_str());
  }
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }

Tensor Tensor::full(std::vector<std::size_t> shape, double v) {
  Tensor t(std::move(shape));
  std::fill(t.values_.begin(), t.values_.end(), v);
  return t;
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::vector(std::vector<double> v) {
  std::size_t n = v.size();
  return Tensor({n}, std::move(v));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> v) {
  return Tensor({rows, cols}, std::move(v));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t.values_[i * n + i] = 1.0;
  return t;
}

std::size_t Tensor::rows() const {
  if (rank() != 2) throw ShapeError("rows() on tensor of shape " + shape_str());
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw ShapeError("cols() on tensor of shape " + shape_str());
  return shape_[1];
}

double& Tensor::at(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
double Tensor::at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }

bool Tensor::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

std::string Tensor::shape_str() const {
  std::string s = "[";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape_[i]);
  }
  return s + "]";
}

namespace tops {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() +
                     " vs " + b.shape_str());
  }
}

template <typename F>
Tensor map(const Tensor& x, F f) {
  Tensor y = x;
  double* d = y.data();
  for (std::size_t i = 0; i < y.size(); ++i) d[i] = f(d[i]);
  return y;
}

template <typename F>
Tensor zip(const Tensor& a, const Tensor& b, const char* op, F f) {
  require_same_shape(a, b, op);
  Tensor y = a;
  double* d = y.data();
  const double* bd = b.data();
  for (std::size_t i = 0; i < y.size(); ++i) d[i] = f(d[i], bd[i]);
  return y;
}

}  // namespace

double sigmoid(double x) {
  // branch on sign so exp never overflows
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2) {
    throw ShapeError("matmul: left operand must be rank 2, got " + a.shape_str());
  }
  std::size_t m = a.shape()[0], k = a.shape()[1];
  if (b.rank() == 1) {
    if (b.shape()[0] != k) {
      throw ShapeError("matmul: inner extents disagree " + a.shape_str() + " vs " +
                       b.shape_str());
    }
    Tensor y({m});
    const double* ad = a.data();
    const double* xd = b.data();
    for (std::size_t i = 0; i < m; ++i) {
      double acc = 0.0;
      const double* row = ad + i * k;
      for (std::size_t j = 0; j < k; ++j) acc += row[j] * xd[j];
      y[i] = acc;
    }
    return y;
  }
  if (b.rank() == 2) {
    if (b.shape()[0] != k) {
      throw ShapeError("matmul: inner extents disagree " + a.shape_str() + " vs " +
                       b.shape_str());
    }
    std::size_t n = b.shape()[1];
    Tensor y({m, n});
    const double* ad = a.data();
    const double* bd = b.data();
    double* yd = y.data();
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t p = 0; p < k; ++p) {
        double av = ad[i * k + p];
        const double* brow = bd + p * n;
        double* yrow = yd + i * n;
        for (std::size_t j = 0; j < n; ++j) yrow[j] += av * brow[j];
      }
    }
    return y;
  }
  throw ShapeError("matmul: right operand must be rank 1 or 2, got " + b.shape_str());
}

Tensor add(const Tensor& a, const Tensor& b) {
  return zip(a, b, "add", [](double x, double y) { return x + y; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return zip(a, b, "sub", [](double x, double y) { return x - y; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return zip(a, b, "mul", [](double x, double y) { return x * y; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  return zip(a, b, "div", [](double x, double y) { return x / y; });
}

Tensor sigmoid(const Tensor& x) {
  return map(x, [](double v) { return sigmoid(v); });
}

Tensor tanh(const Tensor& x) {
  return map(x, [](double v) { return std::tanh(v); });
}

Tensor exp(const Tensor& x) {
  return map(x, [](double v) { return std::exp(v); });
}

Tensor log(const Tensor& x) {
  return map(x, [](double v) { return std::log(v); });
}

Tensor axpb(const Tensor& x, double a, double b) {
  return map(x, [a, b](double v) { return a * v + b; });
}

Tensor clamp_min(const Tensor& x, double lo) {
  return map(x, [lo](double v) { return v < lo ? lo : v; });
}

Tensor clamp(const Tensor& x, double lo, double hi) {
  return map(x, [lo, hi](double v) { return v < lo ? lo : (v > hi ? hi : v); });
}

Tensor softmax(const Tensor& x) {
  if (x.size() == 0) throw ContractError("softmax: empty input");
  const double* d = x.data();
  double mx = *std::max_element(d, d + x.size());
  Tensor y = x;
  double* yd = y.data();
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    yd[i] = std::exp(d[i] - mx);
    total += yd[i];
  }
  for (std::size_t i = 0; i < y.size(); ++i) yd[i] /= total;
  return y;
}

double log_sum_exp(const Tensor& x) {
  if (x.size() == 0) throw ContractError("log_sum_exp: empty input");
  const double* d = x.data();
  double mx = *std::max_element(d, d + x.size());
  if (!std::isfinite(mx)) return mx;  // all -inf stays -inf
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total += std::exp(d[i] - mx);
  return mx + std::log(total);
}

double sum(const Tensor& x) {
  const double* d = x.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += d[i];
  return acc;
}

Tensor slice(const Tensor& x, std::size_t offset, std::size_t len) {
  if (x.rank() != 1) throw ShapeError("slice: rank-1 tensor required, got " + x.shape_str());
  if (offset + len > x.size()) {
    throw ShapeError("slice: range [" + std::to_string(offset) + ", " +
                     std::to_string(offset + len) + ") exceeds " + x.shape_str());
  }
  Tensor y({len});
  for (std::size_t i = 0; i < len; ++i) y[i] = x[offset + i];
  return y;
}

Tensor outer(const Tensor& u, const Tensor& v) {
  if (u.rank() != 1 || v.rank() != 1) {
    throw ShapeError("outer: vectors required, got " + u.shape_str() + " and " +
                     v.shape_str());
  }
  std::size_t m = u.size(), k = v.size();
  Tensor y({m, k});
  double* yd = y.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) yd[i * k + j] = u[i] * v[j];
  }
  return y;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  // a[m,k]^T * b[m,n] -> [k,n]
  std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != m) {
    throw ShapeError("matmul_tn: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  }
  Tensor y({k, n});
  const double* ad = a.data();
  const double* bd = b.data();
  double* yd = y.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      double av = ad[i * k + p];
      for (std::size_t j = 0; j < n; ++j) yd[p * n + j] += av * bd[i * n + j];
    }
  }
  return y;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  // a[m,k] * b[n,k]^T -> [m,n]
  std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  if (b.cols() != k) {
    throw ShapeError("matmul_nt: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  }
  Tensor y({m, n});
  const double* ad = a.data();
  const double* bd = b.data();
  double* yd = y.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += ad[i * k + p] * bd[j * k + p];
      yd[i * n + j] = acc;
    }
  }
  return y;
}

Tensor matvec_t(const Tensor& a, const Tensor& u) {
  // a[m,k]^T * u[m] -> [k]
  std::size_t m = a.rows(), k = a.cols();
  if (u.rank() != 1 || u.size() != m) {
    throw ShapeError("matvec_t: shape mismatch " + a.shape_str() + " vs " + u.shape_str());
  }
  Tensor y({k});
  const double* ad = a.data();
  for (std::size_t i = 0; i < m; ++i) {
    double uv = u[i];
    for (std::size_t p = 0; p < k; ++p) y[p] += ad[i * k + p] * uv;
  }
  return y;
}

}  // namespace tops

}  // namespace sensegen

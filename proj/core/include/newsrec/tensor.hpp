#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace newsrec {

// Dense row-major tensor of 64-bit reals with an optional same-shape
// gradient accumulator. Rank 0 (scalar), 1 and 2 are the only ranks the
// engine uses.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int64_t> shape);
  Tensor(std::vector<int64_t> shape, std::vector<double> data);

  static Tensor scalar(double v);
  static Tensor vec(std::vector<double> v);
  static Tensor matrix(int64_t rows, int64_t cols);
  static Tensor matrix(int64_t rows, int64_t cols, std::vector<double> data);

  const std::vector<int64_t>& shape() const { return shape_; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  int64_t numel() const { return static_cast<int64_t>(data_.size()); }
  int64_t rows() const;
  int64_t cols() const;

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }
  double& at(int64_t r, int64_t c);
  double at(int64_t r, int64_t c) const;

  // Rank-2 helper: pointer to the start of row r.
  const double* row(int64_t r) const;
  double* row(int64_t r);
  Tensor row_copy(int64_t r) const;

  bool has_grad() const { return grad_.has_value(); }
  void ensure_grad();
  void zero_grad();
  void drop_grad() { grad_.reset(); }
  std::vector<double>& grad();
  const std::vector<double>& grad() const;

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  std::string shape_str() const;
  bool all_finite() const;

 private:
  std::vector<int64_t> shape_;
  std::vector<double> data_;
  std::optional<std::vector<double>> grad_;
};

// Pure forward kernels. The tape ops call into these so the recorded and
// the plain path compute identical values.
namespace ops {

// y = x^T W + b for x[n], W[n x m], b[m] (b may be null).
Tensor linear(const Tensor& x, const Tensor& w, const Tensor* b);

// Numerically stable softmax (max subtraction). Rejects empty or
// non-finite input.
Tensor softmax(const Tensor& v);

// Elementwise mean over the first axis of a t x d matrix, t >= 1.
Tensor mean_pool(const Tensor& rows);

double dot(const Tensor& a, const Tensor& b);

Tensor tanh(const Tensor& v);

}  // namespace ops

}  // namespace newsrec

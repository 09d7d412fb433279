#include "newsrec/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "newsrec/error.hpp"

namespace newsrec {

namespace {
int64_t shape_numel(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (int64_t d : shape) {
    if (d < 0) throw DimError("tensor shape has a negative dimension");
    n *= d;
  }
  return n;
}
}  // namespace

Tensor::Tensor(std::vector<int64_t> shape)
    : shape_(std::move(shape)),
      data_(static_cast<size_t>(shape_numel(shape_)), 0.0) {}

Tensor::Tensor(std::vector<int64_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_numel(shape_) != static_cast<int64_t>(data_.size())) {
    throw DimError("tensor data length " + std::to_string(data_.size()) +
                   " does not match shape " + shape_str());
  }
}

Tensor Tensor::scalar(double v) { return Tensor({}, {v}); }

Tensor Tensor::vec(std::vector<double> v) {
  const int64_t n = static_cast<int64_t>(v.size());
  return Tensor({n}, std::move(v));
}

Tensor Tensor::matrix(int64_t rows, int64_t cols) {
  return Tensor({rows, cols});
}

Tensor Tensor::matrix(int64_t rows, int64_t cols, std::vector<double> data) {
  return Tensor({rows, cols}, std::move(data));
}

int64_t Tensor::rows() const {
  if (ndim() != 2) throw DimError("rows() on tensor of shape " + shape_str());
  return shape_[0];
}

int64_t Tensor::cols() const {
  if (ndim() != 2) throw DimError("cols() on tensor of shape " + shape_str());
  return shape_[1];
}

double& Tensor::at(int64_t r, int64_t c) {
  return data_[static_cast<size_t>(r * cols() + c)];
}

double Tensor::at(int64_t r, int64_t c) const {
  return data_[static_cast<size_t>(r * cols() + c)];
}

const double* Tensor::row(int64_t r) const { return data() + r * cols(); }

double* Tensor::row(int64_t r) { return data() + r * cols(); }

Tensor Tensor::row_copy(int64_t r) const {
  const int64_t c = cols();
  return Tensor::vec(std::vector<double>(row(r), row(r) + c));
}

void Tensor::ensure_grad() {
  if (!grad_) grad_.emplace(data_.size(), 0.0);
}

void Tensor::zero_grad() {
  if (!grad_) throw InvariantError("zero_grad: gradient accumulator absent");
  std::fill(grad_->begin(), grad_->end(), 0.0);
}

std::vector<double>& Tensor::grad() {
  if (!grad_) throw InvariantError("grad: gradient accumulator absent");
  return *grad_;
}

const std::vector<double>& Tensor::grad() const {
  if (!grad_) throw InvariantError("grad: gradient accumulator absent");
  return *grad_;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << 'x';
    os << shape_[i];
  }
  os << ']';
  return os.str();
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

namespace ops {

Tensor linear(const Tensor& x, const Tensor& w, const Tensor* b) {
  if (x.ndim() != 1 || w.ndim() != 2) {
    throw DimError("linear: expected vector x and matrix W, got x" +
                   x.shape_str() + " W" + w.shape_str());
  }
  const int64_t n = x.numel();
  const int64_t m = w.cols();
  if (w.rows() != n) {
    throw DimError("linear: x has length " + std::to_string(n) + " but W is " +
                   w.shape_str());
  }
  if (b && (b->ndim() != 1 || b->numel() != m)) {
    throw DimError("linear: bias " + b->shape_str() + " does not match W " +
                   w.shape_str());
  }
  Tensor y({m});
  for (int64_t j = 0; j < m; ++j) y[j] = b ? (*b)[j] : 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* wr = w.row(i);
    for (int64_t j = 0; j < m; ++j) y[j] += xi * wr[j];
  }
  return y;
}

Tensor softmax(const Tensor& v) {
  if (v.numel() == 0) throw DomainError("softmax: empty input");
  if (!v.all_finite()) throw DomainError("softmax: non-finite input");
  const int64_t n = v.numel();
  double mx = v[0];
  for (int64_t i = 1; i < n; ++i) mx = std::max(mx, v[i]);
  Tensor y(v.shape());
  double sum = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    y[i] = std::exp(v[i] - mx);
    sum += y[i];
  }
  for (int64_t i = 0; i < n; ++i) y[i] /= sum;
  return y;
}

Tensor mean_pool(const Tensor& rows) {
  if (rows.ndim() != 2) {
    throw DimError("mean_pool: expected matrix, got " + rows.shape_str());
  }
  const int64_t t = rows.rows();
  if (t == 0) throw DomainError("mean_pool: zero rows");
  const int64_t d = rows.cols();
  Tensor y({d});
  for (int64_t i = 0; i < t; ++i) {
    const double* r = rows.row(i);
    for (int64_t j = 0; j < d; ++j) y[j] += r[j];
  }
  for (int64_t j = 0; j < d; ++j) y[j] /= static_cast<double>(t);
  return y;
}

double dot(const Tensor& a, const Tensor& b) {
  if (a.numel() != b.numel()) {
    throw DimError("dot: length mismatch " + a.shape_str() + " vs " +
                   b.shape_str());
  }
  double s = 0.0;
  for (int64_t i = 0; i < a.numel(); ++i) s += a[i] * b[i];
  return s;
}

Tensor tanh(const Tensor& v) {
  Tensor y(v.shape());
  for (int64_t i = 0; i < v.numel(); ++i) y[i] = std::tanh(v[i]);
  return y;
}

}  // namespace ops

}  // namespace newsrec

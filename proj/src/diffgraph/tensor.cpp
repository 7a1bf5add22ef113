// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#include "diffgraph/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "error.hpp"

namespace mnm {

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), data_(shape_numel(shape_), 0.0) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_numel(shape_)) {
    throw ShapeError("tensor: shape " + shape_string(shape_) + " needs " +
                     std::to_string(shape_numel(shape_)) + " values, got " + std::to_string(data_.size()));
  }
}

double Tensor::item() const {
  if (data_.size() != 1) throw ShapeError("item: tensor of shape " + shape_string(shape_) + " is not a scalar");
  return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_numel(shape) != data_.size()) {
    throw ShapeError("reshape: cannot view " + shape_string(shape_) + " as " + shape_string(shape));
  }
  return Tensor(std::move(shape), data_);
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Tensor& Tensor::operator+=(const Tensor& other) {
  require_same_shape("add", *this, other);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor& Tensor::operator-=(const Tensor& other) {
  require_same_shape("sub", *this, other);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Tensor& Tensor::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Tensor& Tensor::axpy(double a, const Tensor& x) {
  require_same_shape("axpy", *this, x);
  const double* xp = x.data();
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += a * xp[i];
  return *this;
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
Tensor operator*(double s, Tensor a) { return a *= s; }

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

double dot(const Tensor& a, const Tensor& b) {
  require_same_shape("dot", a, b);
  double s = 0.0;
  const double* ap = a.data();
  const double* bp = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) s += ap[i] * bp[i];
  return s;
}

double squared_norm(const Tensor& a) {
  double s = 0.0;
  for (double v : a.values()) s += v * v;
  return s;
}

double norm(const Tensor& a) { return std::sqrt(squared_norm(a)); }

Tensor make_image(std::size_t height, std::size_t width) { return Tensor({2, height, width}); }

void require_image(const char* op, const Tensor& x) {
  if (x.rank() != 3 || x.dim(0) != 2) {
    throw ShapeError(std::string(op) + ": expected complex image [2, H, W], got " + shape_string(x.shape()));
  }
}

std::size_t image_height(const Tensor& x) { return x.dim(1); }
std::size_t image_width(const Tensor& x) { return x.dim(2); }

Tensor magnitude(const Tensor& x) {
  require_image("magnitude", x);
  const std::size_t n = x.dim(1) * x.dim(2);
  Tensor out({x.dim(1), x.dim(2)});
  for (std::size_t i = 0; i < n; ++i) out[i] = std::hypot(x[i], x[n + i]);
  return out;
}

}  // namespace mnm

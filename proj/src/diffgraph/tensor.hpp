// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mnm {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major array of doubles. A tensor with an empty shape is a scalar.
///
/// Complex images are stored as shape [2, H, W]: plane 0 holds the real part,
/// plane 1 the imaginary part. Multi-coil k-space uses [C, 2, H, W].
class Tensor {
 public:
  Tensor() : data_(1, 0.0) {}
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor({}, {v}); }
  static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape_); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool is_scalar() const noexcept { return shape_.empty(); }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  const std::vector<double>& storage() const noexcept { return data_; }

  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  /// Value of a single-element tensor.
  double item() const;

  Tensor reshaped(Shape shape) const;
  void fill(double v);

  Tensor& operator+=(const Tensor& other);
  Tensor& operator-=(const Tensor& other);
  Tensor& operator*=(double s);
  /// this += a * x
  Tensor& axpy(double a, const Tensor& x);

  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

Tensor operator+(Tensor a, const Tensor& b);
Tensor operator-(Tensor a, const Tensor& b);
Tensor operator*(double s, Tensor a);

/// Throws ShapeError naming `op` when the shapes differ.
void require_same_shape(const char* op, const Tensor& a, const Tensor& b);

/// Plain real dot product over every element. For complex data stored as
/// real/imaginary planes this is Re<a, b>.
double dot(const Tensor& a, const Tensor& b);
double norm(const Tensor& a);
double squared_norm(const Tensor& a);

/// Complex image helpers for shape [2, H, W].
Tensor make_image(std::size_t height, std::size_t width);
void require_image(const char* op, const Tensor& x);
std::size_t image_height(const Tensor& x);
std::size_t image_width(const Tensor& x);
/// |x| per pixel, shape [H, W].
Tensor magnitude(const Tensor& x);

}  // namespace mnm

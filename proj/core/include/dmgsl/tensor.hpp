// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace dmgsl {

/// Rows x cols extents of a dense rank-2 tensor. Vectors are 1xk or kx1,
/// scalars are 1x1.
struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  [[nodiscard]] std::size_t size() const { return rows * cols; }
  [[nodiscard]] std::string str() const;
  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Dense row-major matrix of doubles. This is the value type that flows
/// through the autodiff tape and the optimizers.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0);
  Tensor(std::size_t rows, std::size_t cols, std::vector<double> values);

  /// Row-major literal, e.g. Tensor::from({{1, 2}, {3, 4}}).
  static Tensor from(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor row(std::initializer_list<double> values);
  static Tensor column(std::initializer_list<double> values);
  static Tensor identity(std::size_t n);
  static Tensor scalar(double v) { return Tensor(1, 1, v); }

  [[nodiscard]] std::size_t rows() const { return shape_.rows; }
  [[nodiscard]] std::size_t cols() const { return shape_.cols; }
  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] const Shape& shape() const { return shape_; }
  [[nodiscard]] bool empty() const { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * shape_.cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * shape_.cols + c]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  [[nodiscard]] std::span<double> values() { return values_; }
  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] std::span<double> row_span(std::size_t r) {
    return {values_.data() + r * shape_.cols, shape_.cols};
  }
  [[nodiscard]] std::span<const double> row_span(std::size_t r) const {
    return {values_.data() + r * shape_.cols, shape_.cols};
  }
  double* data() { return values_.data(); }
  [[nodiscard]] const double* data() const { return values_.data(); }

  /// Scalar value of a 1x1 tensor.
  [[nodiscard]] double item() const;
  void fill(double v);
  [[nodiscard]] Tensor transposed() const;
  [[nodiscard]] bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> values_;
};

/// Plain (non-recorded) dense kernels shared by the tape and the rest of the
/// library.
namespace kernels {

/// C = op(A) * op(B), where op transposes when the flag is set. When
/// `accumulate` is true the product is added into C instead of overwriting.
void gemm(const Tensor& a, bool trans_a, const Tensor& b, bool trans_b, Tensor& c,
          bool accumulate = false);

Tensor matmul(const Tensor& a, const Tensor& b);

/// Largest |a_ij - b_ij|; shapes must agree.
double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace kernels

}  // namespace dmgsl

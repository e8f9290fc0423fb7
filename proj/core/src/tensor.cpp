// SPDX-License-Identifier: Apache-2.0
#include "dmgsl/tensor.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dmgsl/errors.hpp"

namespace dmgsl {

std::string Shape::str() const {
  std::ostringstream os;
  os << rows << "x" << cols;
  return os.str();
}

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill)
    : shape_{rows, cols}, values_(rows * cols, fill) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> values)
    : shape_{rows, cols}, values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw DimensionError("Tensor: " + std::to_string(values_.size()) +
                         " values do not fill shape " + shape_.str());
  }
}

Tensor Tensor::from(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> values;
  values.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("Tensor::from: ragged rows");
    values.insert(values.end(), row.begin(), row.end());
  }
  return Tensor(r, c, std::move(values));
}

Tensor Tensor::row(std::initializer_list<double> values) {
  return Tensor(1, values.size(), std::vector<double>(values));
}

Tensor Tensor::column(std::initializer_list<double> values) {
  return Tensor(values.size(), 1, std::vector<double>(values));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t(n, n);
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

double Tensor::item() const {
  if (size() != 1) throw ContractError("Tensor::item on shape " + shape_.str());
  return values_[0];
}

void Tensor::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

Tensor Tensor::transposed() const {
  Tensor t(cols(), rows());
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t c = 0; c < cols(); ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

bool Tensor::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

namespace kernels {

namespace {
using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;
}  // namespace

void gemm(const Tensor& a, bool trans_a, const Tensor& b, bool trans_b, Tensor& c,
          bool accumulate) {
  const std::size_t m = trans_a ? a.cols() : a.rows();
  const std::size_t k = trans_a ? a.rows() : a.cols();
  const std::size_t kb = trans_b ? b.cols() : b.rows();
  const std::size_t n = trans_b ? b.rows() : b.cols();
  if (k != kb) {
    throw DimensionError("matmul: inner dimensions differ (" + a.shape().str() +
                         (trans_a ? "^T" : "") + " * " + b.shape().str() + (trans_b ? "^T" : "") +
                         ")");
  }
  if (c.rows() != m || c.cols() != n) {
    if (accumulate) throw DimensionError("gemm: accumulator has shape " + c.shape().str());
    c = Tensor(m, n);
  }
  if (m == 0 || n == 0) return;
  if (k == 0) {
    if (!accumulate) c.fill(0.0);
    return;
  }
  ConstMap ma(a.data(), static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(a.cols()));
  ConstMap mb(b.data(), static_cast<Eigen::Index>(b.rows()), static_cast<Eigen::Index>(b.cols()));
  MutMap mc(c.data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  if (!accumulate) mc.setZero();
  if (!trans_a && !trans_b) {
    mc.noalias() += ma * mb;
  } else if (trans_a && !trans_b) {
    mc.noalias() += ma.transpose() * mb;
  } else if (!trans_a && trans_b) {
    mc.noalias() += ma * mb.transpose();
  } else {
    mc.noalias() += ma.transpose() * mb.transpose();
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  Tensor c;
  gemm(a, false, b, false, c);
  return c;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("max_abs_diff: " + a.shape().str() + " vs " + b.shape().str());
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace kernels
}  // namespace dmgsl

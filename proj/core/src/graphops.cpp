// SPDX-License-Identifier: Apache-2.0
#include "dmgsl/graphops.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <vector>

#include "dmgsl/csv.hpp"
#include "dmgsl/errors.hpp"

namespace dmgsl::graphops {

namespace {

void require_square(const Shape& s, const char* op) {
  if (s.rows != s.cols) throw DimensionError(std::string(op) + ": expected a square matrix, got " + s.str());
}

}  // namespace

Var fgp_adjacency(Var theta) {
  require_square(theta.shape(), "fgp_adjacency");
  return ag::sigmoid(theta);
}

Tensor knn_mask(const Tensor& a, std::size_t k) {
  require_square(a.shape(), "knn_sparsify");
  const std::size_t n = a.rows();
  if (k < 1 || k + 1 > n) {
    throw ConfigError("knn_sparsify: k=" + std::to_string(k) + " outside 1.." + std::to_string(n - 1));
  }
  Tensor mask(n, n);
  std::vector<std::size_t> cols(n - 1);
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t w = 0;
    for (std::size_t c = 0; c < n; ++c) {
      if (c != r) cols[w++] = c;
    }
    std::partial_sort(cols.begin(), cols.begin() + static_cast<std::ptrdiff_t>(k), cols.end(),
                      [&](std::size_t x, std::size_t y) {
                        if (a(r, x) != a(r, y)) return a(r, x) > a(r, y);
                        return x < y;
                      });
    for (std::size_t j = 0; j < k; ++j) mask(r, cols[j]) = 1.0;
  }
  return mask;
}

Var knn_sparsify(Var a, std::size_t k) {
  Tensor mask = knn_mask(a.value(), k);
  return ag::mul(a, a.tape().constant(std::move(mask)));
}

Tensor knn_sparsify(const Tensor& a, std::size_t k) {
  Tensor out = knn_mask(a, k);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= a[i];
  return out;
}

Var symmetrize(Var a) {
  require_square(a.shape(), "symmetrize");
  return ag::scale(ag::add(a, ag::transpose(a)), 0.5);
}

Tensor symmetrize(const Tensor& a) {
  require_square(a.shape(), "symmetrize");
  Tensor out(a.rows(), a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) out(r, c) = 0.5 * (a(r, c) + a(c, r));
  }
  return out;
}

Var gcn_normalize(Var a) {
  require_square(a.shape(), "gcn_normalize");
  Tape& tape = a.tape();
  const std::size_t n = a.rows();
  Var with_loops = ag::add(a, tape.constant(Tensor::identity(n)));
  Var inv_sqrt_deg = ag::pow(ag::row_sum(with_loops), -0.5);  // n x 1
  // Scaling by the outer product d_i d_j keeps symmetric inputs bit-symmetric.
  return ag::mul(with_loops, ag::matmul_nt(inv_sqrt_deg, inv_sqrt_deg));
}

Tensor gcn_normalize(const Tensor& a) {
  Tape tape;
  return gcn_normalize(tape.constant(a)).value();
}

Var concat_view(Var x, Var a) {
  if (x.rows() != a.rows()) {
    throw DimensionError("concat_view: features " + x.shape().str() + " vs adjacency " + a.shape().str());
  }
  const std::array<Var, 2> parts{x, a};
  return ag::concat_cols(parts);
}

Tensor concat_view(const Tensor& x, const Tensor& a) {
  Tape tape;
  return concat_view(tape.constant(x), tape.constant(a)).value();
}

void write_adjacency(const std::filesystem::path& path, const Tensor& a) {
  require_square(a.shape(), "write_adjacency");
  csv::write_matrix(path, a, 6);
}

Tensor read_adjacency(const std::filesystem::path& path) {
  Tensor a = csv::read_matrix(path);
  require_square(a.shape(), "read_adjacency");
  return a;
}

}  // namespace dmgsl::graphops

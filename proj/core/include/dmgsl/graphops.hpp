// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>

#include "dmgsl/autograd.hpp"

/// Adjacency construction and post-processing.
namespace dmgsl::graphops {

/// Full graph parameterization: every entry of the n x n parameter matrix is
/// an independent edge logit, activated with the logistic sigmoid.
Var fgp_adjacency(Var theta);

/// 0/1 mask keeping, per row, the k largest off-diagonal entries. Ties go to
/// the lower column index. Throws ConfigError unless 1 <= k <= n-1.
Tensor knn_mask(const Tensor& a, std::size_t k);

/// Straight-through top-k: the mask is a constant on the tape, so kept
/// entries pass gradient and dropped entries receive none.
Var knn_sparsify(Var a, std::size_t k);
Tensor knn_sparsify(const Tensor& a, std::size_t k);

/// (A + A^T) / 2.
Var symmetrize(Var a);
Tensor symmetrize(const Tensor& a);

/// D^-1/2 (A + I) D^-1/2 with D = diag(row sums of A + I).
Var gcn_normalize(Var a);
Tensor gcn_normalize(const Tensor& a);

/// [X | A], n x (d + n).
Var concat_view(Var x, Var a);
Tensor concat_view(const Tensor& x, const Tensor& a);

/// Dense adjacency CSV: n rows of n comma-separated values, 6 decimals.
void write_adjacency(const std::filesystem::path& path, const Tensor& a);
Tensor read_adjacency(const std::filesystem::path& path);

}  // namespace dmgsl::graphops

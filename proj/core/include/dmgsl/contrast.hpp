// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "dmgsl/autograd.hpp"
#include "dmgsl/random.hpp"

/// Augmentation, shared GCN encoder, projector, contrastive loss and the
/// bootstrapped anchor update.
namespace dmgsl::contrast {

struct AugmentConfig {
  double anchor_mask = 0.4;   // r_a
  double learned_mask = 0.8;  // r_l
  double edge_drop = 0.25;    // r_e

  void validate() const;
};

/// 1 x cols keep-vector: each column survives with probability 1 - rate.
Tensor column_keep_mask(std::size_t cols, double rate, Rng& rng);
/// Zeroes whole feature columns (one draw per column, shared by all nodes).
Var feature_mask(Var features, double rate, Rng& rng);
Tensor feature_mask(const Tensor& features, double rate, Rng& rng);

/// 0/1 mask that drops every nonzero entry of `adjacency` with probability
/// `rate`. Zero entries consume no randomness.
Tensor edge_keep_mask(const Tensor& adjacency, double rate, Rng& rng);
Var edge_drop(Var adjacency, double rate, Rng& rng);
Tensor edge_drop(const Tensor& adjacency, double rate, Rng& rng);

/// Two-layer GCN: H = A_hat relu(A_hat X W1) W2.
struct EncoderParams {
  Parameter w1;  // in x hidden
  Parameter w2;  // hidden x out

  static EncoderParams init(std::size_t in, std::size_t hidden, std::size_t out, Rng& rng);
  [[nodiscard]] std::vector<Parameter*> parameters();
};

/// Two affine layers with a ReLU between.
struct ProjectorParams {
  Parameter w1, b1;  // in x hidden, 1 x hidden
  Parameter w2, b2;  // hidden x out, 1 x out

  static ProjectorParams init(std::size_t in, std::size_t hidden, std::size_t out, Rng& rng);
  [[nodiscard]] std::vector<Parameter*> parameters();
};

struct EncoderVars {
  Var w1, w2;
};
struct ProjectorVars {
  Var w1, b1, w2, b2;
};
EncoderVars bind(Tape& tape, EncoderParams& p);
ProjectorVars bind(Tape& tape, ProjectorParams& p);

Var gcn_encode(Var features, Var normalized_adjacency, const EncoderVars& params);
Var project(Var encoded, const ProjectorVars& params);

/// Symmetric InfoNCE over cosine similarities: row i of each view is the
/// positive for row i of the other, every other row of the opposite view is
/// a negative. Returns (1/2n) sum_i [l(a_i, l_i) + l(l_i, a_i)].
/// Throws NumericError naming the node when a row has zero norm.
Var ntxent_loss(Var anchor, Var learned, double temperature);

/// A_s <- tau A_s + (1 - tau) A_learned for every slice. Values only; no
/// gradient path exists through the result.
std::vector<Tensor> bootstrap_update(std::span<const Tensor> anchors, const Tensor& learned, double tau);

}  // namespace dmgsl::contrast

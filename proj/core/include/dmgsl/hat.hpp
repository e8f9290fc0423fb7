// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "dmgsl/autograd.hpp"
#include "dmgsl/random.hpp"

/// Hierarchical (edge-type level) attention over typed adjacency slices.
namespace dmgsl::hat {

/// Parameters of one edge-type level, shared by its anchor and learned views.
struct LevelParams {
  Parameter weight;  // h x (d + n)
  Parameter bias;    // 1 x h
  Parameter query;   // h x 1
};

struct HatParams {
  std::vector<LevelParams> levels;

  /// Uniform +-sqrt(1/fan_in) weights, zero biases.
  static HatParams init(std::size_t num_types, std::size_t hidden, std::size_t width, Rng& rng);
  [[nodiscard]] std::vector<Parameter*> parameters();
  [[nodiscard]] std::size_t width() const;
};

/// A level's parameters bound to a tape for one forward pass.
struct LevelVars {
  Var weight, bias, query;
};
std::vector<LevelVars> bind(Tape& tape, HatParams& params);

/// Per-row attention over S views of equal shape n x w:
/// alpha[i, s] = softmax_s( q_s^T tanh(W_s e_{s,i} + b_s) ). Returns n x S.
/// With `node_mean` the scores are averaged over nodes first, so every row
/// receives the same alpha.
Var edge_attention(std::span<const Var> views, std::span<const LevelVars> levels, bool node_mean = false);

/// Row-wise convex combination sum_s alpha[:, s] * views[s]. Throws
/// ContractError when a row of alpha does not sum to 1 within 1e-9.
Var merge_slices(std::span<const Var> views, Var alpha);

struct HatOutput {
  Var anchor;         // E_a, n x (d + n)
  Var learned;        // E_l, n x (d + n)
  Var alpha_anchor;   // n x S
  Var alpha_learned;  // n x S
};

struct HatOptions {
  bool enabled = true;     // false: fixed alpha = 1/S
  bool node_mean = false;  // HAN-style graph-level attention
};

/// One snapshot: anchor views [X | A_s], learned views [X | A_L] in every slot.
HatOutput hat_forward(Var features, std::span<const Var> anchor_slices, Var learned_adjacency,
                      std::span<const LevelVars> levels, const HatOptions& options = {});

}  // namespace dmgsl::hat

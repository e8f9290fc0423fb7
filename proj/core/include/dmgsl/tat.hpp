// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "dmgsl/autograd.hpp"
#include "dmgsl/random.hpp"

/// Temporal attention: a per-node LSTM over snapshots followed by causal
/// multi-head scaled dot-product attention.
namespace dmgsl::tat {

/// Gate weights act on [e^t | s^{t-1}], so they are F x 2D and the cell is
/// only well-formed when the state width F equals the input width D.
struct LstmParams {
  Parameter w_input, w_forget, w_output, w_cell;  // F x 2D
  Parameter b_input, b_forget, b_output, b_cell;  // 1 x F

  static LstmParams init(std::size_t input_dim, std::size_t state_dim, Rng& rng);
  [[nodiscard]] std::vector<Parameter*> parameters();
  [[nodiscard]] std::size_t state_dim() const { return w_input.value.rows(); }
};

struct HeadParams {
  Parameter query, key, value;  // F x F'

  static HeadParams init(std::size_t state_dim, std::size_t head_dim, std::size_t index, Rng& rng);
  [[nodiscard]] std::vector<Parameter*> parameters();
  [[nodiscard]] std::size_t head_dim() const { return query.value.cols(); }
};

struct TatParams {
  LstmParams lstm;
  std::vector<HeadParams> heads;

  static TatParams init(std::size_t input_dim, std::size_t head_dim, std::size_t num_heads, Rng& rng);
  [[nodiscard]] std::vector<Parameter*> parameters();
  [[nodiscard]] std::size_t output_dim() const;
};

struct LstmVars {
  Var w_input, w_forget, w_output, w_cell;
  Var b_input, b_forget, b_output, b_cell;
};
struct HeadVars {
  Var query, key, value;
};
LstmVars bind(Tape& tape, LstmParams& params);
std::vector<HeadVars> bind(Tape& tape, std::vector<HeadParams>& heads);

struct LstmState {
  Var state;   // s, n x F
  Var memory;  // c, n x F
};

/// One LSTM step for every row of `input` (rows are independent nodes).
LstmState lstm_cell(Var input, const LstmState& previous, const LstmVars& params);

/// Runs the cell over T inputs of shape n x D from the all-ones state and
/// returns the T state matrices S^1..S^T.
std::vector<Var> lstm_unroll(std::span<const Var> inputs, const LstmVars& params);

/// M[t, t'] = 0 for t' <= t and -inf for t' > t.
Tensor causal_mask(std::size_t steps);

/// Attention for one node's state sequence S_i (T x F). For each head,
/// Z = softmax(Q K^T / sqrt(F') + M) V; heads are concatenated, T x (kappa F').
Var temporal_attention(Var states, std::span<const HeadVars> heads, const Tensor& mask);

/// Attention rows Gamma (T x T) of one head, for inspection.
Var attention_weights(Var states, const HeadVars& head, const Tensor& mask);

/// Batched final-time readout: for every node, the last row of
/// temporal_attention over its states. Returns n x (kappa F').
Var final_time_attention(std::span<const Var> states, std::span<const HeadVars> heads);

/// LSTM unroll followed by final_time_attention.
Var tat_forward(std::span<const Var> inputs, const LstmVars& lstm, std::span<const HeadVars> heads);

}  // namespace dmgsl::tat

// SPDX-License-Identifier: Apache-2.0
#include "dmgsl/tat.hpp"

#include <array>
#include <cmath>

#include "dmgsl/errors.hpp"

namespace dmgsl::tat {

namespace {

Tensor uniform_tensor(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
  Tensor t(rows, cols);
  for (double& v : t.values()) v = uniform(rng, -bound, bound);
  return t;
}

}  // namespace

LstmParams LstmParams::init(std::size_t input_dim, std::size_t state_dim, Rng& rng) {
  const std::size_t fan_in = input_dim + state_dim;
  const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  auto w = [&](const char* name) { return Parameter(name, uniform_tensor(state_dim, fan_in, bound, rng)); };
  auto b = [&](const char* name) { return Parameter(name, Tensor(1, state_dim)); };
  LstmParams p;
  p.w_input = w("lstm.W_i");
  p.w_forget = w("lstm.W_f");
  p.w_output = w("lstm.W_o");
  p.w_cell = w("lstm.W_c");
  p.b_input = b("lstm.b_i");
  p.b_forget = b("lstm.b_f");
  p.b_output = b("lstm.b_o");
  p.b_cell = b("lstm.b_c");
  return p;
}

std::vector<Parameter*> LstmParams::parameters() {
  return {&w_input, &w_forget, &w_output, &w_cell, &b_input, &b_forget, &b_output, &b_cell};
}

HeadParams HeadParams::init(std::size_t state_dim, std::size_t head_dim, std::size_t index, Rng& rng) {
  const double bound = std::sqrt(1.0 / static_cast<double>(state_dim));
  const std::string prefix = "head" + std::to_string(index) + ".";
  HeadParams h;
  h.query = Parameter(prefix + "W_Q", uniform_tensor(state_dim, head_dim, bound, rng));
  h.key = Parameter(prefix + "W_K", uniform_tensor(state_dim, head_dim, bound, rng));
  h.value = Parameter(prefix + "W_V", uniform_tensor(state_dim, head_dim, bound, rng));
  return h;
}

std::vector<Parameter*> HeadParams::parameters() { return {&query, &key, &value}; }

TatParams TatParams::init(std::size_t input_dim, std::size_t head_dim, std::size_t num_heads, Rng& rng) {
  if (num_heads < 1) throw ConfigError("temporal attention needs at least one head");
  TatParams p;
  p.lstm = LstmParams::init(input_dim, input_dim, rng);
  for (std::size_t k = 0; k < num_heads; ++k) p.heads.push_back(HeadParams::init(input_dim, head_dim, k, rng));
  return p;
}

std::vector<Parameter*> TatParams::parameters() {
  auto out = lstm.parameters();
  for (auto& h : heads) {
    for (Parameter* p : h.parameters()) out.push_back(p);
  }
  return out;
}

std::size_t TatParams::output_dim() const {
  return heads.empty() ? 0 : heads.size() * heads.front().head_dim();
}

LstmVars bind(Tape& tape, LstmParams& p) {
  return {tape.parameter(p.w_input),  tape.parameter(p.w_forget), tape.parameter(p.w_output),
          tape.parameter(p.w_cell),   tape.parameter(p.b_input),  tape.parameter(p.b_forget),
          tape.parameter(p.b_output), tape.parameter(p.b_cell)};
}

std::vector<HeadVars> bind(Tape& tape, std::vector<HeadParams>& heads) {
  std::vector<HeadVars> out;
  for (auto& h : heads) out.push_back({tape.parameter(h.query), tape.parameter(h.key), tape.parameter(h.value)});
  return out;
}

LstmState lstm_cell(Var input, const LstmState& previous, const LstmVars& p) {
  const std::size_t state_dim = p.w_input.rows();
  if (previous.state.cols() != state_dim || previous.memory.cols() != state_dim) {
    throw DimensionError("lstm_cell: state width " + std::to_string(previous.state.cols()) +
                         " but gates produce " + std::to_string(state_dim));
  }
  if (input.cols() + state_dim != p.w_input.cols() || input.cols() != state_dim) {
    throw DimensionError("lstm_cell: gate weights " + p.w_input.shape().str() + " need input width = state width = " +
                         std::to_string(p.w_input.cols() / 2) + ", got input " + input.shape().str());
  }
  if (previous.state.rows() != input.rows()) {
    throw DimensionError("lstm_cell: " + std::to_string(input.rows()) + " input rows vs " +
                         std::to_string(previous.state.rows()) + " state rows");
  }
  const std::array<Var, 2> parts{input, previous.state};
  Var joined = ag::concat_cols(parts);
  auto gate = [&](Var w, Var b) { return ag::add_row(ag::matmul_nt(joined, w), b); };
  Var in_gate = ag::sigmoid(gate(p.w_input, p.b_input));
  Var forget_gate = ag::sigmoid(gate(p.w_forget, p.b_forget));
  Var out_gate = ag::sigmoid(gate(p.w_output, p.b_output));
  Var candidate = ag::tanh(gate(p.w_cell, p.b_cell));
  Var memory = ag::add(ag::mul(forget_gate, previous.memory), ag::mul(in_gate, candidate));
  Var state = ag::mul(out_gate, ag::tanh(memory));
  return {state, memory};
}

std::vector<Var> lstm_unroll(std::span<const Var> inputs, const LstmVars& params) {
  if (inputs.empty()) throw ContractError("lstm_unroll: no snapshots");
  Tape& tape = inputs.front().tape();
  const std::size_t n = inputs.front().rows();
  const std::size_t state_dim = params.w_input.rows();
  LstmState st{tape.constant(Tensor(n, state_dim, 1.0)), tape.constant(Tensor(n, state_dim, 1.0))};
  std::vector<Var> states;
  states.reserve(inputs.size());
  for (Var e : inputs) {
    st = lstm_cell(e, st, params);
    states.push_back(st.state);
  }
  return states;
}

Tensor causal_mask(std::size_t steps) {
  Tensor m(steps, steps);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t u = t + 1; u < steps; ++u) m(t, u) = kMasked;
  }
  return m;
}

Var attention_weights(Var states, const HeadVars& head, const Tensor& mask) {
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(head.query.cols()));
  Var q = ag::matmul(states, head.query);
  Var k = ag::matmul(states, head.key);
  return ag::row_softmax(ag::scale(ag::matmul_nt(q, k), inv_scale), mask);
}

Var temporal_attention(Var states, std::span<const HeadVars> heads, const Tensor& mask) {
  if (heads.empty()) throw ContractError("temporal_attention: no heads");
  if (mask.rows() != states.rows() || mask.cols() != states.rows()) {
    throw DimensionError("temporal_attention: mask " + mask.shape().str() + " for " +
                         std::to_string(states.rows()) + " steps");
  }
  std::vector<Var> outputs;
  for (const HeadVars& h : heads) {
    Var gamma = attention_weights(states, h, mask);
    outputs.push_back(ag::matmul(gamma, ag::matmul(states, h.value)));
  }
  return ag::concat_cols(outputs);
}

Var final_time_attention(std::span<const Var> states, std::span<const HeadVars> heads) {
  if (states.empty()) throw ContractError("final_time_attention: no snapshots");
  if (heads.empty()) throw ContractError("final_time_attention: no heads");
  const std::size_t steps = states.size();
  const std::size_t n = states.front().rows();
  Var stacked = ag::concat_rows(states);  // (T n) x F, time-major
  const Var last = states.back();
  std::vector<Var> outputs;
  for (const HeadVars& h : heads) {
    const double inv_scale = 1.0 / std::sqrt(static_cast<double>(h.query.cols()));
    Var q_last = ag::matmul(last, h.query);  // n x F'
    Var keys = ag::matmul(stacked, h.key);
    Var values = ag::matmul(stacked, h.value);
    std::vector<Var> scores;
    std::vector<Var> value_steps;
    for (std::size_t t = 0; t < steps; ++t) {
      Var k_t = ag::slice_rows(keys, t * n, n);
      scores.push_back(ag::row_sum(ag::mul(q_last, k_t)));
      value_steps.push_back(ag::slice_rows(values, t * n, n));
    }
    // The last query sees every step, so its causal mask row is all zeros.
    Var gamma = ag::row_softmax(ag::scale(ag::concat_cols(scores), inv_scale));  // n x T
    Var z;
    for (std::size_t t = 0; t < steps; ++t) {
      Var term = ag::scale_rows(value_steps[t], ag::slice_cols(gamma, t, 1));
      z = t == 0 ? term : ag::add(z, term);
    }
    outputs.push_back(z);
  }
  return ag::concat_cols(outputs);
}

Var tat_forward(std::span<const Var> inputs, const LstmVars& lstm, std::span<const HeadVars> heads) {
  const auto states = lstm_unroll(inputs, lstm);
  return final_time_attention(states, heads);
}

}  // namespace dmgsl::tat

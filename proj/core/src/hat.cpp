// SPDX-License-Identifier: Apache-2.0
#include "dmgsl/hat.hpp"

#include <cmath>

#include "dmgsl/errors.hpp"
#include "dmgsl/graphops.hpp"

namespace dmgsl::hat {

namespace {

Tensor uniform_tensor(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
  Tensor t(rows, cols);
  for (double& v : t.values()) v = uniform(rng, -bound, bound);
  return t;
}

}  // namespace

HatParams HatParams::init(std::size_t num_types, std::size_t hidden, std::size_t width, Rng& rng) {
  HatParams p;
  const double w_bound = std::sqrt(1.0 / static_cast<double>(width));
  const double q_bound = std::sqrt(1.0 / static_cast<double>(hidden));
  for (std::size_t s = 0; s < num_types; ++s) {
    const std::string prefix = "hat.level" + std::to_string(s + 1) + ".";
    p.levels.push_back({Parameter(prefix + "W", uniform_tensor(hidden, width, w_bound, rng)),
                        Parameter(prefix + "b", Tensor(1, hidden)),
                        Parameter(prefix + "q", uniform_tensor(hidden, 1, q_bound, rng))});
  }
  return p;
}

std::vector<Parameter*> HatParams::parameters() {
  std::vector<Parameter*> out;
  for (auto& level : levels) {
    out.push_back(&level.weight);
    out.push_back(&level.bias);
    out.push_back(&level.query);
  }
  return out;
}

std::size_t HatParams::width() const { return levels.empty() ? 0 : levels.front().weight.value.cols(); }

std::vector<LevelVars> bind(Tape& tape, HatParams& params) {
  std::vector<LevelVars> out;
  for (auto& level : params.levels) {
    out.push_back({tape.parameter(level.weight), tape.parameter(level.bias), tape.parameter(level.query)});
  }
  return out;
}

Var edge_attention(std::span<const Var> views, std::span<const LevelVars> levels, bool node_mean) {
  if (views.empty()) throw ContractError("edge_attention: no views");
  if (views.size() != levels.size()) {
    throw DimensionError("edge_attention: " + std::to_string(views.size()) + " views but " +
                         std::to_string(levels.size()) + " parameter levels");
  }
  std::vector<Var> scores;
  scores.reserve(views.size());
  for (std::size_t s = 0; s < views.size(); ++s) {
    if (views[s].shape() != views.front().shape()) {
      throw DimensionError("edge_attention: view shapes " + views.front().shape().str() + " and " +
                           views[s].shape().str());
    }
    const LevelVars& lv = levels[s];
    Var hidden = ag::tanh(ag::add_row(ag::matmul_nt(views[s], lv.weight), lv.bias));
    scores.push_back(ag::matmul(hidden, lv.query));  // n x 1
  }
  Var stacked = ag::concat_cols(scores);  // n x S
  if (!node_mean) return ag::row_softmax(stacked);
  Var alpha = ag::row_softmax(ag::col_mean(stacked));  // 1 x S
  std::vector<Var> rows(views.front().rows(), alpha);
  return ag::concat_rows(rows);
}

Var merge_slices(std::span<const Var> views, Var alpha) {
  if (views.empty()) throw ContractError("merge_slices: no views");
  if (alpha.cols() != views.size() || alpha.rows() != views.front().rows()) {
    throw DimensionError("merge_slices: alpha " + alpha.shape().str() + " for " + std::to_string(views.size()) +
                         " views of " + views.front().shape().str());
  }
  const Tensor& a = alpha.value();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double total = 0.0;
    for (double v : a.row_span(r)) total += v;
    if (std::abs(total - 1.0) > 1e-9) {
      throw ContractError("merge_slices: attention row " + std::to_string(r) + " sums to " + std::to_string(total));
    }
  }
  Var merged;
  for (std::size_t s = 0; s < views.size(); ++s) {
    if (views[s].shape() != views.front().shape()) {
      throw DimensionError("merge_slices: view shapes differ");
    }
    Var term = ag::scale_rows(views[s], ag::slice_cols(alpha, s, 1));
    merged = s == 0 ? term : ag::add(merged, term);
  }
  return merged;
}

namespace {

Var uniform_alpha(Tape& tape, std::size_t rows, std::size_t types) {
  return tape.constant(Tensor(rows, types, 1.0 / static_cast<double>(types)));
}

}  // namespace

HatOutput hat_forward(Var features, std::span<const Var> anchor_slices, Var learned_adjacency,
                      std::span<const LevelVars> levels, const HatOptions& options) {
  if (anchor_slices.empty()) throw ContractError("hat_forward: no anchor slices");
  Tape& tape = features.tape();
  const std::size_t n = features.rows();
  const std::size_t types = anchor_slices.size();
  std::vector<Var> anchor_views;
  anchor_views.reserve(types);
  for (Var a : anchor_slices) anchor_views.push_back(graphops::concat_view(features, a));
  const Var learned_view = graphops::concat_view(features, learned_adjacency);
  const std::vector<Var> learned_views(types, learned_view);

  HatOutput out;
  if (options.enabled) {
    out.alpha_anchor = edge_attention(anchor_views, levels, options.node_mean);
    out.alpha_learned = edge_attention(learned_views, levels, options.node_mean);
  } else {
    out.alpha_anchor = uniform_alpha(tape, n, types);
    out.alpha_learned = uniform_alpha(tape, n, types);
  }
  out.anchor = merge_slices(anchor_views, out.alpha_anchor);
  out.learned = merge_slices(learned_views, out.alpha_learned);
  return out;
}

}  // namespace dmgsl::hat

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "dmgsl/autograd.hpp"

namespace dmgsl {

enum class OptimizerKind { kSgd, kAdam };

std::string_view to_string(OptimizerKind kind);
OptimizerKind optimizer_kind_from_string(std::string_view name);

/// Everything an optimizer needs to resume bit-exactly. For SGD the moment
/// vectors stay empty.
struct OptimizerState {
  OptimizerKind kind = OptimizerKind::kAdam;
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;

  friend bool operator==(const OptimizerState&, const OptimizerState&) = default;
};

/// w <- w - lr * g for every parameter.
void sgd_step(std::span<Parameter* const> params, OptimizerState& state);

/// Bias-corrected Adam update. Moments are lazily allocated to match the
/// parameter shapes on the first call.
void adam_step(std::span<Parameter* const> params, OptimizerState& state);

/// Dispatches on `state.kind`.
void optimizer_step(std::span<Parameter* const> params, OptimizerState& state);

}  // namespace dmgsl

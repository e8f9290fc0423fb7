// SPDX-License-Identifier: Apache-2.0
#include "dmgsl/optim.hpp"

#include <cmath>
#include <string>

#include "dmgsl/errors.hpp"

namespace dmgsl {

std::string_view to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? "sgd" : "adam";
}

OptimizerKind optimizer_kind_from_string(std::string_view name) {
  if (name == "sgd" || name == "SGD") return OptimizerKind::kSgd;
  if (name == "adam" || name == "Adam") return OptimizerKind::kAdam;
  throw ConfigError("unknown optimizer '" + std::string(name) + "' (expected sgd or adam)");
}

namespace {

void check_grad_shape(const Parameter& p) {
  if (p.grad.shape() != p.value.shape()) {
    throw DimensionError("optimizer: gradient of '" + p.name + "' has shape " +
                         p.grad.shape().str() + ", parameter has " + p.value.shape().str());
  }
}

}  // namespace

void sgd_step(std::span<Parameter* const> params, OptimizerState& state) {
  for (Parameter* p : params) {
    check_grad_shape(*p);
    for (std::size_t i = 0; i < p->value.size(); ++i) p->value[i] -= state.lr * p->grad[i];
  }
  ++state.step;
}

void adam_step(std::span<Parameter* const> params, OptimizerState& state) {
  if (state.m.empty()) {
    for (Parameter* p : params) {
      state.m.emplace_back(p->value.rows(), p->value.cols());
      state.v.emplace_back(p->value.rows(), p->value.cols());
    }
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ContractError("adam_step: optimizer state tracks " + std::to_string(state.m.size()) +
                        " parameters, got " + std::to_string(params.size()));
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    check_grad_shape(p);
    Tensor& m = state.m[k];
    Tensor& v = state.v[k];
    if (m.shape() != p.value.shape() || v.shape() != p.value.shape()) {
      throw DimensionError("adam_step: moment shape mismatch for '" + p.name + "'");
    }
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      p.value[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

void optimizer_step(std::span<Parameter* const> params, OptimizerState& state) {
  if (state.kind == OptimizerKind::kSgd) {
    sgd_step(params, state);
  } else {
    adam_step(params, state);
  }
}

}  // namespace dmgsl

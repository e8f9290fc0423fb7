// SPDX-License-Identifier: Apache-2.0
#include "dmgsl/contrast.hpp"

#include <cmath>

#include "dmgsl/errors.hpp"

namespace dmgsl::contrast {

namespace {

void check_rate(double r, const char* what) {
  if (!(r >= 0.0 && r <= 1.0)) throw ConfigError(std::string(what) + " must lie in [0, 1]");
}

Tensor uniform_tensor(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
  Tensor t(rows, cols);
  for (double& v : t.values()) v = uniform(rng, -bound, bound);
  return t;
}

double fan_in_bound(std::size_t fan_in) { return std::sqrt(1.0 / static_cast<double>(fan_in)); }

}  // namespace

void AugmentConfig::validate() const {
  check_rate(anchor_mask, "anchor feature-mask rate");
  check_rate(learned_mask, "learned feature-mask rate");
  check_rate(edge_drop, "edge-drop rate");
}

Tensor column_keep_mask(std::size_t cols, double rate, Rng& rng) {
  check_rate(rate, "feature-mask rate");
  Tensor keep(1, cols);
  for (double& k : keep.values()) k = uniform01(rng) >= rate ? 1.0 : 0.0;
  return keep;
}

Var feature_mask(Var features, double rate, Rng& rng) {
  Tensor keep = column_keep_mask(features.cols(), rate, rng);
  return ag::scale_cols(features, features.tape().constant(std::move(keep)));
}

Tensor feature_mask(const Tensor& features, double rate, Rng& rng) {
  const Tensor keep = column_keep_mask(features.cols(), rate, rng);
  Tensor out = features;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) *= keep[c];
  }
  return out;
}

Tensor edge_keep_mask(const Tensor& adjacency, double rate, Rng& rng) {
  check_rate(rate, "edge-drop rate");
  Tensor keep(adjacency.rows(), adjacency.cols());
  for (std::size_t i = 0; i < adjacency.size(); ++i) {
    if (adjacency[i] != 0.0) keep[i] = uniform01(rng) >= rate ? 1.0 : 0.0;
  }
  return keep;
}

Var edge_drop(Var adjacency, double rate, Rng& rng) {
  Tensor keep = edge_keep_mask(adjacency.value(), rate, rng);
  return ag::mul(adjacency, adjacency.tape().constant(std::move(keep)));
}

Tensor edge_drop(const Tensor& adjacency, double rate, Rng& rng) {
  Tensor out = edge_keep_mask(adjacency, rate, rng);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= adjacency[i];
  return out;
}

EncoderParams EncoderParams::init(std::size_t in, std::size_t hidden, std::size_t out, Rng& rng) {
  return {Parameter("encoder.W1", uniform_tensor(in, hidden, fan_in_bound(in), rng)),
          Parameter("encoder.W2", uniform_tensor(hidden, out, fan_in_bound(hidden), rng))};
}

std::vector<Parameter*> EncoderParams::parameters() { return {&w1, &w2}; }

ProjectorParams ProjectorParams::init(std::size_t in, std::size_t hidden, std::size_t out, Rng& rng) {
  ProjectorParams p;
  p.w1 = Parameter("projector.W1", uniform_tensor(in, hidden, fan_in_bound(in), rng));
  p.b1 = Parameter("projector.b1", Tensor(1, hidden));
  p.w2 = Parameter("projector.W2", uniform_tensor(hidden, out, fan_in_bound(hidden), rng));
  p.b2 = Parameter("projector.b2", Tensor(1, out));
  return p;
}

std::vector<Parameter*> ProjectorParams::parameters() { return {&w1, &b1, &w2, &b2}; }

EncoderVars bind(Tape& tape, EncoderParams& p) { return {tape.parameter(p.w1), tape.parameter(p.w2)}; }

ProjectorVars bind(Tape& tape, ProjectorParams& p) {
  return {tape.parameter(p.w1), tape.parameter(p.b1), tape.parameter(p.w2), tape.parameter(p.b2)};
}

Var gcn_encode(Var features, Var normalized_adjacency, const EncoderVars& params) {
  if (normalized_adjacency.rows() != features.rows() || normalized_adjacency.cols() != features.rows()) {
    throw DimensionError("gcn_encode: adjacency " + normalized_adjacency.shape().str() + " for features " +
                         features.shape().str());
  }
  Var hidden = ag::relu(ag::matmul(normalized_adjacency, ag::matmul(features, params.w1)));
  return ag::matmul(normalized_adjacency, ag::matmul(hidden, params.w2));
}

Var project(Var encoded, const ProjectorVars& params) {
  Var hidden = ag::relu(ag::add_row(ag::matmul(encoded, params.w1), params.b1));
  return ag::add_row(ag::matmul(hidden, params.w2), params.b2);
}

namespace {

Var unit_rows(Var y, const char* view) {
  const Tensor& v = y.value();
  for (std::size_t r = 0; r < v.rows(); ++r) {
    double sq = 0.0;
    for (double x : v.row_span(r)) sq += x * x;
    if (!std::isfinite(sq)) {
      throw NumericError(std::string("ntxent_loss: ") + view + " embedding of node " + std::to_string(r) +
                         " is not finite");
    }
    if (!(sq > 0.0)) {
      throw NumericError(std::string("ntxent_loss: ") + view + " embedding of node " + std::to_string(r) +
                         " has zero norm");
    }
  }
  return ag::scale_rows(y, ag::pow(ag::row_sum(ag::mul(y, y)), -0.5));
}

}  // namespace

Var ntxent_loss(Var anchor, Var learned, double temperature) {
  if (anchor.shape() != learned.shape()) {
    throw DimensionError("ntxent_loss: views " + anchor.shape().str() + " and " + learned.shape().str());
  }
  if (!(temperature > 0)) throw ConfigError("ntxent_loss: temperature must be positive");
  Var a = unit_rows(anchor, "anchor");
  Var l = unit_rows(learned, "learned");
  Var sim = ag::scale(ag::matmul_nt(a, l), 1.0 / temperature);  // sim[i, k] = cos(a_i, l_k) / p
  Var a_to_l = ag::sum(ag::diag(ag::row_log_softmax(sim)));
  Var l_to_a = ag::sum(ag::diag(ag::row_log_softmax(ag::transpose(sim))));
  const double n = static_cast<double>(anchor.rows());
  return ag::scale(ag::add(a_to_l, l_to_a), -1.0 / (2.0 * n));
}

std::vector<Tensor> bootstrap_update(std::span<const Tensor> anchors, const Tensor& learned, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("bootstrap tau must lie in [0, 1]");
  std::vector<Tensor> out;
  out.reserve(anchors.size());
  for (const Tensor& a : anchors) {
    if (a.shape() != learned.shape()) {
      throw DimensionError("bootstrap_update: anchor " + a.shape().str() + " vs learned " + learned.shape().str());
    }
    Tensor next(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) next[i] = tau * a[i] + (1.0 - tau) * learned[i];
    out.push_back(std::move(next));
  }
  return out;
}

}  // namespace dmgsl::contrast

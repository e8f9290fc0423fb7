// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "dmgsl/optim.hpp"

namespace dmgsl {

/// Hyperparameters of one training run. Text form is flat `key = value`
/// lines with '#' comments; unknown keys are rejected.
struct TrainConfig {
  std::size_t epochs = 500;
  double lr = 1e-2;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double tau = 0.99;
  std::size_t bootstrap_every = 10;
  std::size_t k = 2;
  double anchor_mask = 0.4;   // r_a
  double learned_mask = 0.8;  // r_l
  double edge_drop = 0.25;    // r_e
  double temperature = 0.5;   // p

  std::size_t hat_hidden = 64;        // h
  std::size_t lstm_dim = 0;           // F; 0 means "equal to the HAT width D"
  std::size_t head_dim = 32;          // F'
  std::size_t heads = 4;              // kappa
  std::size_t encoder_hidden = 64;
  std::size_t embed_dim = 32;         // d1
  std::size_t projector_hidden = 32;
  std::size_t projection_dim = 16;    // d2
  double theta_noise = 0.1;           // half-width of the uniform logit jitter at init

  std::uint64_t seed = 0;
  bool use_hat = true;
  bool use_tat = true;
  bool hat_node_mean = false;
  bool center_features = true;  // subtract the per-column node mean before encoding

  /// Throws ConfigError on out-of-range values.
  void validate() const;
  /// Canonical text: every key, fixed order, round-trips through parse.
  [[nodiscard]] std::string to_text() const;
  /// FNV-1a hash of the canonical text.
  [[nodiscard]] std::uint64_t hash() const;

  /// Applies one key/value pair; throws ConfigError for unknown keys or
  /// unparsable values.
  void set(const std::string& key, const std::string& value);

  static TrainConfig parse(std::istream& in);
  static TrainConfig parse_text(const std::string& text);
  static TrainConfig load(const std::filesystem::path& path);

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

}  // namespace dmgsl

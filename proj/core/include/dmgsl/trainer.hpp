// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dmgsl/autograd.hpp"
#include "dmgsl/config.hpp"
#include "dmgsl/contrast.hpp"
#include "dmgsl/data.hpp"
#include "dmgsl/eval.hpp"
#include "dmgsl/hat.hpp"
#include "dmgsl/optim.hpp"
#include "dmgsl/tat.hpp"

namespace dmgsl::trainer {

/// Problem sizes a model is built for.
struct Dims {
  std::size_t nodes = 0;     // n
  std::size_t features = 0;  // d
  std::size_t types = 0;     // S

  [[nodiscard]] std::size_t view_width() const { return features + nodes; }  // D
};

/// All trainable state. HAT and TAT are absent when ablated.
struct ModelParams {
  Parameter theta;  // n x n edge logits
  std::optional<hat::HatParams> hat;
  std::optional<tat::TatParams> tat;
  contrast::EncoderParams encoder;
  contrast::ProjectorParams projector;

  /// Theta starts at logit(clamp(mean anchor, 0.01, 0.99)) plus uniform
  /// jitter; everything else follows the module initializers.
  static ModelParams init(const TrainConfig& config, const Dims& dims, const Tensor& mean_anchor);

  /// Fixed order: theta, hat, tat, encoder, projector.
  [[nodiscard]] std::vector<Parameter*> parameters();
  [[nodiscard]] std::size_t scalar_count();
};

/// Number of trainable scalars implied by the config and problem size.
std::size_t expected_parameter_count(const TrainConfig& config, const Dims& dims);

/// Everything needed to continue a run bit-exactly.
struct Checkpoint {
  std::string config_text;
  std::uint64_t config_hash = 0;
  std::uint64_t epoch = 0;
  std::vector<std::pair<std::string, Tensor>> params;
  std::vector<Tensor> anchors;
  OptimizerState optimizer;
  std::vector<double> loss_trace;

  /// Binary layout, little-endian host order:
  ///   "DMGSL1" | u32 version | u64 hash | str config | u64 epoch
  ///   | u32 count, (str name, tensor)* | u32 count, tensor*
  ///   | u8 kind, f64 lr, beta1, beta2, eps, u64 step, u32 count, tensor*, u32 count, tensor*
  ///   | u64 count, f64*
  /// where str = u32 length + bytes and tensor = u64 rows, u64 cols, f64 data.
  [[nodiscard]] std::string to_bytes() const;
  static Checkpoint from_bytes(const std::string& bytes);
  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// One training run over a fixed snapshot sequence.
class Trainer {
 public:
  Trainer(const data::SnapshotSequence& sequence, TrainConfig config);
  /// Restores parameters, anchors, optimizer state and the loss trace.
  Trainer(const data::SnapshotSequence& sequence, const Checkpoint& checkpoint);

  /// Builds the contrastive loss for `epoch` (1-based). With `augment`
  /// false no masking or edge dropping happens.
  Var forward(Tape& tape, std::uint64_t epoch, bool augment = true);

  /// One optimizer step plus the periodic bootstrap. Returns the loss.
  /// Throws NumericError naming the epoch when the loss is not finite.
  double run_epoch();
  void run(std::size_t epochs, const std::function<void(std::uint64_t, double)>& on_epoch = {});

  /// sigmoid(Theta), before sparsification.
  [[nodiscard]] Tensor learned_adjacency() const;
  /// symmetrize(knn_sparsify(sigmoid(Theta), k)).
  [[nodiscard]] Tensor refined_adjacency() const;
  /// Final-time learned-view embeddings without augmentation.
  [[nodiscard]] Tensor embeddings();

  [[nodiscard]] Checkpoint checkpoint() const;
  [[nodiscard]] std::uint64_t epoch() const { return epoch_; }
  [[nodiscard]] const std::vector<double>& loss_trace() const { return loss_trace_; }
  [[nodiscard]] const std::vector<Tensor>& anchors() const { return anchors_; }
  [[nodiscard]] const TrainConfig& config() const { return config_; }
  [[nodiscard]] const Dims& dims() const { return dims_; }
  [[nodiscard]] ModelParams& params() { return params_; }

 private:
  struct Views {
    Var anchor;   // n x width
    Var learned;  // n x width
  };
  /// HAT over every snapshot, then TAT (or last-snapshot passthrough).
  Views final_views(Tape& tape, Var learned_adjacency);
  [[nodiscard]] Tensor mean_anchor() const;

  data::SnapshotSequence sequence_;
  TrainConfig config_;
  Dims dims_;
  ModelParams params_;
  std::vector<Tensor> anchors_;
  OptimizerState optimizer_;
  std::uint64_t epoch_ = 0;
  std::vector<double> loss_trace_;
};

struct TrainResult {
  Checkpoint checkpoint;
  Tensor learned;     // pre-kNN
  Tensor refined;     // post-kNN, symmetric
  Tensor embeddings;  // n x width
  std::vector<double> loss_trace;
};

TrainResult train(const data::SnapshotSequence& sequence, const TrainConfig& config,
                  const std::function<void(std::uint64_t, double)>& on_epoch = {});

/// CSV "epoch,loss", epochs 1-based, losses with 17 significant digits.
void write_loss_trace(const std::filesystem::path& path, const std::vector<double>& trace);
std::vector<double> read_loss_trace(const std::filesystem::path& path);

/// Per-node mean of the snapshot features (n x d); the GCN probe input.
Tensor mean_features(const data::SnapshotSequence& sequence);

struct AblationRow {
  std::string name;
  TrainConfig config;
  eval::MetricsSummary metrics;
};

/// The four variants in fixed order: full, w/o HAT, w/o TAT, w/o both.
std::vector<std::pair<std::string, TrainConfig>> ablation_configs(const TrainConfig& base);

/// Trains every variant and evaluates it with the same options (hence the
/// same split seeds).
std::vector<AblationRow> ablate(const data::SnapshotSequence& sequence, const TrainConfig& base,
                                const eval::EvalOptions& options);
std::string ablation_json(const std::vector<AblationRow>& rows);
std::string ablation_text(const std::vector<AblationRow>& rows);

}  // namespace dmgsl::trainer

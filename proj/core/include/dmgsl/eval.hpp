// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dmgsl/tensor.hpp"

/// Node-classification evaluation, metrics and heatmap export.
namespace dmgsl::eval {

enum class Subset : std::uint8_t { kTrain = 0, kVal = 1, kTest = 2 };

struct SplitSpec {
  std::array<double, 3> ratios{0.6, 0.2, 0.2};
  std::uint64_t seed = 0;
  std::vector<Subset> assignment;  // per node

  [[nodiscard]] std::vector<std::size_t> indices(Subset subset) const;
};

/// Per class: shuffle members with the seed, allocate by largest remainder,
/// then make sure the class has at least one training node.
SplitSpec stratified_split(const std::vector<int>& labels, std::uint64_t seed,
                           std::array<double, 3> ratios = {0.6, 0.2, 0.2});

struct ProbeConfig {
  std::size_t epochs = 300;
  double lr = 1e-2;
  std::uint64_t seed = 0;
  bool standardize = true;     // z-score features with training-node statistics
  std::size_t gcn_hidden = 32;  // GCN probe only
};

struct ProbeResult {
  std::vector<std::size_t> test_nodes;
  std::vector<int> predictions;  // aligned with test_nodes
  double best_val_accuracy = 0.0;
  std::size_t best_epoch = 0;
};

/// Multinomial logistic regression trained with Adam on the training
/// nodes; the weights with the best validation accuracy (earliest on ties)
/// predict the test nodes. Argmax ties go to the lower class id.
ProbeResult linear_probe(const Tensor& embeddings, const std::vector<int>& labels, int num_classes,
                         const SplitSpec& split, const ProbeConfig& config = {});

/// Two-layer GCN classifier on `features` over gcn_normalize(symmetrize(adjacency)).
ProbeResult gcn_probe(const Tensor& features, const Tensor& adjacency, const std::vector<int>& labels,
                      int num_classes, const SplitSpec& split, const ProbeConfig& config = {});

struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::string averaging = "weighted";
};

/// Support-weighted precision/recall/F1 plus accuracy. Classes never
/// predicted get precision 0.
MetricsReport compute_metrics(const std::vector<int>& y_true, const std::vector<int>& y_pred, int num_classes);

struct MetricsSummary {
  MetricsReport mean;
  MetricsReport stddev;
  std::vector<std::uint64_t> seeds;
  std::vector<MetricsReport> runs;
};

/// Mean and sample standard deviation (zero for a single run).
MetricsSummary summarize(const std::vector<MetricsReport>& runs, std::vector<std::uint64_t> seeds);

enum class ProbeKind { kLinear, kGcn };

struct EvalOptions {
  std::size_t seeds = 5;
  std::uint64_t base_seed = 0;
  ProbeKind probe = ProbeKind::kLinear;
  ProbeConfig probe_config;
};

/// Repeats split + probe + metrics for seeds base_seed .. base_seed+seeds-1.
/// `features` and `adjacency` are only used by the GCN probe.
MetricsSummary evaluate(const Tensor& embeddings, const std::vector<int>& labels, int num_classes,
                        const EvalOptions& options, const Tensor& features = {}, const Tensor& adjacency = {});

std::string metrics_json(const MetricsSummary& summary);
std::string metrics_text(const MetricsSummary& summary, const std::string& title = "node classification");
void write_metrics(const std::filesystem::path& dir, const MetricsSummary& summary);

/// Grayscale P5 graymap: pixel = round(255 (1 - a_ij)), so heavier edges
/// are darker.
void write_pgm(const std::filesystem::path& path, const Tensor& adjacency);
/// Pixel matrix of a P5 file (values 0..255).
Tensor read_pgm(const std::filesystem::path& path);

/// Writes the graymap to `image_path` and the dense CSV next to it (same
/// stem, .csv). Throws DataError for entries outside [0, 1].
void export_heatmap(const Tensor& adjacency, const std::filesystem::path& image_path);

}  // namespace dmgsl::eval

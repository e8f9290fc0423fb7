// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "dmgsl/tensor.hpp"

/// Telemetry and knowledge-graph ingestion, snapshot slicing and the
/// synthetic dataset generator.
namespace dmgsl::data {

/// Time x field sample matrix. Missing cells are stored as quiet NaN.
struct TelemetryTable {
  std::vector<std::string> field_names;
  Tensor samples;  // R x n
  double sample_rate = 40.0;

  [[nodiscard]] std::size_t num_rows() const { return samples.rows(); }
  [[nodiscard]] std::size_t num_fields() const { return samples.cols(); }
  [[nodiscard]] bool is_missing(std::size_t row, std::size_t col) const;
};

struct TypedEdge {
  std::size_t src = 0;
  std::size_t dst = 0;
  int type = 1;  // 1..S
  double weight = 1.0;

  friend bool operator==(const TypedEdge&, const TypedEdge&) = default;
};

struct TypedEdgeList {
  std::size_t num_nodes = 0;
  int num_types = 3;
  std::vector<TypedEdge> edges;
};

struct NodeLabels {
  std::vector<int> class_of;  // per node, 0..C-1
  std::vector<std::string> class_names;

  [[nodiscard]] std::size_t num_nodes() const { return class_of.size(); }
  [[nodiscard]] int num_classes() const { return static_cast<int>(class_names.size()); }
};

/// One static heterogeneous graph: features plus S typed adjacency slices
/// with zero diagonal.
struct HeteroSnapshot {
  Tensor features;             // n x d
  std::vector<Tensor> slices;  // S of n x n
};

struct SnapshotSequence {
  std::vector<HeteroSnapshot> snapshots;
  NodeLabels labels;
  std::vector<std::string> field_names;
  std::map<std::string, std::string> metadata;

  [[nodiscard]] std::size_t num_nodes() const;
  [[nodiscard]] std::size_t feature_dim() const;
  [[nodiscard]] std::size_t num_types() const;
  [[nodiscard]] std::size_t num_snapshots() const { return snapshots.size(); }
  /// Throws SchemaError when snapshots disagree on n, d or S.
  void validate() const;
};

inline constexpr double kSpeedOfLight = 2.9979e8;
inline constexpr std::size_t kMinWindowRows = 8;

/// Telemetry CSV: header of field names, numeric rows, empty cell = missing.
TelemetryTable parse_telemetry(std::istream& in, double sample_rate, const std::string& source = "<stream>");
TelemetryTable load_telemetry(const std::filesystem::path& path, double sample_rate);
void write_telemetry(const std::filesystem::path& path, const TelemetryTable& table, int decimals = 6);

/// Forward-fill, then column mean for leading gaps, then per-column min-max
/// scaling into [0, 1]. Constant columns map to 0.5.
TelemetryTable impute_and_normalize(const TelemetryTable& table);

/// Clarke's-model coherence time 9 / (16 pi f_d) with Doppler shift
/// f_d = v f / c. The carrier is in Hz; the 3300-3800 figure quoted for the
/// measurement campaign only makes physical sense in MHz.
double coherence_time(double carrier_hz, double speed_mps);
double doppler_shift(double carrier_hz, double speed_mps);

/// Dense slices A_1..A_S built from a typed edge list.
std::vector<Tensor> build_slices(const TypedEdgeList& edges);

struct SliceReport {
  SnapshotSequence sequence;
  std::size_t dropped_rows = 0;
};

/// Cuts the table into floor(R / window_rows) windows. Node i's feature
/// vector in window t is its column of that window, so d = window_rows.
SliceReport slice_snapshots(const TelemetryTable& table, const TypedEdgeList& edges,
                            const NodeLabels& labels, std::size_t window_rows,
                            std::size_t min_window = kMinWindowRows);

/// Edge CSV "src,dst,type,weight" and label CSV "node,class"; node names are
/// resolved against `field_names`.
struct KnowledgeGraph {
  TypedEdgeList edges;
  NodeLabels labels;
};
TypedEdgeList parse_edges(std::istream& in, const std::vector<std::string>& field_names, int num_types = 3);
NodeLabels parse_labels(std::istream& in, const std::vector<std::string>& field_names);
KnowledgeGraph parse_kg(std::istream& edges_in, std::istream& labels_in,
                        const std::vector<std::string>& field_names, int num_types = 3);
KnowledgeGraph load_kg(const std::filesystem::path& edges_path,
                       const std::filesystem::path& labels_path,
                       const std::vector<std::string>& field_names, int num_types = 3);
void write_edges(const std::filesystem::path& path, const TypedEdgeList& edges,
                 const std::vector<std::string>& field_names);
void write_labels(const std::filesystem::path& path, const NodeLabels& labels,
                  const std::vector<std::string>& field_names);

struct SyntheticSpec {
  std::uint64_t seed = 1;
  std::size_t nodes = 82;
  int classes = 10;
  int edge_types = 3;
  std::size_t snapshots = 8;
  std::size_t dim = 32;
  std::size_t planted_edges = 133;
  double noise = 0.02;           // innovation std of the AR(1) process
  double coupling = 0.5;         // lagged drive along planted edges
  double same_class_edge = 0.8;  // share of planted edges inside a class
  double expert_corruption = 0.2;  // share of planted edges replaced in the expert list
  std::size_t burn_in = 100;
};

struct SyntheticDataset {
  TelemetryTable telemetry;  // (snapshots * dim) x nodes, already in [0, 1]
  TypedEdgeList expert_edges;
  TypedEdgeList true_edges;
  NodeLabels labels;
  SnapshotSequence sequence;  // built from the expert edges
  Tensor true_adjacency;      // n x n, 1 where a planted edge exists (either direction kept as planted)
};

SyntheticDataset generate_synthetic(const SyntheticSpec& spec);

/// On-disk dataset directory: telemetry.csv, edges.csv, labels.csv,
/// dataset.json, and truth_edges.csv when ground truth exists.
struct DatasetFiles {
  TelemetryTable telemetry;
  KnowledgeGraph kg;
  std::size_t window_rows = 0;
  int num_types = 3;
  bool has_truth = false;
  TypedEdgeList true_edges;
};
void write_dataset(const std::filesystem::path& dir, const TelemetryTable& telemetry,
                   const TypedEdgeList& edges, const NodeLabels& labels, std::size_t window_rows,
                   const TypedEdgeList* truth = nullptr,
                   const std::map<std::string, std::string>& metadata = {});
DatasetFiles read_dataset(const std::filesystem::path& dir);
SnapshotSequence load_sequence(const std::filesystem::path& dir);

/// Dense 0/1 (or weighted) adjacency of an edge list, ignoring types.
Tensor edge_adjacency(const TypedEdgeList& edges, bool weighted = false);

}  // namespace dmgsl::data

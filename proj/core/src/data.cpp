// SPDX-License-Identifier: Apache-2.0
#include "dmgsl/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "dmgsl/csv.hpp"
#include "dmgsl/errors.hpp"
#include "dmgsl/random.hpp"

namespace dmgsl::data {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

bool TelemetryTable::is_missing(std::size_t row, std::size_t col) const {
  return std::isnan(samples(row, col));
}

std::size_t SnapshotSequence::num_nodes() const {
  return snapshots.empty() ? 0 : snapshots.front().features.rows();
}

std::size_t SnapshotSequence::feature_dim() const {
  return snapshots.empty() ? 0 : snapshots.front().features.cols();
}

std::size_t SnapshotSequence::num_types() const {
  return snapshots.empty() ? 0 : snapshots.front().slices.size();
}

void SnapshotSequence::validate() const {
  if (snapshots.empty()) throw SchemaError("snapshot sequence is empty");
  const std::size_t n = num_nodes(), d = feature_dim(), s = num_types();
  if (s == 0) throw SchemaError("snapshots carry no adjacency slices");
  for (std::size_t t = 0; t < snapshots.size(); ++t) {
    const auto& snap = snapshots[t];
    if (snap.features.rows() != n || snap.features.cols() != d || snap.slices.size() != s) {
      throw SchemaError("snapshot " + std::to_string(t) + " disagrees on n, d or S");
    }
    for (const auto& a : snap.slices) {
      if (a.rows() != n || a.cols() != n) {
        throw SchemaError("snapshot " + std::to_string(t) + " has a slice of shape " + a.shape().str());
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (a(i, i) != 0.0) throw SchemaError("adjacency slice with non-zero diagonal");
      }
    }
  }
  if (labels.num_nodes() != n) {
    throw SchemaError("labels cover " + std::to_string(labels.num_nodes()) + " nodes, graph has " +
                      std::to_string(n));
  }
}

// ---------------------------------------------------------------------------
// Telemetry

TelemetryTable parse_telemetry(std::istream& in, double sample_rate, const std::string& source) {
  if (!(sample_rate > 0)) throw ConfigError("sample rate must be positive");
  std::string raw;
  std::size_t line_no = 0;
  TelemetryTable table;
  table.sample_rate = sample_rate;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (!raw.empty()) break;
  }
  if (raw.empty()) throw SchemaError(source + ": no header row");
  table.field_names = csv::split_line(raw);
  const std::size_t n = table.field_names.size();
  for (const auto& name : table.field_names) {
    if (name.empty()) throw SchemaError(source + ": empty field name in header");
  }
  if (n == 0) throw SchemaError(source + ": zero columns");

  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.empty()) continue;
    const auto cells = csv::split_line(raw);
    const std::string where = source + ":" + std::to_string(line_no);
    if (cells.size() != n) {
      throw ParseError(where + ": expected " + std::to_string(n) + " cells, found " +
                       std::to_string(cells.size()));
    }
    for (const auto& cell : cells) {
      values.push_back(cell.empty() ? kMissing : csv::parse_double(cell, where));
    }
    ++rows;
  }
  if (rows == 0) throw SchemaError(source + ": no sample rows");
  table.samples = Tensor(rows, n, std::move(values));
  return table;
}

TelemetryTable load_telemetry(const std::filesystem::path& path, double sample_rate) {
  auto in = open_input(path);
  return parse_telemetry(in, sample_rate, path.filename().string());
}

void write_telemetry(const std::filesystem::path& path, const TelemetryTable& table, int decimals) {
  auto out = open_output(path);
  for (std::size_t c = 0; c < table.field_names.size(); ++c) {
    out << (c ? "," : "") << table.field_names[c];
  }
  out << '\n' << std::fixed << std::setprecision(decimals);
  for (std::size_t r = 0; r < table.num_rows(); ++r) {
    for (std::size_t c = 0; c < table.num_fields(); ++c) {
      if (c) out << ',';
      if (!table.is_missing(r, c)) out << table.samples(r, c);
    }
    out << '\n';
  }
}

TelemetryTable impute_and_normalize(const TelemetryTable& table) {
  TelemetryTable out = table;
  Tensor& x = out.samples;
  const std::size_t rows = x.rows();
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double total = 0.0;
    std::size_t present = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      if (!std::isnan(x(r, c))) {
        total += x(r, c);
        ++present;
      }
    }
    if (present == 0) throw DataError("field '" + table.field_names[c] + "' has no values");
    const double col_mean = total / static_cast<double>(present);
    double last = col_mean;  // leading gap
    for (std::size_t r = 0; r < rows; ++r) {
      if (std::isnan(x(r, c))) {
        x(r, c) = last;
      } else {
        last = x(r, c);
      }
    }
    double lo = x(0, c), hi = x(0, c);
    for (std::size_t r = 1; r < rows; ++r) {
      lo = std::min(lo, x(r, c));
      hi = std::max(hi, x(r, c));
    }
    for (std::size_t r = 0; r < rows; ++r) {
      x(r, c) = hi > lo ? (x(r, c) - lo) / (hi - lo) : 0.5;
    }
  }
  return out;
}

double doppler_shift(double carrier_hz, double speed_mps) {
  if (!(carrier_hz > 0)) throw ConfigError("carrier frequency must be positive");
  if (speed_mps < 0 || !std::isfinite(speed_mps)) throw ConfigError("speed must be non-negative");
  return speed_mps * carrier_hz / kSpeedOfLight;
}

double coherence_time(double carrier_hz, double speed_mps) {
  const double fd = doppler_shift(carrier_hz, speed_mps);
  if (fd == 0.0) throw ConfigError("infinite coherence time; supply explicit window");
  return 9.0 / (16.0 * std::numbers::pi * fd);
}

// ---------------------------------------------------------------------------
// Snapshots

std::vector<Tensor> build_slices(const TypedEdgeList& edges) {
  if (edges.num_types < 1) throw SchemaError("edge list must declare at least one type");
  std::vector<Tensor> slices(static_cast<std::size_t>(edges.num_types),
                             Tensor(edges.num_nodes, edges.num_nodes));
  for (const auto& e : edges.edges) {
    if (e.src >= edges.num_nodes || e.dst >= edges.num_nodes) throw SchemaError("edge node id out of range");
    if (e.type < 1 || e.type > edges.num_types) {
      throw SchemaError("edge type " + std::to_string(e.type) + " outside 1.." +
                        std::to_string(edges.num_types));
    }
    if (e.src == e.dst) throw SchemaError("self-loop edge on node " + std::to_string(e.src));
    slices[static_cast<std::size_t>(e.type - 1)](e.src, e.dst) = e.weight;
  }
  return slices;
}

SliceReport slice_snapshots(const TelemetryTable& table, const TypedEdgeList& edges,
                            const NodeLabels& labels, std::size_t window_rows,
                            std::size_t min_window) {
  if (window_rows < min_window) {
    std::ostringstream os;
    os << "window of " << window_rows << " rows is below the minimum of " << min_window
       << "; at " << table.sample_rate
       << " samples/s the channel coherence time spans less than one window, so pick the window "
          "in rows explicitly";
    throw ConfigError(os.str());
  }
  const std::size_t rows = table.num_rows();
  const std::size_t n = table.num_fields();
  if (rows < window_rows) {
    throw ConfigError("window of " + std::to_string(window_rows) + " rows exceeds the " +
                      std::to_string(rows) + " available samples");
  }
  if (edges.num_nodes != n) {
    throw SchemaError("edge list covers " + std::to_string(edges.num_nodes) + " nodes, telemetry has " +
                      std::to_string(n) + " fields");
  }
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      if (table.is_missing(r, c)) throw DataError("telemetry has missing values; impute before slicing");
    }
  }
  const auto slices = build_slices(edges);
  SliceReport report;
  const std::size_t count = rows / window_rows;
  report.dropped_rows = rows - count * window_rows;
  auto& seq = report.sequence;
  seq.labels = labels;
  seq.field_names = table.field_names;
  seq.snapshots.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    HeteroSnapshot snap;
    snap.features = Tensor(n, window_rows);
    for (std::size_t k = 0; k < window_rows; ++k) {
      for (std::size_t i = 0; i < n; ++i) snap.features(i, k) = table.samples(t * window_rows + k, i);
    }
    snap.slices = slices;
    seq.snapshots.push_back(std::move(snap));
  }
  seq.metadata["window_rows"] = std::to_string(window_rows);
  seq.metadata["dropped_rows"] = std::to_string(report.dropped_rows);
  seq.validate();
  return report;
}

// ---------------------------------------------------------------------------
// Knowledge graph files

namespace {

std::unordered_map<std::string, std::size_t> index_names(const std::vector<std::string>& names) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!index.emplace(names[i], i).second) throw SchemaError("duplicate field name '" + names[i] + "'");
  }
  return index;
}

void expect_header(const std::vector<csv::Line>& lines, const std::vector<std::string>& header,
                   const std::string& what) {
  if (lines.empty()) throw SchemaError(what + ": empty file");
  if (lines.front().cells != header) {
    std::string want;
    for (const auto& h : header) want += (want.empty() ? "" : ",") + h;
    throw SchemaError(what + ": header must be '" + want + "'");
  }
}

std::size_t resolve(const std::unordered_map<std::string, std::size_t>& index, const std::string& name,
                    const std::string& where) {
  const auto it = index.find(name);
  if (it == index.end()) throw SchemaError(where + ": unknown node '" + name + "'");
  return it->second;
}

}  // namespace

TypedEdgeList parse_edges(std::istream& in, const std::vector<std::string>& field_names, int num_types) {
  if (num_types < 1) throw ConfigError("number of edge types must be at least 1");
  const auto index = index_names(field_names);
  TypedEdgeList list;
  list.num_nodes = field_names.size();
  list.num_types = num_types;

  const auto edge_lines = csv::read_lines(in);
  expect_header(edge_lines, {"src", "dst", "type", "weight"}, "edges");
  std::set<std::tuple<std::size_t, std::size_t, int>> seen;
  for (std::size_t k = 1; k < edge_lines.size(); ++k) {
    const auto& line = edge_lines[k];
    const std::string where = "edges:" + std::to_string(line.number);
    if (line.cells.size() != 4) throw ParseError(where + ": expected 4 cells");
    TypedEdge e;
    e.src = resolve(index, line.cells[0], where);
    e.dst = resolve(index, line.cells[1], where);
    const long long type = csv::parse_int(line.cells[2], where);
    if (type < 1 || type > num_types) {
      throw SchemaError(where + ": edge type " + line.cells[2] + " outside 1.." + std::to_string(num_types));
    }
    e.type = static_cast<int>(type);
    e.weight = csv::parse_double(line.cells[3], where);
    if (!(e.weight >= 0.0 && e.weight <= 1.0)) throw SchemaError(where + ": weight outside [0,1]");
    if (e.src == e.dst) throw SchemaError(where + ": self-loop on '" + line.cells[0] + "'");
    if (!seen.emplace(e.src, e.dst, e.type).second) {
      throw SchemaError(where + ": duplicate edge " + line.cells[0] + "->" + line.cells[1] +
                        " of type " + line.cells[2]);
    }
    list.edges.push_back(e);
  }
  return list;
}

NodeLabels parse_labels(std::istream& labels_in, const std::vector<std::string>& field_names) {
  const auto index = index_names(field_names);
  NodeLabels labels;
  const auto label_lines = csv::read_lines(labels_in);
  expect_header(label_lines, {"node", "class"}, "labels");
  std::vector<std::string> raw(field_names.size());
  std::vector<bool> labeled(field_names.size(), false);
  for (std::size_t k = 1; k < label_lines.size(); ++k) {
    const auto& line = label_lines[k];
    const std::string where = "labels:" + std::to_string(line.number);
    if (line.cells.size() != 2) throw ParseError(where + ": expected 2 cells");
    const std::size_t node = resolve(index, line.cells[0], where);
    if (labeled[node]) throw SchemaError(where + ": node '" + line.cells[0] + "' labeled twice");
    if (line.cells[1].empty()) throw SchemaError(where + ": empty class");
    labeled[node] = true;
    raw[node] = line.cells[1];
  }
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    if (!labeled[i]) throw SchemaError("labels: node '" + field_names[i] + "' has no class");
  }
  // Dense class ids: numeric order when every class is an integer, otherwise lexicographic.
  const bool numeric = std::all_of(raw.begin(), raw.end(), [](const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](char ch) { return ch >= '0' && ch <= '9'; });
  });
  const auto class_less = [numeric](const std::string& a, const std::string& b) {
    if (numeric && a.size() != b.size()) return a.size() < b.size();
    return a < b;
  };
  std::vector<std::string> names(raw.begin(), raw.end());
  std::sort(names.begin(), names.end(), class_less);
  names.erase(std::unique(names.begin(), names.end()), names.end());
  if (names.size() < 2) throw SchemaError("labels: need at least two classes");
  labels.class_names = names;
  for (const auto& r : raw) {
    labels.class_of.push_back(
        static_cast<int>(std::lower_bound(names.begin(), names.end(), r, class_less) - names.begin()));
  }
  return labels;
}

KnowledgeGraph parse_kg(std::istream& edges_in, std::istream& labels_in,
                        const std::vector<std::string>& field_names, int num_types) {
  KnowledgeGraph kg;
  kg.edges = parse_edges(edges_in, field_names, num_types);
  kg.labels = parse_labels(labels_in, field_names);
  return kg;
}

KnowledgeGraph load_kg(const std::filesystem::path& edges_path, const std::filesystem::path& labels_path,
                       const std::vector<std::string>& field_names, int num_types) {
  auto edges = open_input(edges_path);
  auto labels = open_input(labels_path);
  return parse_kg(edges, labels, field_names, num_types);
}

void write_edges(const std::filesystem::path& path, const TypedEdgeList& edges,
                 const std::vector<std::string>& field_names) {
  auto out = open_output(path);
  out << "src,dst,type,weight\n" << std::fixed << std::setprecision(6);
  for (const auto& e : edges.edges) {
    out << field_names.at(e.src) << ',' << field_names.at(e.dst) << ',' << e.type << ',' << e.weight << '\n';
  }
}

void write_labels(const std::filesystem::path& path, const NodeLabels& labels,
                  const std::vector<std::string>& field_names) {
  auto out = open_output(path);
  out << "node,class\n";
  for (std::size_t i = 0; i < labels.class_of.size(); ++i) {
    out << field_names.at(i) << ',' << labels.class_names.at(static_cast<std::size_t>(labels.class_of[i]))
        << '\n';
  }
}

Tensor edge_adjacency(const TypedEdgeList& edges, bool weighted) {
  Tensor a(edges.num_nodes, edges.num_nodes);
  for (const auto& e : edges.edges) a(e.src, e.dst) = weighted ? std::max(a(e.src, e.dst), e.weight) : 1.0;
  return a;
}

// ---------------------------------------------------------------------------
// Synthetic generator

SyntheticDataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.classes < 2) throw ConfigError("synthetic data needs at least two classes");
  if (spec.nodes < static_cast<std::size_t>(spec.classes)) {
    throw ConfigError("synthetic data needs nodes >= classes");
  }
  if (spec.snapshots < 1 || spec.dim < 1) throw ConfigError("snapshots and dim must be at least 1");
  if (spec.edge_types < 1) throw ConfigError("edge types must be at least 1");
  const std::size_t n = spec.nodes;
  const auto classes = static_cast<std::size_t>(spec.classes);
  const std::size_t max_pairs = n * (n - 1) / 2;
  if (spec.planted_edges > max_pairs / 2) throw ConfigError("too many planted edges for the node count");

  SyntheticDataset out;
  auto& labels = out.labels;
  for (std::size_t c = 0; c < classes; ++c) labels.class_names.push_back(std::to_string(c));
  for (std::size_t i = 0; i < n; ++i) labels.class_of.push_back(static_cast<int>(i % classes));

  std::vector<std::vector<std::size_t>> members(classes);
  for (std::size_t i = 0; i < n; ++i) members[i % classes].push_back(i);

  // Planted edges between class-correlated pairs: same class, or the next class.
  Rng edge_rng = substream(spec.seed, "synthetic/edges");
  std::set<std::pair<std::size_t, std::size_t>> used;  // unordered
  auto key = [](std::size_t a, std::size_t b) { return std::pair{std::min(a, b), std::max(a, b)}; };
  out.true_edges.num_nodes = n;
  out.true_edges.num_types = spec.edge_types;
  while (out.true_edges.edges.size() < spec.planted_edges) {
    const std::size_t src = edge_rng() % n;
    const std::size_t c = src % classes;
    const bool same = bernoulli(edge_rng, spec.same_class_edge);
    const auto& pool = members[same ? c : (c + 1) % classes];
    const std::size_t dst = pool[edge_rng() % pool.size()];
    if (dst == src || used.contains(key(src, dst))) continue;
    used.insert(key(src, dst));
    TypedEdge e;
    e.src = src;
    e.dst = dst;
    e.type = 1 + static_cast<int>(edge_rng() % static_cast<std::uint64_t>(spec.edge_types));
    e.weight = uniform(edge_rng, 0.5, 1.0);
    out.true_edges.edges.push_back(e);
  }

  // Expert list: the planted edges with a fixed share swapped for spurious pairs.
  out.expert_edges = out.true_edges;
  {
    Rng rng = substream(spec.seed, "synthetic/expert");
    std::vector<std::size_t> order(out.true_edges.edges.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    const auto swaps = static_cast<std::size_t>(
        std::llround(spec.expert_corruption * static_cast<double>(order.size())));
    for (std::size_t k = 0; k < swaps && k < order.size(); ++k) {
      while (true) {
        const std::size_t a = rng() % n, b = rng() % n;
        if (a == b || used.contains(key(a, b))) continue;
        used.insert(key(a, b));
        out.expert_edges.edges[order[k]].src = a;
        out.expert_edges.edges[order[k]].dst = b;
        break;
      }
    }
  }
  out.true_adjacency = edge_adjacency(out.true_edges);

  // Class regimes: each class has its own long-run level in every window.
  const std::size_t windows = spec.snapshots;
  Rng level_rng = substream(spec.seed, "synthetic/levels");
  std::vector<std::vector<double>> level(windows, std::vector<double>(classes));
  for (auto& row : level) {
    for (double& v : row) v = uniform(level_rng, 0.2, 0.8);
  }

  std::vector<std::vector<std::size_t>> parents(n);
  for (const auto& e : out.true_edges.edges) parents[e.dst].push_back(e.src);

  const std::size_t rows = windows * spec.dim;
  Rng noise_rng = substream(spec.seed, "synthetic/noise");
  std::vector<double> latent(n), previous(n);
  for (std::size_t i = 0; i < n; ++i) latent[i] = level[0][i % classes];
  for (std::size_t step = 0; step < spec.burn_in; ++step) {
    for (std::size_t i = 0; i < n; ++i) {
      latent[i] = 0.9 * latent[i] + 0.1 * level[0][i % classes] + normal(noise_rng, 0.0, spec.noise);
    }
  }
  Tensor raw(rows, n);
  std::size_t prev_window = 0;
  for (std::size_t tau = 0; tau < rows; ++tau) {
    const std::size_t w = tau / spec.dim;
    previous = latent;
    for (std::size_t i = 0; i < n; ++i) {
      latent[i] = 0.9 * latent[i] + 0.1 * level[w][i % classes] + normal(noise_rng, 0.0, spec.noise);
    }
    for (std::size_t j = 0; j < n; ++j) {
      double drive = 0.0;
      for (std::size_t i : parents[j]) drive += previous[i] - level[prev_window][i % classes];
      raw(tau, j) = latent[j] + spec.coupling * drive;
    }
    prev_window = w;
  }
  // One affine map for the whole table keeps cross-node level differences.
  double lo = raw[0], hi = raw[0];
  for (double v : raw.values()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (double& v : raw.values()) v = hi > lo ? (v - lo) / (hi - lo) : 0.5;

  auto& telemetry = out.telemetry;
  telemetry.sample_rate = 40.0;
  telemetry.samples = std::move(raw);
  for (std::size_t i = 0; i < n; ++i) {
    std::ostringstream name;
    name << "f" << std::setw(3) << std::setfill('0') << i;
    telemetry.field_names.push_back(name.str());
  }
  out.expert_edges.num_nodes = n;
  out.sequence = slice_snapshots(telemetry, out.expert_edges, labels, spec.dim, 1).sequence;
  out.sequence.metadata["source"] = "synthetic";
  out.sequence.metadata["seed"] = std::to_string(spec.seed);
  return out;
}

// ---------------------------------------------------------------------------
// Dataset directories

void write_dataset(const std::filesystem::path& dir, const TelemetryTable& telemetry,
                   const TypedEdgeList& edges, const NodeLabels& labels, std::size_t window_rows,
                   const TypedEdgeList* truth, const std::map<std::string, std::string>& metadata) {
  std::filesystem::create_directories(dir);
  write_telemetry(dir / "telemetry.csv", telemetry);
  write_edges(dir / "edges.csv", edges, telemetry.field_names);
  write_labels(dir / "labels.csv", labels, telemetry.field_names);
  if (truth != nullptr) write_edges(dir / "truth_edges.csv", *truth, telemetry.field_names);
  nlohmann::ordered_json meta;
  meta["format"] = "dmgsl-dataset";
  meta["version"] = 1;
  meta["window_rows"] = window_rows;
  meta["edge_types"] = edges.num_types;
  meta["sample_rate"] = telemetry.sample_rate;
  meta["has_truth"] = truth != nullptr;
  meta["metadata"] = metadata;
  auto out = open_output(dir / "dataset.json");
  out << meta.dump(2) << '\n';
}

DatasetFiles read_dataset(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DataError("dataset directory '" + dir.string() + "' not found");
  nlohmann::json meta;
  try {
    auto in = open_input(dir / "dataset.json");
    in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("dataset.json: " + std::string(e.what()));
  }
  DatasetFiles files;
  try {
    files.window_rows = meta.at("window_rows").get<std::size_t>();
    files.num_types = meta.at("edge_types").get<int>();
    const double rate = meta.value("sample_rate", 40.0);
    files.telemetry = load_telemetry(dir / "telemetry.csv", rate);
    files.has_truth = meta.value("has_truth", false);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("dataset.json: " + std::string(e.what()));
  }
  files.kg = load_kg(dir / "edges.csv", dir / "labels.csv", files.telemetry.field_names, files.num_types);
  if (files.has_truth) {
    auto in = open_input(dir / "truth_edges.csv");
    files.true_edges = parse_edges(in, files.telemetry.field_names, files.num_types);
  }
  return files;
}

SnapshotSequence load_sequence(const std::filesystem::path& dir) {
  const auto files = read_dataset(dir);
  auto seq = slice_snapshots(files.telemetry, files.kg.edges, files.kg.labels, files.window_rows).sequence;
  seq.metadata["source"] = dir.string();
  return seq;
}

}  // namespace dmgsl::data

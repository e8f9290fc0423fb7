// SPDX-License-Identifier: Apache-2.0
#include "dmgsl/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dmgsl/config.hpp"
#include "dmgsl/csv.hpp"
#include "dmgsl/data.hpp"
#include "dmgsl/errors.hpp"
#include "dmgsl/eval.hpp"
#include "dmgsl/graphops.hpp"
#include "dmgsl/trainer.hpp"
#include "dmgsl/version.hpp"

namespace fs = std::filesystem;

namespace dmgsl::cli {
namespace {

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

/// manifest.json: tool, version, command, inputs, config hash, outputs.
/// Output paths are stored relative to the run directory so identical runs
/// into different directories produce identical files.
void write_manifest(const fs::path& dir, const std::string& command,
                    const std::map<std::string, std::string>& inputs, std::optional<std::uint64_t> config_hash,
                    const std::vector<std::string>& outputs) {
  nlohmann::ordered_json j;
  j["tool"] = "dmgsl";
  j["version"] = kVersion;
  j["command"] = command;
  j["inputs"] = inputs;
  if (config_hash) j["config_hash"] = hex64(*config_hash);
  j["outputs"] = outputs;
  std::ofstream out(dir / "manifest.json");
  if (!out) throw DataError("cannot write manifest into '" + dir.string() + "'");
  out << j.dump(2) << '\n';
}

void require(const std::string& value, const std::string& command, const std::string& flag) {
  if (value.empty()) throw ConfigError(command + ": missing required flag " + flag);
}

TrainConfig load_config(const std::string& path) {
  return path.empty() ? TrainConfig{} : TrainConfig::load(path);
}

void write_labels_csv(const fs::path& path, const data::SnapshotSequence& seq) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "node,class_id,class\n";
  for (std::size_t i = 0; i < seq.num_nodes(); ++i) {
    const int c = seq.labels.class_of[i];
    out << seq.field_names[i] << ',' << c << ',' << seq.labels.class_names[static_cast<std::size_t>(c)] << '\n';
  }
}

std::vector<int> read_class_ids(const fs::path& path) {
  const auto lines = csv::read_file(path);
  if (lines.empty() || lines.front().cells.size() < 2 || lines.front().cells[1] != "class_id") {
    throw SchemaError(path.string() + ": expected header 'node,class_id,class'");
  }
  std::vector<int> ids;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].cells.size() < 2) throw ParseError(path.string() + ":" + std::to_string(lines[i].number) + ": short row");
    ids.push_back(static_cast<int>(csv::parse_int(lines[i].cells[1], path.string())));
  }
  return ids;
}

eval::ProbeKind probe_kind(const std::string& name) {
  if (name == "linear") return eval::ProbeKind::kLinear;
  if (name == "gcn") return eval::ProbeKind::kGcn;
  throw ConfigError("unknown probe '" + name + "' (expected linear or gcn)");
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  data::SyntheticSpec spec;
  std::string out;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  require(a.out, "synth", "--out");
  const auto ds = data::generate_synthetic(a.spec);
  const std::map<std::string, std::string> metadata{{"source", "synthetic"}, {"seed", std::to_string(a.spec.seed)}};
  data::write_dataset(a.out, ds.telemetry, ds.expert_edges, ds.labels, a.spec.dim, &ds.true_edges, metadata);
  write_manifest(a.out, "synth",
                 {{"seed", std::to_string(a.spec.seed)},
                  {"nodes", std::to_string(a.spec.nodes)},
                  {"classes", std::to_string(a.spec.classes)},
                  {"edge_types", std::to_string(a.spec.edge_types)},
                  {"snapshots", std::to_string(a.spec.snapshots)},
                  {"dim", std::to_string(a.spec.dim)}},
                 std::nullopt, {"telemetry.csv", "edges.csv", "labels.csv", "truth_edges.csv", "dataset.json"});
  out << "wrote synthetic dataset (" << a.spec.nodes << " nodes, " << a.spec.snapshots << " snapshots) to " << a.out
      << '\n';
  return kOk;
}

struct IngestArgs {
  std::string telemetry, edges, labels, out;
  std::size_t window = 0;
  double sample_rate = 40.0;
  int edge_types = 3;
  double freq_hz = 0.0;
  double speed_mps = 0.0;
};

int cmd_ingest(const IngestArgs& a, std::ostream& out) {
  require(a.telemetry, "ingest", "--telemetry");
  require(a.edges, "ingest", "--edges");
  require(a.labels, "ingest", "--labels");
  require(a.out, "ingest", "--out");
  std::size_t window = a.window;
  if (window == 0) {
    if (a.freq_hz <= 0.0) throw ConfigError("ingest: give --window or --freq-hz with --speed-mps");
    const double tc = data::coherence_time(a.freq_hz, a.speed_mps);
    window = static_cast<std::size_t>(std::ceil(tc * a.sample_rate));
    out << "coherence time " << tc << " s -> window of " << window << " rows\n";
  }
  const auto raw = data::load_telemetry(a.telemetry, a.sample_rate);
  const auto table = data::impute_and_normalize(raw);
  const auto kg = data::load_kg(a.edges, a.labels, table.field_names, a.edge_types);
  const auto report = data::slice_snapshots(table, kg.edges, kg.labels, window);
  const std::map<std::string, std::string> metadata{
      {"telemetry", a.telemetry}, {"edges", a.edges}, {"labels", a.labels}};
  data::write_dataset(a.out, table, kg.edges, kg.labels, window, nullptr, metadata);
  write_manifest(a.out, "ingest",
                 {{"telemetry", a.telemetry},
                  {"edges", a.edges},
                  {"labels", a.labels},
                  {"window", std::to_string(window)},
                  {"sample_rate", std::to_string(a.sample_rate)}},
                 std::nullopt, {"telemetry.csv", "edges.csv", "labels.csv", "dataset.json"});
  out << "ingested " << table.num_fields() << " fields into " << report.sequence.num_snapshots() << " snapshots";
  if (report.dropped_rows > 0) out << " (" << report.dropped_rows << " trailing rows dropped)";
  out << '\n';
  return kOk;
}

struct TrainArgs {
  std::string data, config, out;
  std::optional<std::size_t> epochs;
  std::optional<std::uint64_t> seed;
  std::size_t log_every = 50;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  require(a.data, "train", "--data");
  require(a.out, "train", "--out");
  TrainConfig config = load_config(a.config);
  if (a.epochs) config.epochs = *a.epochs;
  if (a.seed) config.seed = *a.seed;
  config.validate();
  const auto seq = data::load_sequence(a.data);
  const fs::path dir = a.out;
  fs::create_directories(dir);

  const auto result = trainer::train(seq, config, [&](std::uint64_t epoch, double loss) {
    if (a.log_every > 0 && (epoch % a.log_every == 0 || epoch == 1)) {
      out << "epoch " << epoch << " loss " << std::setprecision(6) << loss << '\n';
    }
  });
  result.checkpoint.save(dir / "checkpoint.bin");
  graphops::write_adjacency(dir / "learned_adjacency.csv", result.refined);
  graphops::write_adjacency(dir / "learned_adjacency_raw.csv", result.learned);
  csv::write_matrix(dir / "embeddings.csv", result.embeddings, 12);
  csv::write_matrix(dir / "node_features.csv", trainer::mean_features(seq), 12);
  trainer::write_loss_trace(dir / "loss.csv", result.loss_trace);
  write_labels_csv(dir / "labels.csv", seq);
  {
    std::ofstream cfg(dir / "config.txt");
    cfg << config.to_text();
  }
  write_manifest(dir, "train", {{"data", a.data}, {"config", a.config.empty() ? "<defaults>" : a.config}},
                 config.hash(),
                 {"checkpoint.bin", "learned_adjacency.csv", "learned_adjacency_raw.csv", "embeddings.csv",
                  "node_features.csv", "loss.csv", "labels.csv", "config.txt"});
  out << "trained " << config.epochs << " epochs, final loss " << std::setprecision(6) << result.loss_trace.back()
      << "; artifacts in " << a.out << '\n';
  return kOk;
}

struct EvalArgs {
  std::string run, out, probe = "linear";
  std::size_t seeds = 5;
  std::uint64_t base_seed = 0;
  std::size_t probe_epochs = 300;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  require(a.run, "eval", "--run");
  const fs::path run = a.run;
  const auto labels = read_class_ids(run / "labels.csv");
  const int classes = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  eval::EvalOptions options;
  options.seeds = a.seeds;
  options.base_seed = a.base_seed;
  options.probe = probe_kind(a.probe);
  options.probe_config.epochs = a.probe_epochs;
  eval::MetricsSummary summary;
  if (options.probe == eval::ProbeKind::kLinear) {
    summary = eval::evaluate(csv::read_matrix(run / "embeddings.csv"), labels, classes, options);
  } else {
    summary = eval::evaluate({}, labels, classes, options, csv::read_matrix(run / "node_features.csv"),
                             graphops::read_adjacency(run / "learned_adjacency.csv"));
  }
  const fs::path dir = a.out.empty() ? run : fs::path(a.out);
  eval::write_metrics(dir, summary);
  out << eval::metrics_text(summary, a.probe + " probe");
  return kOk;
}

struct AblateArgs {
  std::string data, config, out, probe = "linear";
  std::size_t seeds = 5;
  std::uint64_t base_seed = 0;
  std::optional<std::size_t> epochs;
};

int cmd_ablate(const AblateArgs& a, std::ostream& out) {
  require(a.data, "ablate", "--data");
  require(a.out, "ablate", "--out");
  TrainConfig config = load_config(a.config);
  if (a.epochs) config.epochs = *a.epochs;
  config.validate();
  const auto seq = data::load_sequence(a.data);
  eval::EvalOptions options;
  options.seeds = a.seeds;
  options.base_seed = a.base_seed;
  options.probe = probe_kind(a.probe);
  const auto rows = trainer::ablate(seq, config, options);
  const fs::path dir = a.out;
  fs::create_directories(dir);
  std::ofstream(dir / "ablation.json") << trainer::ablation_json(rows) << '\n';
  std::ofstream(dir / "ablation.txt") << trainer::ablation_text(rows);
  write_manifest(dir, "ablate", {{"data", a.data}, {"config", a.config.empty() ? "<defaults>" : a.config}},
                 config.hash(), {"ablation.json", "ablation.txt"});
  out << trainer::ablation_text(rows);
  return kOk;
}

struct HeatmapArgs {
  std::string adjacency, out;
};

int cmd_heatmap(const HeatmapArgs& a, std::ostream& out) {
  require(a.adjacency, "heatmap", "--adjacency");
  require(a.out, "heatmap", "--out");
  fs::path image = a.out;
  if (image.extension() != ".pgm") image += ".pgm";
  const Tensor adjacency = graphops::read_adjacency(a.adjacency);
  eval::export_heatmap(adjacency, image);
  out << "wrote " << image.string() << " and " << fs::path(image).replace_extension(".csv").string() << '\n';
  return kOk;
}

struct TcArgs {
  double freq_hz = 0.0;
  double speed_mps = 0.0;
};

int cmd_tc(const TcArgs& a, std::ostream& out) {
  if (!(a.freq_hz > 0.0)) throw ConfigError("tc: --freq-hz must be positive");
  const double fd = data::doppler_shift(a.freq_hz, a.speed_mps);
  const double tc = data::coherence_time(a.freq_hz, a.speed_mps);
  out << std::scientific << std::setprecision(6) << "doppler shift: " << fd << " Hz\n"
      << "coherence time: " << tc << " s\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dynamic multi-view graph structure learning for wireless telemetry", "dmgsl"};
  app.option_defaults()->always_capture_default();
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1, 1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic dataset with planted structure");
  s->add_option("--seed", synth.spec.seed, "Generator seed");
  s->add_option("--nodes", synth.spec.nodes, "Number of nodes (fields)");
  s->add_option("--classes", synth.spec.classes, "Number of node classes");
  s->add_option("--edge-types", synth.spec.edge_types, "Number of edge types");
  s->add_option("--snapshots", synth.spec.snapshots, "Number of snapshots");
  s->add_option("--dim", synth.spec.dim, "Samples per snapshot (feature dimension)");
  s->add_option("--edges", synth.spec.planted_edges, "Number of planted edges");
  s->add_option("--noise", synth.spec.noise, "Innovation std of the node series");
  s->add_option("--out", synth.out, "Output dataset directory");

  IngestArgs ingest;
  auto* i = app.add_subcommand("ingest", "Normalize telemetry and a knowledge graph into a dataset");
  i->add_option("--telemetry", ingest.telemetry, "Telemetry CSV");
  i->add_option("--edges", ingest.edges, "Edge CSV (src,dst,type,weight)");
  i->add_option("--labels", ingest.labels, "Label CSV (node,class)");
  i->add_option("--window", ingest.window, "Rows per snapshot (0: derive from --freq-hz/--speed-mps)");
  i->add_option("--sample-rate", ingest.sample_rate, "Telemetry sample rate in Hz");
  i->add_option("--edge-types", ingest.edge_types, "Number of edge types");
  i->add_option("--freq-hz", ingest.freq_hz, "Carrier frequency in Hz");
  i->add_option("--speed-mps", ingest.speed_mps, "Terminal speed in m/s");
  i->add_option("--out", ingest.out, "Output dataset directory");

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train the model and export learned structure");
  t->add_option("--data", train.data, "Dataset directory");
  t->add_option("--config", train.config, "Config file (key = value)");
  t->add_option("--out", train.out, "Run directory");
  t->add_option("--epochs", train.epochs, "Override the configured epoch count");
  t->add_option("--seed", train.seed, "Override the configured seed");
  t->add_option("--log-every", train.log_every, "Print the loss every N epochs (0: quiet)");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Node classification on a trained run");
  e->add_option("--run", ev.run, "Run directory written by train");
  e->add_option("--seeds", ev.seeds, "Number of split seeds");
  e->add_option("--base-seed", ev.base_seed, "First split seed");
  e->add_option("--probe", ev.probe, "Probe: linear or gcn");
  e->add_option("--probe-epochs", ev.probe_epochs, "Probe training epochs");
  e->add_option("--out", ev.out, "Metrics directory (default: the run directory)");

  AblateArgs ab;
  auto* a = app.add_subcommand("ablate", "Train and evaluate the four module ablations");
  a->add_option("--data", ab.data, "Dataset directory");
  a->add_option("--config", ab.config, "Base config file");
  a->add_option("--out", ab.out, "Output directory");
  a->add_option("--seeds", ab.seeds, "Number of split seeds");
  a->add_option("--base-seed", ab.base_seed, "First split seed");
  a->add_option("--probe", ab.probe, "Probe: linear or gcn");
  a->add_option("--epochs", ab.epochs, "Override the configured epoch count");

  HeatmapArgs hm;
  auto* h = app.add_subcommand("heatmap", "Render an adjacency CSV as a graymap");
  h->add_option("--adjacency", hm.adjacency, "Dense adjacency CSV with entries in [0, 1]");
  h->add_option("--out", hm.out, "Output image path (.pgm; CSV written alongside)");

  TcArgs tc;
  auto* c = app.add_subcommand("tc", "Print the channel coherence time");
  c->add_option("--freq-hz", tc.freq_hz, "Carrier frequency in Hz")->required();
  c->add_option("--speed-mps", tc.speed_mps, "Terminal speed in m/s")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (s->parsed()) return cmd_synth(synth, out);
    if (i->parsed()) return cmd_ingest(ingest, out);
    if (t->parsed()) return cmd_train(train, out);
    if (e->parsed()) return cmd_eval(ev, out);
    if (a->parsed()) return cmd_ablate(ab, out);
    if (h->parsed()) return cmd_heatmap(hm, out);
    if (c->parsed()) return cmd_tc(tc, out);
  } catch (const NumericError& ex) {
    err << "error: " << ex.what() << '\n';
    return kNumericError;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return kDataError;
  } catch (const fs::filesystem_error& ex) {
    err << "error: " << ex.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace dmgsl::cli

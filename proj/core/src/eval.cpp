// SPDX-License-Identifier: Apache-2.0
#include "dmgsl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "dmgsl/autograd.hpp"
#include "dmgsl/csv.hpp"
#include "dmgsl/errors.hpp"
#include "dmgsl/graphops.hpp"
#include "dmgsl/optim.hpp"
#include "dmgsl/random.hpp"

namespace dmgsl::eval {

std::vector<std::size_t> SplitSpec::indices(Subset subset) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] == subset) out.push_back(i);
  }
  return out;
}

SplitSpec stratified_split(const std::vector<int>& labels, std::uint64_t seed, std::array<double, 3> ratios) {
  const double total_ratio = ratios[0] + ratios[1] + ratios[2];
  if (!(total_ratio > 0) || ratios[0] < 0 || ratios[1] < 0 || ratios[2] < 0) {
    throw ConfigError("split ratios must be non-negative with a positive sum");
  }
  int num_classes = 0;
  for (int y : labels) {
    if (y < 0) throw DataError("negative class id in labels");
    num_classes = std::max(num_classes, y + 1);
  }
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < labels.size(); ++i) members[static_cast<std::size_t>(labels[i])].push_back(i);

  SplitSpec split;
  split.ratios = ratios;
  split.seed = seed;
  split.assignment.assign(labels.size(), Subset::kTrain);
  for (std::size_t c = 0; c < members.size(); ++c) {
    auto& group = members[c];
    if (group.empty()) throw DataError("class " + std::to_string(c) + " has no members");
    Rng rng = substream(seed, "split", c);
    std::shuffle(group.begin(), group.end(), rng);

    const double m = static_cast<double>(group.size());
    std::array<std::size_t, 3> count{};
    std::array<double, 3> frac{};
    std::size_t assigned = 0;
    for (std::size_t j = 0; j < 3; ++j) {
      const double quota = m * ratios[j] / total_ratio;
      count[j] = static_cast<std::size_t>(std::floor(quota));
      frac[j] = quota - static_cast<double>(count[j]);
      assigned += count[j];
    }
    std::array<std::size_t, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
    for (std::size_t r = 0; assigned < group.size(); ++r, ++assigned) ++count[order[r % 3]];
    if (count[0] == 0) {
      // Every class keeps at least one training node.
      const std::size_t donor = count[1] >= count[2] ? 1 : 2;
      --count[donor];
      ++count[0];
    }
    std::size_t pos = 0;
    for (std::size_t j = 0; j < 3; ++j) {
      for (std::size_t q = 0; q < count[j]; ++q) split.assignment[group[pos++]] = static_cast<Subset>(j);
    }
  }
  return split;
}

namespace {

Tensor standardize(const Tensor& x, const std::vector<std::size_t>& fit_rows) {
  Tensor out = x;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double mean = 0.0;
    for (std::size_t r : fit_rows) mean += x(r, c);
    mean /= static_cast<double>(fit_rows.size());
    double var = 0.0;
    for (std::size_t r : fit_rows) var += (x(r, c) - mean) * (x(r, c) - mean);
    var /= static_cast<double>(fit_rows.size());
    const double scale = var > 1e-24 ? 1.0 / std::sqrt(var) : 1.0;
    for (std::size_t r = 0; r < x.rows(); ++r) out(r, c) = (x(r, c) - mean) * scale;
  }
  return out;
}

int argmax_row(const Tensor& logits, std::size_t r) {
  const auto row = logits.row_span(r);
  int best = 0;
  for (std::size_t c = 1; c < row.size(); ++c) {
    if (row[c] > row[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
  }
  return best;
}

double accuracy_on(const Tensor& logits, const std::vector<std::size_t>& rows, const std::vector<int>& labels) {
  if (rows.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t r : rows) hits += argmax_row(logits, r) == labels[r] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(rows.size());
}

/// Mean cross-entropy of `logits` rows selected by one-hot `target_mask`.
Var cross_entropy(Var logits, const Tensor& one_hot_train) {
  Tape& tape = logits.tape();
  Var picked = ag::mul(ag::row_log_softmax(logits), tape.constant(one_hot_train));
  double count = 0.0;
  for (double v : one_hot_train.values()) count += v;
  return ag::scale(ag::sum(picked), -1.0 / count);
}

void check_inputs(std::size_t rows, const std::vector<int>& labels, int num_classes, const SplitSpec& split) {
  if (rows != labels.size() || split.assignment.size() != labels.size()) {
    throw DimensionError("probe: " + std::to_string(rows) + " embedding rows, " + std::to_string(labels.size()) +
                         " labels, " + std::to_string(split.assignment.size()) + " split entries");
  }
  const auto train = split.indices(Subset::kTrain);
  if (train.empty()) throw DataError("probe: empty training split");
  const int first = labels[train.front()];
  const bool single = std::all_of(train.begin(), train.end(), [&](std::size_t i) { return labels[i] == first; });
  if (single) throw DataError("probe: training split contains a single class");
  for (int y : labels) {
    if (y < 0 || y >= num_classes) throw DataError("probe: label out of range");
  }
}

/// Shared training loop: `forward` builds logits for all nodes on a tape.
template <typename Forward>
ProbeResult fit_probe(std::vector<Parameter*> params, Forward&& forward, const std::vector<int>& labels,
                      int num_classes, const SplitSpec& split, const ProbeConfig& config) {
  const auto train = split.indices(Subset::kTrain);
  const auto val = split.indices(Subset::kVal);
  Tensor one_hot(labels.size(), static_cast<std::size_t>(num_classes));
  for (std::size_t i : train) one_hot(i, static_cast<std::size_t>(labels[i])) = 1.0;

  OptimizerState opt;
  opt.kind = OptimizerKind::kAdam;
  opt.lr = config.lr;
  std::vector<Tensor> best;
  for (Parameter* p : params) best.push_back(p->value);
  double best_val = -1.0;
  std::size_t best_epoch = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    Tape tape;
    Var logits = forward(tape);
    Var loss = cross_entropy(logits, one_hot);
    if (!std::isfinite(loss.value().item())) throw NumericError("probe: loss diverged");
    tape.backward(loss);
    adam_step(params, opt);
    // Score the updated weights.
    Tape eval_tape;
    const Tensor scored = forward(eval_tape).value();
    const double val_acc = val.empty() ? accuracy_on(scored, train, labels) : accuracy_on(scored, val, labels);
    if (val_acc > best_val) {
      best_val = val_acc;
      best_epoch = epoch + 1;
      for (std::size_t k = 0; k < params.size(); ++k) best[k] = params[k]->value;
    }
  }
  for (std::size_t k = 0; k < params.size(); ++k) params[k]->value = best[k];
  Tape tape;
  const Tensor logits = forward(tape).value();
  ProbeResult result;
  result.test_nodes = split.indices(Subset::kTest);
  for (std::size_t i : result.test_nodes) result.predictions.push_back(argmax_row(logits, i));
  result.best_val_accuracy = best_val;
  result.best_epoch = best_epoch;
  return result;
}

Tensor uniform_tensor(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
  Tensor t(rows, cols);
  for (double& v : t.values()) v = uniform(rng, -bound, bound);
  return t;
}

}  // namespace

ProbeResult linear_probe(const Tensor& embeddings, const std::vector<int>& labels, int num_classes,
                         const SplitSpec& split, const ProbeConfig& config) {
  check_inputs(embeddings.rows(), labels, num_classes, split);
  const Tensor x = config.standardize ? standardize(embeddings, split.indices(Subset::kTrain)) : embeddings;
  Rng rng = substream(config.seed, "probe/linear");
  const std::size_t dim = x.cols();
  Parameter weight("probe.W", uniform_tensor(dim, static_cast<std::size_t>(num_classes),
                                             std::sqrt(1.0 / static_cast<double>(std::max<std::size_t>(dim, 1))), rng));
  Parameter bias("probe.b", Tensor(1, static_cast<std::size_t>(num_classes)));
  auto forward = [&](Tape& tape) {
    return ag::add_row(ag::matmul(tape.constant(x), tape.parameter(weight)), tape.parameter(bias));
  };
  return fit_probe({&weight, &bias}, forward, labels, num_classes, split, config);
}

ProbeResult gcn_probe(const Tensor& features, const Tensor& adjacency, const std::vector<int>& labels,
                      int num_classes, const SplitSpec& split, const ProbeConfig& config) {
  check_inputs(features.rows(), labels, num_classes, split);
  if (adjacency.rows() != features.rows() || adjacency.cols() != features.rows()) {
    throw DimensionError("gcn_probe: adjacency " + adjacency.shape().str() + " for " +
                         std::to_string(features.rows()) + " nodes");
  }
  const Tensor x = config.standardize ? standardize(features, split.indices(Subset::kTrain)) : features;
  const Tensor a_hat = graphops::gcn_normalize(graphops::symmetrize(adjacency));
  Rng rng = substream(config.seed, "probe/gcn");
  const std::size_t hidden = config.gcn_hidden;
  Parameter w1("probe.W1", uniform_tensor(x.cols(), hidden, std::sqrt(1.0 / static_cast<double>(x.cols())), rng));
  Parameter w2("probe.W2", uniform_tensor(hidden, static_cast<std::size_t>(num_classes),
                                          std::sqrt(1.0 / static_cast<double>(hidden)), rng));
  Parameter b2("probe.b2", Tensor(1, static_cast<std::size_t>(num_classes)));
  auto forward = [&](Tape& tape) {
    Var a = tape.constant(a_hat);
    Var h = ag::relu(ag::matmul(a, ag::matmul(tape.constant(x), tape.parameter(w1))));
    return ag::add_row(ag::matmul(a, ag::matmul(h, tape.parameter(w2))), tape.parameter(b2));
  };
  return fit_probe({&w1, &w2, &b2}, forward, labels, num_classes, split, config);
}

MetricsReport compute_metrics(const std::vector<int>& y_true, const std::vector<int>& y_pred, int num_classes) {
  if (y_true.size() != y_pred.size()) {
    throw DimensionError("compute_metrics: " + std::to_string(y_true.size()) + " labels vs " +
                         std::to_string(y_pred.size()) + " predictions");
  }
  if (y_true.empty()) throw DataError("compute_metrics: no samples");
  const auto classes = static_cast<std::size_t>(num_classes);
  std::vector<double> tp(classes), support(classes), predicted(classes);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] < 0 || y_true[i] >= num_classes || y_pred[i] < 0 || y_pred[i] >= num_classes) {
      throw DataError("compute_metrics: class id out of range");
    }
    support[static_cast<std::size_t>(y_true[i])] += 1;
    predicted[static_cast<std::size_t>(y_pred[i])] += 1;
    if (y_true[i] == y_pred[i]) tp[static_cast<std::size_t>(y_true[i])] += 1;
  }
  const double total = static_cast<double>(y_true.size());
  MetricsReport m;
  double hits = 0.0;
  for (std::size_t c = 0; c < classes; ++c) {
    hits += tp[c];
    if (support[c] == 0) continue;
    const double precision = predicted[c] > 0 ? tp[c] / predicted[c] : 0.0;
    const double recall = tp[c] / support[c];
    const double f1 = precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
    const double w = support[c] / total;
    m.precision += w * precision;
    m.recall += w * recall;
    m.f1 += w * f1;
  }
  m.accuracy = hits / total;
  return m;
}

MetricsSummary summarize(const std::vector<MetricsReport>& runs, std::vector<std::uint64_t> seeds) {
  MetricsSummary s;
  s.runs = runs;
  s.seeds = std::move(seeds);
  if (runs.empty()) return s;
  const double k = static_cast<double>(runs.size());
  auto stat = [&](double MetricsReport::*field, double& mean, double& sd) {
    mean = 0.0;
    for (const auto& r : runs) mean += r.*field;
    mean /= k;
    double ss = 0.0;
    for (const auto& r : runs) ss += (r.*field - mean) * (r.*field - mean);
    sd = runs.size() > 1 ? std::sqrt(ss / (k - 1.0)) : 0.0;
  };
  stat(&MetricsReport::accuracy, s.mean.accuracy, s.stddev.accuracy);
  stat(&MetricsReport::precision, s.mean.precision, s.stddev.precision);
  stat(&MetricsReport::recall, s.mean.recall, s.stddev.recall);
  stat(&MetricsReport::f1, s.mean.f1, s.stddev.f1);
  return s;
}

MetricsSummary evaluate(const Tensor& embeddings, const std::vector<int>& labels, int num_classes,
                        const EvalOptions& options, const Tensor& features, const Tensor& adjacency) {
  if (options.seeds < 1) throw ConfigError("evaluation needs at least one seed");
  std::vector<MetricsReport> runs;
  std::vector<std::uint64_t> seeds;
  for (std::size_t r = 0; r < options.seeds; ++r) {
    const std::uint64_t seed = options.base_seed + r;
    const SplitSpec split = stratified_split(labels, seed);
    ProbeConfig cfg = options.probe_config;
    cfg.seed = seed;
    const ProbeResult result = options.probe == ProbeKind::kLinear
                                   ? linear_probe(embeddings, labels, num_classes, split, cfg)
                                   : gcn_probe(features, adjacency, labels, num_classes, split, cfg);
    std::vector<int> truth;
    for (std::size_t i : result.test_nodes) truth.push_back(labels[i]);
    runs.push_back(compute_metrics(truth, result.predictions, num_classes));
    seeds.push_back(seed);
  }
  return summarize(runs, std::move(seeds));
}

std::string metrics_json(const MetricsSummary& summary) {
  nlohmann::ordered_json j;
  j["accuracy"] = summary.mean.accuracy;
  j["precision"] = summary.mean.precision;
  j["recall"] = summary.mean.recall;
  j["f1"] = summary.mean.f1;
  j["stddevs"] = {{"accuracy", summary.stddev.accuracy},
                  {"precision", summary.stddev.precision},
                  {"recall", summary.stddev.recall},
                  {"f1", summary.stddev.f1}};
  j["seeds"] = summary.seeds;
  j["averaging"] = summary.mean.averaging;
  return j.dump(2);
}

std::string metrics_text(const MetricsSummary& summary, const std::string& title) {
  std::ostringstream os;
  os << title << " (" << summary.seeds.size() << " seeds, " << summary.mean.averaging << " averaging)\n"
     << std::fixed << std::setprecision(4);
  os << "  accuracy  " << summary.mean.accuracy << " +/- " << summary.stddev.accuracy << '\n'
     << "  precision " << summary.mean.precision << " +/- " << summary.stddev.precision << '\n'
     << "  recall    " << summary.mean.recall << " +/- " << summary.stddev.recall << '\n'
     << "  f1        " << summary.mean.f1 << " +/- " << summary.stddev.f1 << '\n';
  return os.str();
}

void write_metrics(const std::filesystem::path& dir, const MetricsSummary& summary) {
  std::filesystem::create_directories(dir);
  std::ofstream json(dir / "metrics.json");
  std::ofstream text(dir / "metrics.txt");
  if (!json || !text) throw DataError("cannot write metrics into '" + dir.string() + "'");
  json << metrics_json(summary) << '\n';
  text << metrics_text(summary);
}

namespace {

void check_unit_range(const Tensor& a) {
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) {
      const double v = a(r, c);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw DataError("heatmap: entry (" + std::to_string(r) + "," + std::to_string(c) + ") = " +
                        std::to_string(v) + " outside [0,1]");
      }
    }
  }
}

}  // namespace

void write_pgm(const std::filesystem::path& path, const Tensor& adjacency) {
  check_unit_range(adjacency);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "P5\n" << adjacency.cols() << ' ' << adjacency.rows() << "\n255\n";
  for (double v : adjacency.values()) {
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * (1.0 - v)))));
  }
}

Tensor read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::string magic;
  std::size_t width = 0, height = 0, maxval = 0;
  in >> magic >> width >> height >> maxval;
  if (magic != "P5" || maxval != 255) throw ParseError(path.string() + ": not an 8-bit P5 graymap");
  in.get();
  Tensor pixels(height, width);
  for (double& v : pixels.values()) {
    const int ch = in.get();
    if (ch == EOF) throw ParseError(path.string() + ": truncated pixel data");
    v = static_cast<double>(static_cast<unsigned char>(ch));
  }
  return pixels;
}

void export_heatmap(const Tensor& adjacency, const std::filesystem::path& image_path) {
  check_unit_range(adjacency);
  if (image_path.has_parent_path()) std::filesystem::create_directories(image_path.parent_path());
  write_pgm(image_path, adjacency);
  auto csv_path = image_path;
  csv_path.replace_extension(".csv");
  csv::write_matrix(csv_path, adjacency, 6);
}

}  // namespace dmgsl::eval

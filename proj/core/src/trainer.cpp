// SPDX-License-Identifier: Apache-2.0
#include "dmgsl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <json.hpp>

#include "dmgsl/csv.hpp"
#include "dmgsl/errors.hpp"
#include "dmgsl/graphops.hpp"
#include "dmgsl/random.hpp"

namespace dmgsl::trainer {

ModelParams ModelParams::init(const TrainConfig& config, const Dims& dims, const Tensor& mean_anchor) {
  const std::size_t n = dims.nodes;
  const std::size_t width = dims.view_width();
  ModelParams p;

  Rng theta_rng = substream(config.seed, "init/theta");
  Tensor theta(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double a = std::clamp(mean_anchor(i, j), 0.01, 0.99);
      theta(i, j) = std::log(a / (1.0 - a)) + uniform(theta_rng, -config.theta_noise, config.theta_noise);
    }
  }
  p.theta = Parameter("theta", std::move(theta));

  if (config.use_hat) {
    Rng rng = substream(config.seed, "init/hat");
    p.hat = hat::HatParams::init(dims.types, config.hat_hidden, width, rng);
  }
  std::size_t encoder_in = width;
  if (config.use_tat) {
    Rng rng = substream(config.seed, "init/tat");
    p.tat = tat::TatParams::init(width, config.head_dim, config.heads, rng);
    encoder_in = p.tat->output_dim();
  }
  Rng encoder_rng = substream(config.seed, "init/encoder");
  p.encoder = contrast::EncoderParams::init(encoder_in, config.encoder_hidden, config.embed_dim, encoder_rng);
  Rng projector_rng = substream(config.seed, "init/projector");
  p.projector =
      contrast::ProjectorParams::init(config.embed_dim, config.projector_hidden, config.projection_dim, projector_rng);
  return p;
}

std::vector<Parameter*> ModelParams::parameters() {
  std::vector<Parameter*> out{&theta};
  auto append = [&out](std::vector<Parameter*> more) { out.insert(out.end(), more.begin(), more.end()); };
  if (hat) append(hat->parameters());
  if (tat) append(tat->parameters());
  append(encoder.parameters());
  append(projector.parameters());
  return out;
}

std::size_t ModelParams::scalar_count() {
  std::size_t total = 0;
  for (Parameter* p : parameters()) total += p->value.size();
  return total;
}

std::size_t expected_parameter_count(const TrainConfig& c, const Dims& dims) {
  const std::size_t n = dims.nodes;
  const std::size_t w = dims.view_width();
  std::size_t total = n * n;
  if (c.use_hat) total += dims.types * (c.hat_hidden * w + 2 * c.hat_hidden);
  std::size_t encoder_in = w;
  if (c.use_tat) {
    total += 4 * (w * 2 * w + w) + c.heads * 3 * w * c.head_dim;
    encoder_in = c.heads * c.head_dim;
  }
  total += encoder_in * c.encoder_hidden + c.encoder_hidden * c.embed_dim;
  total += c.embed_dim * c.projector_hidden + c.projector_hidden;
  total += c.projector_hidden * c.projection_dim + c.projection_dim;
  return total;
}

// ---------------------------------------------------------------------------
// Checkpoint serialization

namespace {

constexpr char kMagic[] = "DMGSL1";
constexpr std::size_t kMagicSize = sizeof(kMagic) - 1;

class Writer {
 public:
  template <typename T>
  void put(T v) {
    const auto* p = reinterpret_cast<const char*>(&v);
    buf_.append(p, sizeof(T));
  }
  void str(const std::string& s) {
    put(static_cast<std::uint32_t>(s.size()));
    buf_ += s;
  }
  void tensor(const Tensor& t) {
    put(static_cast<std::uint64_t>(t.rows()));
    put(static_cast<std::uint64_t>(t.cols()));
    buf_.append(reinterpret_cast<const char*>(t.data()), t.size() * sizeof(double));
  }
  void tensors(const std::vector<Tensor>& ts) {
    put(static_cast<std::uint32_t>(ts.size()));
    for (const Tensor& t : ts) tensor(t);
  }
  void raw(std::string_view s) { buf_ += s; }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    T v;
    std::memcpy(&v, take(sizeof(T)), sizeof(T));
    return v;
  }
  std::string str() {
    const auto len = get<std::uint32_t>();
    return std::string(take(len), len);
  }
  Tensor tensor() {
    const auto rows = get<std::uint64_t>();
    const auto cols = get<std::uint64_t>();
    if (cols != 0 && rows > (bytes_.size() / sizeof(double)) / cols) throw ParseError("checkpoint: tensor too large");
    Tensor t(rows, cols);
    std::memcpy(t.data(), take(t.size() * sizeof(double)), t.size() * sizeof(double));
    return t;
  }
  std::vector<Tensor> tensors() {
    const auto count = get<std::uint32_t>();
    std::vector<Tensor> out;
    for (std::uint32_t i = 0; i < count; ++i) out.push_back(tensor());
    return out;
  }
  const char* take(std::size_t n) {
    if (n > bytes_.size() - pos_) throw ParseError("checkpoint: truncated at byte " + std::to_string(pos_));
    const char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  [[nodiscard]] bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string Checkpoint::to_bytes() const {
  Writer w;
  w.raw(std::string_view(kMagic, kMagicSize));
  w.put(kCheckpointVersion);
  w.put(config_hash);
  w.str(config_text);
  w.put(epoch);
  w.put(static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, value] : params) {
    w.str(name);
    w.tensor(value);
  }
  w.tensors(anchors);
  w.put(static_cast<std::uint8_t>(optimizer.kind));
  w.put(optimizer.lr);
  w.put(optimizer.beta1);
  w.put(optimizer.beta2);
  w.put(optimizer.eps);
  w.put(optimizer.step);
  w.tensors(optimizer.m);
  w.tensors(optimizer.v);
  w.put(static_cast<std::uint64_t>(loss_trace.size()));
  for (double v : loss_trace) w.put(v);
  return w.take();
}

Checkpoint Checkpoint::from_bytes(const std::string& bytes) {
  Reader r(bytes);
  if (std::string_view(r.take(kMagicSize), kMagicSize) != std::string_view(kMagic, kMagicSize)) {
    throw ParseError("checkpoint: bad magic header");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw ParseError("checkpoint: unsupported version " + std::to_string(version));
  }
  Checkpoint c;
  c.config_hash = r.get<std::uint64_t>();
  c.config_text = r.str();
  c.epoch = r.get<std::uint64_t>();
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.str();
    c.params.emplace_back(std::move(name), r.tensor());
  }
  c.anchors = r.tensors();
  const auto kind = r.get<std::uint8_t>();
  if (kind > static_cast<std::uint8_t>(OptimizerKind::kAdam)) throw ParseError("checkpoint: unknown optimizer");
  c.optimizer.kind = static_cast<OptimizerKind>(kind);
  c.optimizer.lr = r.get<double>();
  c.optimizer.beta1 = r.get<double>();
  c.optimizer.beta2 = r.get<double>();
  c.optimizer.eps = r.get<double>();
  c.optimizer.step = r.get<std::uint64_t>();
  c.optimizer.m = r.tensors();
  c.optimizer.v = r.tensors();
  const auto steps = r.get<std::uint64_t>();
  if (steps > bytes.size() / sizeof(double)) throw ParseError("checkpoint: loss trace too long");
  c.loss_trace.resize(steps);
  for (double& v : c.loss_trace) v = r.get<double>();
  if (!r.done()) throw ParseError("checkpoint: trailing bytes");
  return c;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint '" + path.string() + "'");
  const std::string bytes = to_bytes();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_bytes(buf.str());
}

// ---------------------------------------------------------------------------
// Trainer

Trainer::Trainer(const data::SnapshotSequence& sequence, TrainConfig config)
    : sequence_(sequence), config_(std::move(config)) {
  config_.validate();
  sequence_.validate();
  if (sequence_.num_snapshots() == 0) throw DataError("training needs at least one snapshot");
  dims_ = {sequence_.num_nodes(), sequence_.feature_dim(), sequence_.num_types()};
  if (config_.lstm_dim != 0 && config_.lstm_dim != dims_.view_width()) {
    throw ConfigError("config: lstm_dim must be 0 or the view width " + std::to_string(dims_.view_width()));
  }
  if (config_.k >= dims_.nodes) {
    throw ConfigError("config: k = " + std::to_string(config_.k) + " needs at least k+1 nodes");
  }
  anchors_ = sequence_.snapshots.front().slices;
  params_ = ModelParams::init(config_, dims_, mean_anchor());
  optimizer_.kind = config_.optimizer;
  optimizer_.lr = config_.lr;
}

Trainer::Trainer(const data::SnapshotSequence& sequence, const Checkpoint& checkpoint)
    : Trainer(sequence, TrainConfig::parse_text(checkpoint.config_text)) {
  if (checkpoint.config_hash != config_.hash()) throw DataError("checkpoint: config hash mismatch");
  std::map<std::string, const Tensor*> saved;
  for (const auto& [name, value] : checkpoint.params) saved[name] = &value;
  const auto params = params_.parameters();
  if (saved.size() != params.size() || checkpoint.params.size() != params.size()) {
    throw DataError("checkpoint: holds " + std::to_string(checkpoint.params.size()) + " parameters, model has " +
                    std::to_string(params.size()));
  }
  for (Parameter* p : params) {
    const auto it = saved.find(p->name);
    if (it == saved.end()) throw DataError("checkpoint: missing parameter '" + p->name + "'");
    if (it->second->shape() != p->value.shape()) {
      throw DataError("checkpoint: parameter '" + p->name + "' has shape " + it->second->shape().str() +
                      ", expected " + p->value.shape().str());
    }
    p->value = *it->second;
    p->zero_grad();
  }
  if (checkpoint.anchors.size() != anchors_.size()) throw DataError("checkpoint: anchor slice count mismatch");
  for (std::size_t s = 0; s < anchors_.size(); ++s) {
    if (checkpoint.anchors[s].shape() != anchors_[s].shape()) throw DataError("checkpoint: anchor shape mismatch");
  }
  anchors_ = checkpoint.anchors;
  optimizer_ = checkpoint.optimizer;
  epoch_ = checkpoint.epoch;
  loss_trace_ = checkpoint.loss_trace;
}

Tensor Trainer::mean_anchor() const {
  Tensor mean(dims_.nodes, dims_.nodes);
  for (const Tensor& a : anchors_) {
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += a[i];
  }
  for (double& v : mean.values()) v /= static_cast<double>(anchors_.size());
  return mean;
}

Trainer::Views Trainer::final_views(Tape& tape, Var learned_adjacency) {
  std::vector<Var> anchor_slices;
  for (const Tensor& a : anchors_) anchor_slices.push_back(tape.constant(a));
  std::vector<hat::LevelVars> levels;
  if (params_.hat) levels = hat::bind(tape, *params_.hat);
  const hat::HatOptions options{config_.use_hat, config_.hat_node_mean};

  // Without TAT only the last snapshot reaches the output.
  const std::size_t first = params_.tat ? 0 : sequence_.num_snapshots() - 1;
  std::vector<Var> anchor_seq, learned_seq;
  for (std::size_t t = first; t < sequence_.num_snapshots(); ++t) {
    const Var x = tape.constant(sequence_.snapshots[t].features);
    const hat::HatOutput out = hat::hat_forward(x, anchor_slices, learned_adjacency, levels, options);
    anchor_seq.push_back(out.anchor);
    learned_seq.push_back(out.learned);
  }
  if (!params_.tat) return {anchor_seq.back(), learned_seq.back()};
  const tat::LstmVars lstm = tat::bind(tape, params_.tat->lstm);
  const std::vector<tat::HeadVars> heads = tat::bind(tape, params_.tat->heads);
  return {tat::tat_forward(anchor_seq, lstm, heads), tat::tat_forward(learned_seq, lstm, heads)};
}

Var Trainer::forward(Tape& tape, std::uint64_t epoch, bool augment) {
  const Var a_l = graphops::fgp_adjacency(tape.parameter(params_.theta));
  const Views views = final_views(tape, a_l);

  Var x_anchor = views.anchor;
  Var x_learned = views.learned;
  if (config_.center_features) {
    x_anchor = ag::sub(x_anchor, ag::matmul(tape.constant(Tensor(dims_.nodes, 1, 1.0)), ag::col_mean(x_anchor)));
    x_learned = ag::sub(x_learned, ag::matmul(tape.constant(Tensor(dims_.nodes, 1, 1.0)), ag::col_mean(x_learned)));
  }
  Tensor anchor_adj = mean_anchor();
  Var learned_adj = graphops::knn_sparsify(a_l, config_.k);
  if (augment) {
    Rng rng = substream(config_.seed, "augment", epoch);
    x_anchor = contrast::feature_mask(x_anchor, config_.anchor_mask, rng);
    x_learned = contrast::feature_mask(x_learned, config_.learned_mask, rng);
    anchor_adj = contrast::edge_drop(anchor_adj, config_.edge_drop, rng);
    learned_adj = contrast::edge_drop(learned_adj, config_.edge_drop, rng);
  }
  const Var norm_anchor = tape.constant(graphops::gcn_normalize(graphops::symmetrize(anchor_adj)));
  const Var norm_learned = graphops::gcn_normalize(graphops::symmetrize(learned_adj));

  const contrast::EncoderVars encoder = contrast::bind(tape, params_.encoder);
  const contrast::ProjectorVars projector = contrast::bind(tape, params_.projector);
  const Var y_anchor = contrast::project(contrast::gcn_encode(x_anchor, norm_anchor, encoder), projector);
  const Var y_learned = contrast::project(contrast::gcn_encode(x_learned, norm_learned, encoder), projector);
  return contrast::ntxent_loss(y_anchor, y_learned, config_.temperature);
}

double Trainer::run_epoch() {
  const std::uint64_t epoch = epoch_ + 1;
  const auto params = params_.parameters();
  for (Parameter* p : params) p->zero_grad();
  Tape tape;
  Var loss;
  try {
    loss = forward(tape, epoch);
  } catch (const NumericError& e) {
    throw NumericError("training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
  }
  const double value = loss.value().item();
  if (!std::isfinite(value)) {
    throw NumericError("training diverged at epoch " + std::to_string(epoch) + ": loss is not finite");
  }
  tape.backward(loss);
  for (Parameter* p : params) {
    if (!p->grad.all_finite()) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch) + ": non-finite gradient in " +
                         p->name);
    }
  }
  optimizer_step(params, optimizer_);
  epoch_ = epoch;
  loss_trace_.push_back(value);
  if (epoch % config_.bootstrap_every == 0) {
    anchors_ = contrast::bootstrap_update(anchors_, graphops::knn_sparsify(learned_adjacency(), config_.k),
                                          config_.tau);
  }
  return value;
}

void Trainer::run(std::size_t epochs, const std::function<void(std::uint64_t, double)>& on_epoch) {
  for (std::size_t e = 0; e < epochs; ++e) {
    const double loss = run_epoch();
    if (on_epoch) on_epoch(epoch_, loss);
  }
}

Tensor Trainer::learned_adjacency() const {
  Tensor a = params_.theta.value;
  for (double& v : a.values()) v = 1.0 / (1.0 + std::exp(-v));
  return a;
}

Tensor Trainer::refined_adjacency() const {
  return graphops::symmetrize(graphops::knn_sparsify(learned_adjacency(), config_.k));
}

Tensor Trainer::embeddings() {
  Tape tape;
  const Var a_l = tape.constant(learned_adjacency());
  return final_views(tape, a_l).learned.value();
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint c;
  c.config_text = config_.to_text();
  c.config_hash = config_.hash();
  c.epoch = epoch_;
  for (Parameter* p : const_cast<ModelParams&>(params_).parameters()) c.params.emplace_back(p->name, p->value);
  c.anchors = anchors_;
  c.optimizer = optimizer_;
  c.loss_trace = loss_trace_;
  return c;
}

TrainResult train(const data::SnapshotSequence& sequence, const TrainConfig& config,
                  const std::function<void(std::uint64_t, double)>& on_epoch) {
  Trainer trainer(sequence, config);
  trainer.run(config.epochs, on_epoch);
  TrainResult result;
  result.checkpoint = trainer.checkpoint();
  result.learned = trainer.learned_adjacency();
  result.refined = trainer.refined_adjacency();
  result.embeddings = trainer.embeddings();
  result.loss_trace = trainer.loss_trace();
  return result;
}

void write_loss_trace(const std::filesystem::path& path, const std::vector<double>& trace) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "epoch,loss\n" << std::setprecision(17);
  for (std::size_t i = 0; i < trace.size(); ++i) out << (i + 1) << ',' << trace[i] << '\n';
}

std::vector<double> read_loss_trace(const std::filesystem::path& path) {
  const auto lines = csv::read_file(path);
  if (lines.empty() || lines.front().cells != std::vector<std::string>{"epoch", "loss"}) {
    throw ParseError(path.string() + ": expected header 'epoch,loss'");
  }
  std::vector<double> trace;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].cells.size() != 2) throw ParseError(path.string() + ":" + std::to_string(lines[i].number) + ": expected 2 cells");
    trace.push_back(csv::parse_double(lines[i].cells[1], path.string()));
  }
  return trace;
}

Tensor mean_features(const data::SnapshotSequence& sequence) {
  Tensor mean(sequence.num_nodes(), sequence.feature_dim());
  for (const auto& snap : sequence.snapshots) {
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += snap.features[i];
  }
  for (double& v : mean.values()) v /= static_cast<double>(sequence.num_snapshots());
  return mean;
}

std::vector<std::pair<std::string, TrainConfig>> ablation_configs(const TrainConfig& base) {
  std::vector<std::pair<std::string, TrainConfig>> out;
  const std::pair<const char*, std::pair<bool, bool>> variants[] = {
      {"DMGSL", {true, true}},
      {"DMGSL (w/o HAT)", {false, true}},
      {"DMGSL (w/o TAT)", {true, false}},
      {"DMGSL (w/o HAT and TAT)", {false, false}},
  };
  for (const auto& [name, flags] : variants) {
    TrainConfig c = base;
    c.use_hat = flags.first;
    c.use_tat = flags.second;
    out.emplace_back(name, c);
  }
  return out;
}

std::vector<AblationRow> ablate(const data::SnapshotSequence& sequence, const TrainConfig& base,
                                const eval::EvalOptions& options) {
  std::vector<AblationRow> rows;
  const Tensor features = mean_features(sequence);
  for (auto& [name, config] : ablation_configs(base)) {
    const TrainResult result = train(sequence, config);
    AblationRow row;
    row.name = name;
    row.config = config;
    row.metrics = eval::evaluate(result.embeddings, sequence.labels.class_of, sequence.labels.num_classes(), options,
                                 features, result.refined);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string ablation_json(const std::vector<AblationRow>& rows) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    auto entry = nlohmann::ordered_json::parse(eval::metrics_json(row.metrics));
    entry["name"] = row.name;
    entry["use_hat"] = row.config.use_hat;
    entry["use_tat"] = row.config.use_tat;
    j.push_back(std::move(entry));
  }
  return j.dump(2);
}

std::string ablation_text(const std::vector<AblationRow>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(26) << "configuration" << std::setw(20) << "accuracy" << std::setw(20) << "precision"
     << std::setw(20) << "recall" << "f1\n";
  os << std::fixed << std::setprecision(4);
  for (const auto& row : rows) {
    auto cell = [&](double mean, double sd) {
      std::ostringstream c;
      c << std::fixed << std::setprecision(4) << mean << " +/- " << sd;
      return c.str();
    };
    const auto& m = row.metrics.mean;
    const auto& s = row.metrics.stddev;
    os << std::setw(26) << row.name << std::setw(20) << cell(m.accuracy, s.accuracy) << std::setw(20)
       << cell(m.precision, s.precision) << std::setw(20) << cell(m.recall, s.recall) << cell(m.f1, s.f1) << '\n';
  }
  return os.str();
}

}  // namespace dmgsl::trainer

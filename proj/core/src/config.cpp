// SPDX-License-Identifier: Apache-2.0
#include "dmgsl/config.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "dmgsl/errors.hpp"
#include "dmgsl/random.hpp"

namespace dmgsl {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::size_t to_size(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || p != v.data() + v.size()) {
    throw ConfigError("config: '" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || p != v.data() + v.size()) {
    throw ConfigError("config: '" + key + "' expects an unsigned integer, got '" + v + "'");
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || p != v.data() + v.size()) {
    throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: '" + key + "' expects true/false, got '" + v + "'");
}

void check_rate(double v, const char* key) {
  if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string("config: ") + key + " must lie in [0, 1]");
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("config: epochs must be at least 1");
  if (!(lr > 0)) throw ConfigError("config: lr must be positive");
  check_rate(tau, "tau");
  check_rate(anchor_mask, "anchor_mask");
  check_rate(learned_mask, "learned_mask");
  check_rate(edge_drop, "edge_drop");
  if (!(temperature > 0)) throw ConfigError("config: temperature must be positive");
  if (bootstrap_every < 1) throw ConfigError("config: bootstrap_every must be at least 1");
  if (k < 1) throw ConfigError("config: k must be at least 1");
  if (hat_hidden < 1 || head_dim < 1 || heads < 1 || encoder_hidden < 1 || embed_dim < 1 ||
      projector_hidden < 1 || projection_dim < 1) {
    throw ConfigError("config: all layer widths must be at least 1");
  }
  if (theta_noise < 0) throw ConfigError("config: theta_noise must be non-negative");
}

void TrainConfig::set(const std::string& key, const std::string& value) {
  if (key == "epochs") epochs = to_size(key, value);
  else if (key == "lr") lr = to_double(key, value);
  else if (key == "optimizer") optimizer = optimizer_kind_from_string(value);
  else if (key == "tau") tau = to_double(key, value);
  else if (key == "bootstrap_every") bootstrap_every = to_size(key, value);
  else if (key == "k") k = to_size(key, value);
  else if (key == "anchor_mask") anchor_mask = to_double(key, value);
  else if (key == "learned_mask") learned_mask = to_double(key, value);
  else if (key == "edge_drop") edge_drop = to_double(key, value);
  else if (key == "temperature") temperature = to_double(key, value);
  else if (key == "hat_hidden") hat_hidden = to_size(key, value);
  else if (key == "lstm_dim") lstm_dim = to_size(key, value);
  else if (key == "head_dim") head_dim = to_size(key, value);
  else if (key == "heads") heads = to_size(key, value);
  else if (key == "encoder_hidden") encoder_hidden = to_size(key, value);
  else if (key == "embed_dim") embed_dim = to_size(key, value);
  else if (key == "projector_hidden") projector_hidden = to_size(key, value);
  else if (key == "projection_dim") projection_dim = to_size(key, value);
  else if (key == "theta_noise") theta_noise = to_double(key, value);
  else if (key == "seed") seed = to_u64(key, value);
  else if (key == "use_hat") use_hat = to_bool(key, value);
  else if (key == "use_tat") use_tat = to_bool(key, value);
  else if (key == "hat_node_mean") hat_node_mean = to_bool(key, value);
  else if (key == "center_features") center_features = to_bool(key, value);
  else throw ConfigError("config: unknown key '" + key + "'");
}

std::string TrainConfig::to_text() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "epochs = " << epochs << '\n'
     << "lr = " << lr << '\n'
     << "optimizer = " << to_string(optimizer) << '\n'
     << "tau = " << tau << '\n'
     << "bootstrap_every = " << bootstrap_every << '\n'
     << "k = " << k << '\n'
     << "anchor_mask = " << anchor_mask << '\n'
     << "learned_mask = " << learned_mask << '\n'
     << "edge_drop = " << edge_drop << '\n'
     << "temperature = " << temperature << '\n'
     << "hat_hidden = " << hat_hidden << '\n'
     << "lstm_dim = " << lstm_dim << '\n'
     << "head_dim = " << head_dim << '\n'
     << "heads = " << heads << '\n'
     << "encoder_hidden = " << encoder_hidden << '\n'
     << "embed_dim = " << embed_dim << '\n'
     << "projector_hidden = " << projector_hidden << '\n'
     << "projection_dim = " << projection_dim << '\n'
     << "theta_noise = " << theta_noise << '\n'
     << "seed = " << seed << '\n'
     << "use_hat = " << (use_hat ? "true" : "false") << '\n'
     << "use_tat = " << (use_tat ? "true" : "false") << '\n'
     << "hat_node_mean = " << (hat_node_mean ? "true" : "false") << '\n'
     << "center_features = " << (center_features ? "true" : "false") << '\n';
  return os.str();
}

std::uint64_t TrainConfig::hash() const { return fnv1a(to_text()); }

TrainConfig TrainConfig::parse(std::istream& in) {
  TrainConfig cfg;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash_pos = raw.find('#');
    const std::string line = trim(hash_pos == std::string::npos ? raw : raw.substr(0, hash_pos));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

TrainConfig TrainConfig::parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

TrainConfig TrainConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  return parse(in);
}

}  // namespace dmgsl

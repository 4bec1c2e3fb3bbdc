#include "miarec/config.hpp"

#include <fstream>
#include <sstream>

#include "miarec/error.hpp"

namespace miarec {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::size_t to_size(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
    const auto x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return static_cast<std::size_t>(x);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a non-negative integer, got \"" + v + "\"");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got \"" + v + "\"");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true/false, got \"" + v + "\"");
}

}  // namespace

const std::vector<std::pair<std::string, std::string>>& RunConfig::defaults() {
  static const std::vector<std::pair<std::string, std::string>> d = {
      {"corpus", ""},
      {"checkpoint", "miarec.ckpt"},
      {"report", "miarec_report.txt"},
      {"vectors", ""},
      {"seed", "1"},
      {"split_seed", "7"},
      {"epochs", "100"},
      {"batch_size", "1024"},
      {"dim", "64"},
      {"learning_rate", "0.001"},
      {"reg_weight", "0.0005"},
      {"layers", "2"},
      {"sample_sizes", "10,10"},
      {"attention_dim", "64"},
      {"influence_mode", "gravity"},
      {"use_interdependent", "true"},
      {"use_content", "true"},
      {"relations", "collaboration,co_topic,co_venue"},
      {"min_shared_topic", "3"},
      {"distance_source", "co_occurrence"},
      {"gravitational_constant", "1.0"},
      {"content_dim", "64"},
      {"content_epochs", "50"},
      {"content_negatives", "5"},
      {"content_learning_rate", "0.025"},
      {"content_min_count", "2"},
      {"content_seed", "1"},
  };
  return d;
}

RunConfig::RunConfig() {
  for (const auto& [k, v] : defaults()) values_[k] = v;
}

bool RunConfig::has_key(const std::string& key) const { return values_.contains(key); }

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!has_key(key)) throw ConfigError("unknown config key: " + key);
  values_[key] = trim(value);
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key: " + key);
  return it->second;
}

RunConfig RunConfig::from_text(const std::string& text) {
  RunConfig c;
  std::stringstream ss(text);
  std::size_t line_no = 0;
  for (std::string line; std::getline(ss, line);) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [k, v] : defaults()) out.emplace_back(k, values_.at(k));
  return out;
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : entries()) out += k + " = " + v + "\n";
  return out;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.batch_size = to_size("batch_size", get("batch_size"));
  t.learning_rate = to_double("learning_rate", get("learning_rate"));
  t.reg_weight = to_double("reg_weight", get("reg_weight"));
  t.epochs = to_size("epochs", get("epochs"));
  t.seed = to_size("seed", get("seed"));
  t.split_seed = to_size("split_seed", get("split_seed"));
  t.use_content = to_bool("use_content", get("use_content"));
  t.encoder.layers = to_size("layers", get("layers"));
  t.encoder.sample_sizes.clear();
  for (const auto& s : split_list(get("sample_sizes"))) {
    t.encoder.sample_sizes.push_back(to_size("sample_sizes", s));
  }
  t.encoder.dim = to_size("dim", get("dim"));
  t.encoder.attention_dim = to_size("attention_dim", get("attention_dim"));
  t.encoder.influence_mode = parse_influence_mode(get("influence_mode"));
  t.encoder.use_interdependent = to_bool("use_interdependent", get("use_interdependent"));
  t.content.dim = to_size("content_dim", get("content_dim"));
  t.content.epochs = to_size("content_epochs", get("content_epochs"));
  t.content.negatives = to_size("content_negatives", get("content_negatives"));
  t.content.learning_rate = to_double("content_learning_rate", get("content_learning_rate"));
  t.content.min_count = to_size("content_min_count", get("content_min_count"));
  t.content.seed = to_size("content_seed", get("content_seed"));
  t.validate();
  if (t.content.epochs < 1 || t.content.negatives < 1) {
    throw ConfigError("content_epochs and content_negatives must be >= 1");
  }
  if (!(t.content.learning_rate > 0.0)) throw ConfigError("content_learning_rate must be positive");
  return t;
}

NetworkConfig RunConfig::network_config() const {
  NetworkConfig n;
  n.relations.clear();
  for (const auto& r : split_list(get("relations"))) n.relations.push_back(parse_relation_kind(r));
  if (n.relations.size() < 2) throw ConfigError("relations must list at least two relation kinds");
  n.min_shared_topic = to_size("min_shared_topic", get("min_shared_topic"));
  if (n.min_shared_topic < 1) throw ConfigError("min_shared_topic must be >= 1");
  n.distance_source = parse_distance_source(get("distance_source"));
  n.gravitational_constant = to_double("gravitational_constant", get("gravitational_constant"));
  if (!(n.gravitational_constant > 0.0)) throw ConfigError("gravitational_constant must be positive");
  return n;
}

}  // namespace miarec

#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "miarec/recommender.hpp"

namespace miarec {

/// Flat `key = value` run configuration. Every key has a default; unknown keys
/// raise ConfigError on set(), bad values when the typed views are built.
class RunConfig {
 public:
  RunConfig();

  static RunConfig from_text(const std::string& text);
  static RunConfig from_file(const std::string& path);

  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;
  bool has_key(const std::string& key) const;

  /// All keys in canonical order with their current values.
  std::vector<std::pair<std::string, std::string>> entries() const;
  std::string to_text() const;

  TrainConfig train_config() const;
  NetworkConfig network_config() const;

  std::string corpus_path() const { return get("corpus"); }
  std::string checkpoint_path() const { return get("checkpoint"); }
  std::string report_path() const { return get("report"); }
  std::string vectors_path() const { return get("vectors"); }

  static const std::vector<std::pair<std::string, std::string>>& defaults();

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace miarec

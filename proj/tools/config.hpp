#pragma once

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace lgtsim::cli {

using json = nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A run that finished but broke a numerical invariant.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// JSON config with usage tracking; keys never read are reported by check_unknown().
class Config {
 public:
  static Config load(const std::string& path);
  static Config parse(const std::string& text, const std::string& origin = "<string>");

  const json& root() const { return root_; }
  void mark(const std::string& path) { used_.insert(path); }
  void check_unknown() const;

 private:
  explicit Config(json root) : root_(std::move(root)) {}
  void check_node(const json& node, const std::string& path) const;

  json root_;
  std::set<std::string> used_;
};

class Section {
 public:
  Section(Config& cfg, const json* node, std::string path) : cfg_(&cfg), node_(node), path_(std::move(path)) {}
  static Section root(Config& cfg) { return Section(cfg, &cfg.root(), ""); }

  bool has(const std::string& key) const;
  Section section(const std::string& key);

  double number(const std::string& key);
  double number(const std::string& key, double def);
  int integer(const std::string& key);
  int integer(const std::string& key, int def);
  bool flag(const std::string& key, bool def);
  std::string text(const std::string& key, const std::string& def);
  std::vector<double> numbers(const std::string& key);
  std::vector<double> numbers(const std::string& key, const std::vector<double>& def);
  std::vector<int> integers(const std::string& key, const std::vector<int>& def);

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json* lookup(const std::string& key);
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

  Config* cfg_;
  const json* node_;
  std::string path_;
};

struct RunContext {
  std::string command;
  std::string output_dir;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string config_hash;  // hex FNV-1a of the effective config
  std::vector<std::string> artifacts;
  // Rejects unknown keys; commands call it once all parameters are read.
  std::function<void()> config_read = [] {};

  std::string path(const std::string& name) const;
  void add_artifact(const std::string& name) { artifacts.push_back(name); }
};

std::string config_hash(const json& effective);
void write_json(const std::string& path, const json& j);
void write_manifest(const RunContext& ctx, const json& effective);

}  // namespace lgtsim::cli

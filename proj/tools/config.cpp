#include "config.hpp"

#include "lgtsim/io.hpp"

#include <Eigen/Core>

#include <fstream>
#include <sstream>

namespace lgtsim::cli {

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str(), path);
}

Config Config::parse(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError(origin + ": top level must be an object");
  return Config(std::move(j));
}

void Config::check_node(const json& node, const std::string& path) const {
  for (auto it = node.begin(); it != node.end(); ++it) {
    const std::string full = path.empty() ? it.key() : path + "." + it.key();
    if (!used_.count(full)) throw ConfigError("unknown key '" + full + "'");
    if (it->is_object()) check_node(*it, full);
  }
}

void Config::check_unknown() const { check_node(root_, ""); }

bool Section::has(const std::string& key) const { return node_ && node_->contains(key); }

const json* Section::lookup(const std::string& key) {
  if (!has(key)) return nullptr;
  cfg_->mark(key_path(key));
  return &(*node_)[key];
}

void Section::fail(const std::string& key, const std::string& what) const {
  throw ConfigError("'" + key_path(key) + "': " + what);
}

Section Section::section(const std::string& key) {
  const json* v = lookup(key);
  if (v && !v->is_object()) fail(key, "expected an object");
  return Section(*cfg_, v, key_path(key));
}

double Section::number(const std::string& key) {
  const json* v = lookup(key);
  if (!v) fail(key, "required key is missing");
  if (!v->is_number()) fail(key, "expected a number");
  return v->get<double>();
}

double Section::number(const std::string& key, double def) { return has(key) ? number(key) : def; }

int Section::integer(const std::string& key) {
  const json* v = lookup(key);
  if (!v) fail(key, "required key is missing");
  if (!v->is_number_integer()) fail(key, "expected an integer");
  return v->get<int>();
}

int Section::integer(const std::string& key, int def) { return has(key) ? integer(key) : def; }

bool Section::flag(const std::string& key, bool def) {
  const json* v = lookup(key);
  if (!v) return def;
  if (!v->is_boolean()) fail(key, "expected true or false");
  return v->get<bool>();
}

std::string Section::text(const std::string& key, const std::string& def) {
  const json* v = lookup(key);
  if (!v) return def;
  if (!v->is_string()) fail(key, "expected a string");
  return v->get<std::string>();
}

std::vector<double> Section::numbers(const std::string& key) {
  const json* v = lookup(key);
  if (!v) fail(key, "required key is missing");
  if (v->is_number()) return {v->get<double>()};
  if (!v->is_array()) fail(key, "expected a number or an array of numbers");
  std::vector<double> out;
  for (const auto& e : *v) {
    if (!e.is_number()) fail(key, "expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<double> Section::numbers(const std::string& key, const std::vector<double>& def) {
  return has(key) ? numbers(key) : def;
}

std::vector<int> Section::integers(const std::string& key, const std::vector<int>& def) {
  const json* v = lookup(key);
  if (!v) return def;
  if (!v->is_array()) fail(key, "expected an array of integers");
  std::vector<int> out;
  for (const auto& e : *v) {
    if (!e.is_number_integer()) fail(key, "expected an array of integers");
    out.push_back(e.get<int>());
  }
  return out;
}

std::string RunContext::path(const std::string& name) const { return output_dir + "/" + name; }

std::string config_hash(const json& effective) { return io::hex64(io::fnv1a64(effective.dump())); }

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

void write_manifest(const RunContext& ctx, const json& effective) {
  json m;
  m["command"] = ctx.command;
  m["config_hash"] = ctx.config_hash;
  m["config_format"] = "json-v1";
  m["seed"] = ctx.seed;
  m["config"] = effective;
  m["versions"] = {{"lgtsim", LGTSIM_VERSION},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"compiler", __VERSION__}};
  json arts = json::array();
  for (const auto& a : ctx.artifacts) arts.push_back({{"file", a}, {"config_hash", ctx.config_hash}});
  m["artifacts"] = arts;
  write_json(ctx.path("manifest.json"), m);
}

}  // namespace lgtsim::cli

#include "affsr/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace affsr {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "grids.L", "grids.sr_width", "grids.sr_height",
      "motion.source", "motion.frames", "motion.max_rotation_deg",
      "motion.max_zoom", "motion.center_u", "motion.center_v", "motion.file",
      "model.kind", "model.cw_round_centers",
      "regularization.lambda", "regularization.s", "regularization.positivity",
      "regularization.cliques",
      "optimizer.max_iters", "optimizer.grad_tol", "optimizer.f_tol",
      "optimizer.memory", "optimizer.init", "optimizer.init_file",
      "noise.variance", "noise.seed",
      "io.out_dir", "io.data_dir", "io.hr_image", "io.chart",
      "footprint.model", "footprint.rotation_deg", "footprint.zoom",
      "footprint.detector", "footprint.lr_size",
      "bench.models", "bench.settings", "bench.lambdas", "bench.s",
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

RunConfig RunConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path);
}

RunConfig RunConfig::parse_text(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    if (key.find('.') == std::string::npos) {
      if (section.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": key '" + key +
                          "' outside any section");
      key = section + "." + key;
    }
    if (cfg.values_.count(key))
      throw ConfigError(origin + ": duplicate key '" + key + "'");
    cfg.values_[key] = value;
  }
  return cfg;
}

void RunConfig::set(const std::string& dotted_key, const std::string& value) {
  if (dotted_key.find('.') == std::string::npos)
    throw ConfigError("override key must be a dotted path: " + dotted_key);
  values_[dotted_key] = value;
}

bool RunConfig::has(const std::string& key) const { return values_.count(key) > 0; }

std::string RunConfig::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing required key: " + key);
  return it->second;
}

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return d;
  } catch (...) {
    throw ConfigError(key + ": not a number: '" + v + "'");
  }
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

double RunConfig::get_double_or_inf(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  std::string v = get_string(key);
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "inf" || v == "infinity")
    return std::numeric_limits<double>::infinity();
  return get_double(key);
}

int RunConfig::get_int(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    std::size_t pos = 0;
    const int i = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return i;
  } catch (...) {
    throw ConfigError(key + ": not an integer: '" + v + "'");
  }
}

int RunConfig::get_int(const std::string& key, int fallback) const {
  return has(key) ? get_int(key) : fallback;
}

long long RunConfig::get_int64(const std::string& key, long long fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get_string(key);
  try {
    std::size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return i;
  } catch (...) {
    throw ConfigError(key + ": not an integer: '" + v + "'");
  }
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  std::string v = get_string(key);
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": not a boolean: '" + v + "'");
}

std::vector<std::string> RunConfig::get_list(const std::string& key) const {
  const std::string v = get_string(key);
  std::vector<std::string> items;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  if (items.empty()) throw ConfigError(key + ": empty list");
  return items;
}

void RunConfig::validate_known_keys() const {
  for (const auto& [key, value] : values_) {
    (void)value;
    if (!known_keys().count(key))
      throw ConfigError("unknown config key: " + key);
  }
}

void RunConfig::require(const std::string& key) const {
  if (!has(key)) throw ConfigError("missing required key: " + key);
}

std::string RunConfig::dump() const {
  std::ostringstream out;
  for (const auto& [key, value] : values_) out << key << " = " << value << "\n";
  return out.str();
}

}  // namespace affsr

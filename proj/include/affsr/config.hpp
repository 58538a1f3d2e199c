#pragma once

/* ---
   Run configuration: a nested key-value text file with [section] headers,
   `key = value` entries and '#' comments. Keys may also be written in
   dotted form (section.key = value). Unknown keys are errors, so typos in
   lambda or s cannot silently invalidate a benchmark. Command-line flags
   override keys as dotted paths.
   --- */

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace affsr {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class RunConfig {
 public:
  static RunConfig parse_file(const std::string& path);
  static RunConfig parse_text(const std::string& text, const std::string& origin);

  /// Applies a dotted-path override (e.g. "regularization.lambda=1e-3").
  void set(const std::string& dotted_key, const std::string& value);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  /// Accepts "inf" / "infinity" for the hyperbolic threshold.
  double get_double_or_inf(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  long long get_int64(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& key) const;  // comma separated

  /// Rejects keys not present in the schema; error message carries the
  /// offending field path.
  void validate_known_keys() const;

  /// Requires a key to be present (error message carries the field path).
  void require(const std::string& key) const;

  /// Full resolved contents, one dotted key per line, sorted.
  std::string dump() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace affsr

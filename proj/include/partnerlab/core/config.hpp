#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace partnerlab {

// Flat key-value configuration. The file format is one `key = value` per
// line, `#` comments, and optional `[section]` headers that prefix the keys
// that follow with `section.`. Command-line overrides use the same dotted
// keys and are applied after the file is loaded.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(std::string_view content, std::string_view origin = "<string>");
  static KeyValueConfig load(const std::filesystem::path& path);

  // Applies a single `key=value` override. Throws ConfigError if malformed.
  void apply_override(std::string_view assignment);
  void set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }

  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> find(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  std::string require_string(const std::string& key) const;

  // Keys under `prefix.` with the prefix stripped.
  KeyValueConfig subtree(const std::string& prefix) const;

  // Canonical `key = value` listing, sorted by key. Hashing this gives the
  // config hash recorded in manifests.
  std::string dump() const;
  std::string hash() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace partnerlab

#include "partnerlab/core/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "partnerlab/core/errors.hpp"
#include "partnerlab/core/hashing.hpp"
#include "partnerlab/core/text.hpp"

namespace partnerlab {

namespace {

std::pair<std::string, std::string> split_assignment(std::string_view line, std::string_view origin,
                                                     size_t line_no) {
  auto eq = line.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("config", std::string(origin) + ":" + std::to_string(line_no) +
                                    ": expected key = value, got '" + std::string(line) + "'");
  }
  std::string key = text::trim(line.substr(0, eq));
  std::string value = text::trim(line.substr(eq + 1));
  if (key.empty()) {
    throw ConfigError("config", std::string(origin) + ":" + std::to_string(line_no) + ": empty key");
  }
  return {key, value};
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view content, std::string_view origin) {
  KeyValueConfig cfg;
  std::string section;
  std::istringstream in{std::string(content)};
  std::string raw;
  size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = text::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = text::trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    auto [key, value] = split_assignment(line, origin, line_no);
    if (!section.empty()) key = section + "." + key;
    cfg.values_[key] = value;
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void KeyValueConfig::apply_override(std::string_view assignment) {
  auto [key, value] = split_assignment(assignment, "--set", 0);
  values_[key] = value;
}

std::optional<std::string> KeyValueConfig::find(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  return find(key).value_or(fallback);
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  auto v = find(key);
  if (!v) return fallback;
  try {
    size_t used = 0;
    double d = std::stod(*v, &used);
    if (used != v->size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config", "key '" + key + "' expects a number, got '" + *v + "'");
  }
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
  auto v = find(key);
  if (!v) return fallback;
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || ptr != v->data() + v->size()) {
    throw ConfigError("config", "key '" + key + "' expects an integer, got '" + *v + "'");
  }
  return out;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  auto v = find(key);
  if (!v) return fallback;
  std::string s = text::to_lower(*v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("config", "key '" + key + "' expects a boolean, got '" + *v + "'");
}

std::string KeyValueConfig::require_string(const std::string& key) const {
  auto v = find(key);
  if (!v || v->empty()) throw ConfigError("config", "missing required key '" + key + "'");
  return *v;
}

KeyValueConfig KeyValueConfig::subtree(const std::string& prefix) const {
  KeyValueConfig out;
  const std::string p = prefix + ".";
  for (const auto& [k, v] : values_) {
    if (text::starts_with(k, p)) out.values_[k.substr(p.size())] = v;
  }
  return out;
}

std::string KeyValueConfig::dump() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

std::string KeyValueConfig::hash() const { return hashing::sha256_hex(dump()); }

}  // namespace partnerlab

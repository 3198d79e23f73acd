#pragma once

#include <filesystem>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

namespace partnerlab {

struct SafetyPattern {
  std::string category;
  std::string source;  // the regex as written in the config
  std::regex regex;
};

struct SafetyVerdict {
  bool safe = true;
  std::string matched_pattern;  // empty when safe
  std::string category;         // empty when safe

  explicit operator bool() const { return safe; }
};

// Case-insensitive unsafe-content filter. A text is unsafe iff any configured
// pattern matches anywhere in it; the first matching pattern is reported.
class SafetyFilter {
 public:
  SafetyFilter() = default;

  // Pattern file: one regex per line, `#` comments, blank lines ignored. A
  // line may begin with `@category ` to name the category. Invalid regexes
  // raise ConfigError naming the line.
  static SafetyFilter load(const std::filesystem::path& path);
  static SafetyFilter parse(std::string_view content, std::string_view origin = "<patterns>");
  static SafetyFilter from_patterns(const std::vector<std::string>& patterns);

  SafetyVerdict check(std::string_view text) const;
  std::size_t size() const { return patterns_.size(); }
  const std::vector<SafetyPattern>& patterns() const { return patterns_; }

 private:
  void add(std::string category, std::string source, std::string_view origin, std::size_t line);

  std::vector<SafetyPattern> patterns_;
};

}  // namespace partnerlab

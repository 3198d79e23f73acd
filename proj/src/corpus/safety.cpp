#include "partnerlab/corpus/safety.hpp"

#include <sstream>

#include "partnerlab/core/checkpoint.hpp"
#include "partnerlab/core/errors.hpp"
#include "partnerlab/core/text.hpp"

namespace partnerlab {

void SafetyFilter::add(std::string category, std::string source, std::string_view origin, std::size_t line) {
  try {
    std::regex re(source, std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
    patterns_.push_back({std::move(category), std::move(source), std::move(re)});
  } catch (const std::regex_error& e) {
    throw ConfigError("safety", std::string(origin) + ":" + std::to_string(line) + ": invalid regex '" + source +
                                    "': " + e.what());
  }
}

SafetyFilter SafetyFilter::parse(std::string_view content, std::string_view origin) {
  SafetyFilter f;
  std::istringstream in{std::string(content)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = text::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    std::string category = "unsafe";
    if (line[0] == '@') {
      auto sp = line.find(' ');
      if (sp == std::string::npos) {
        throw ConfigError("safety", std::string(origin) + ":" + std::to_string(line_no) + ": category without pattern");
      }
      category = line.substr(1, sp - 1);
      line = text::trim(std::string_view(line).substr(sp + 1));
    }
    f.add(std::move(category), std::move(line), origin, line_no);
  }
  return f;
}

SafetyFilter SafetyFilter::load(const std::filesystem::path& path) {
  std::string content;
  try {
    content = read_text_file(path);
  } catch (const DataError&) {
    throw ConfigError("safety", "cannot read pattern file " + path.string());
  }
  return parse(content, path.string());
}

SafetyFilter SafetyFilter::from_patterns(const std::vector<std::string>& patterns) {
  SafetyFilter f;
  for (std::size_t i = 0; i < patterns.size(); ++i) f.add("unsafe", patterns[i], "<list>", i + 1);
  return f;
}

SafetyVerdict SafetyFilter::check(std::string_view text) const {
  for (const auto& p : patterns_) {
    if (std::regex_search(text.begin(), text.end(), p.regex)) return {false, p.source, p.category};
  }
  return {};
}

}  // namespace partnerlab

#include "partnerlab/corpus/segment.hpp"

#include <array>
#include <cctype>

#include "partnerlab/core/text.hpp"

namespace partnerlab {

namespace {

constexpr std::array<std::string_view, 16> kAbbreviations = {
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "vs", "etc", "e.g", "i.e", "a.m", "p.m", "approx", "no"};

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }
bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_abbreviation(std::string_view text, std::size_t period_pos) {
  std::size_t start = period_pos;
  while (start > 0 && !is_space(text[start - 1])) --start;
  std::string word = text::to_lower(text.substr(start, period_pos - start));
  while (!word.empty() && (word.front() == '(' || word.front() == '"')) word.erase(word.begin());
  for (auto abbr : kAbbreviations) {
    if (word == abbr) return true;
  }
  return false;
}

}  // namespace

std::vector<std::string> segment_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  std::size_t i = 0;
  auto emit = [&](std::size_t end) {
    std::string s = text::normalize_whitespace(text.substr(begin, end - begin));
    if (!s.empty()) out.push_back(std::move(s));
    begin = end;
  };
  while (i < text.size()) {
    if (!is_terminal(text[i])) {
      ++i;
      continue;
    }
    std::size_t run_start = i;
    while (i < text.size() && is_terminal(text[i])) ++i;
    bool single_period = i - run_start == 1 && text[run_start] == '.';
    while (i < text.size() && is_closer(text[i])) ++i;
    bool at_break = i == text.size() || is_space(text[i]);
    if (!at_break) continue;
    if (single_period && is_abbreviation(text, run_start)) continue;
    emit(i);
  }
  emit(text.size());
  return out;
}

std::string join_sentences(const std::vector<std::string>& sentences) { return text::join(sentences, " "); }

}  // namespace partnerlab

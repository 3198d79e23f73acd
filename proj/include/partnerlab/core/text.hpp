#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace partnerlab::text {

// Collapses runs of whitespace to one space and trims both ends.
std::string normalize_whitespace(std::string_view s);

// ASCII lowercase; non-ASCII bytes pass through untouched.
std::string to_lower(std::string_view s);

std::string trim(std::string_view s);

// Whitespace-delimited words, as used by the metrics (edit rate, distinct-n)
// and by the fluency language model.
std::vector<std::string> split_words(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool starts_with(std::string_view s, std::string_view prefix);

}  // namespace partnerlab::text

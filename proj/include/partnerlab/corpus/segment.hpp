#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace partnerlab {

// Rule-based sentence splitter. A sentence ends at a run of [.!?] (plus any
// closing quotes or brackets) followed by whitespace or end of text, unless
// the word before a single period is a known abbreviation. Sentences are
// trimmed; empty sentences are dropped; order is preserved.
std::vector<std::string> segment_sentences(std::string_view text);

// Joins sentences with single spaces (the inverse of segmentation up to
// whitespace normalization).
std::string join_sentences(const std::vector<std::string>& sentences);

}  // namespace partnerlab

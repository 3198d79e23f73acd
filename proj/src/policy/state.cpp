#include "partnerlab/policy/state.hpp"

#include <algorithm>

#include "partnerlab/core/errors.hpp"
#include "partnerlab/corpus/segment.hpp"

namespace partnerlab {

std::size_t RewriteState::window_length() const {
  if (window_start >= response_sentences.size()) return 0;
  return std::min(static_cast<std::size_t>(window_size), response_sentences.size() - window_start);
}

std::vector<std::string> RewriteState::window() const {
  auto begin = response_sentences.begin() + static_cast<std::ptrdiff_t>(std::min(window_start, response_sentences.size()));
  return {begin, begin + static_cast<std::ptrdiff_t>(window_length())};
}

RewriteState encode_state(const SeekerPost& seeker, const std::vector<std::string>& response_sentences,
                          std::size_t window_start, int k, const Vocabulary& vocab, int max_tokens) {
  if (k < 1) throw ConfigError("policy", "window size k must be >= 1");
  if (window_start > response_sentences.size() || (window_start == response_sentences.size() && window_start != 0)) {
    throw DataError("policy", "window start " + std::to_string(window_start) + " outside a response of " +
                                  std::to_string(response_sentences.size()) + " sentences");
  }
  RewriteState s;
  s.seeker = seeker;
  s.response_sentences = response_sentences;
  s.window_start = window_start;
  s.window_size = k;
  auto left = truncate_tokens(tokenize(seeker.text), max_tokens);
  auto right = truncate_tokens(tokenize(join_sentences(s.window())), max_tokens);
  s.encoded_input = vocab.encode_tokens(left);
  s.encoded_input.push_back(Vocabulary::kSplit);
  auto w = vocab.encode_tokens(right);
  s.encoded_input.insert(s.encoded_input.end(), w.begin(), w.end());
  return s;
}

}  // namespace partnerlab

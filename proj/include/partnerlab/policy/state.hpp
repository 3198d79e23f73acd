#pragma once

#include <string>
#include <vector>

#include "partnerlab/core/tokenizer.hpp"
#include "partnerlab/corpus/types.hpp"

namespace partnerlab {

// The RL state: the seeker post and a k-sentence window of the response
// starting at sentence j (clipped to the response length).
struct RewriteState {
  SeekerPost seeker;
  std::vector<std::string> response_sentences;
  std::size_t window_start = 0;
  int window_size = 2;
  int step = 0;  // edit steps already taken in the episode
  std::vector<TokenId> encoded_input;  // tokens(seeker) <SPLIT> tokens(window)

  std::size_t window_length() const;
  std::vector<std::string> window() const;
};

// Builds the state and its encoded input. Each side of <SPLIT> is truncated
// to max_tokens tokens.
RewriteState encode_state(const SeekerPost& seeker, const std::vector<std::string>& response_sentences,
                          std::size_t window_start, int k, const Vocabulary& vocab,
                          int max_tokens = kDefaultMaxPostTokens);

}  // namespace partnerlab

#include "partnerlab/corpus/types.hpp"

#include "partnerlab/core/text.hpp"
#include "partnerlab/core/tokenizer.hpp"
#include "partnerlab/corpus/segment.hpp"

namespace partnerlab {

std::vector<std::string> truncate_tokens(std::vector<std::string> tokens, int max_tokens) {
  if (max_tokens >= 0 && tokens.size() > static_cast<std::size_t>(max_tokens)) {
    tokens.resize(static_cast<std::size_t>(max_tokens));
  }
  return tokens;
}

ResponsePost make_response(std::string id, const std::vector<std::string>& sentences, int max_tokens) {
  ResponsePost r;
  r.id = std::move(id);
  for (const auto& s : sentences) {
    std::string norm = text::normalize_whitespace(s);
    if (!norm.empty()) r.sentences.push_back(std::move(norm));
  }
  r.text = join_sentences(r.sentences);
  r.tokens = truncate_tokens(tokenize(r.text), max_tokens);
  return r;
}

ConversationPair make_pair(std::string thread_id, std::string id, std::string_view seeker_text,
                           std::string_view response_text, int max_tokens) {
  ConversationPair p;
  p.thread_id = std::move(thread_id);
  p.seeker.id = id + ".s";
  p.seeker.text = text::normalize_whitespace(seeker_text);
  p.seeker.tokens = truncate_tokens(tokenize(p.seeker.text), max_tokens);
  p.response = make_response(id + ".r", segment_sentences(response_text), max_tokens);
  p.response.id = std::move(id);
  return p;
}

}  // namespace partnerlab

#pragma once

#include <optional>
#include <string>
#include <vector>

namespace partnerlab {

inline constexpr int kDefaultMaxPostTokens = 64;

// Per-mechanism empathy levels, each in {0, 1, 2}. The 0-6 total is their sum.
struct EmpathyScore {
  int emotional_reaction = 0;
  int interpretation = 0;
  int exploration = 0;

  int total() const { return emotional_reaction + interpretation + exploration; }
  bool valid() const {
    auto ok = [](int v) { return v >= 0 && v <= 2; };
    return ok(emotional_reaction) && ok(interpretation) && ok(exploration);
  }
  bool operator==(const EmpathyScore&) const = default;
};

struct SeekerPost {
  std::string id;
  std::string text;                 // whitespace-normalized, never truncated
  std::vector<std::string> tokens;  // model-input tokens, at most max_post_tokens
};

struct ResponsePost {
  std::string id;
  std::string text;
  std::vector<std::string> sentences;
  std::vector<std::string> tokens;
};

struct ConversationPair {
  std::string thread_id;
  SeekerPost seeker;
  ResponsePost response;
  std::optional<EmpathyScore> empathy_label;
  std::optional<bool> mental_health;  // relevance label, when known
  bool safe = false;                  // set once both posts passed the safety filter
};

// Training example for the warm start. `input` is "seeker <SPLIT> response"
// and `target` is the response with one high-empathy sentence removed; the
// removed sentence and its index are kept for the supervised heads.
struct WarmStartExample {
  std::string input;
  std::string target;
  std::string seeker_text;
  std::vector<std::string> response_sentences;
  std::size_t removed_index = 0;
  std::string removed_sentence;
  int removed_score = 0;
};

enum class CoherenceLabel { kIncoherent = 0, kCoherent = 1 };

struct CoherencePairExample {
  std::string sentence_a;
  std::string sentence_b;
  CoherenceLabel label = CoherenceLabel::kCoherent;
  std::string thread_a;  // provenance, for invariant checks
  std::string thread_b;
};

// Builds a normalized pair: whitespace collapsed, response segmented into
// sentences, both sides tokenized and truncated to max_tokens for model input.
ConversationPair make_pair(std::string thread_id, std::string id, std::string_view seeker_text,
                           std::string_view response_text, int max_tokens = kDefaultMaxPostTokens);

ResponsePost make_response(std::string id, const std::vector<std::string>& sentences,
                           int max_tokens = kDefaultMaxPostTokens);

std::vector<std::string> truncate_tokens(std::vector<std::string> tokens, int max_tokens);

}  // namespace partnerlab

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "partnerlab/corpus/types.hpp"

namespace partnerlab {

class EmpathyScorer;

inline constexpr std::string_view kSplitMarker = "<SPLIT>";
inline constexpr int kHighEmpathyThreshold = 2;

// One example per (response, sentence) where the sentence, scored alone as a
// one-sentence response to the seeker post, has an empathy total >= 2.
std::vector<WarmStartExample> build_warmstart_dataset(const std::vector<ConversationPair>& pairs,
                                                      const EmpathyScorer& scorer);

// Positives: every sentence pair (i < j) within one response, in order.
// Negatives: round(negative_ratio * positives) pairs of a sentence from
// another thread followed by an in-response sentence, cycling over the
// in-response sentences in corpus order. Throws DataError when the corpus
// has fewer than two threads.
std::vector<CoherencePairExample> build_coherence_dataset(const std::vector<ConversationPair>& pairs,
                                                          double negative_ratio, std::uint64_t rng_seed);

nlohmann::json to_json(const WarmStartExample& ex);
WarmStartExample warmstart_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CoherencePairExample& ex);
CoherencePairExample coherence_from_json(const nlohmann::json& j);

}  // namespace partnerlab

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "partnerlab/core/linear_classifier.hpp"
#include "partnerlab/corpus/types.hpp"

namespace partnerlab {

// Binary "is this seeker post about a mental-health issue" classifier over
// hashed n-grams of the seeker text.
class RelevanceClassifier {
 public:
  static constexpr int kHashBits = 14;

  // Trains on pairs carrying a mental_health label. Throws DataError if none
  // are labeled or only one class is present.
  static RelevanceClassifier train(const std::vector<ConversationPair>& pairs, const LinearTrainConfig& cfg = {});

  double probability(std::string_view seeker_text) const;
  bool predict(std::string_view seeker_text) const { return probability(seeker_text) > 0.5; }

  void save(const std::filesystem::path& dir) const;
  static RelevanceClassifier load(const std::filesystem::path& dir);

 private:
  LinearClassifier model_{1, 2, kHashBits};
};

// Filter that keeps pairs whose seeker post is mental-health related. Uses
// the trained classifier when present, else whole-word keyword matching.
class RelevanceFilter {
 public:
  // Throws ConfigError when neither a model nor keywords are supplied.
  RelevanceFilter(std::optional<RelevanceClassifier> model, std::vector<std::string> fallback_keywords);

  static std::vector<std::string> load_keywords(const std::filesystem::path& path);

  bool is_relevant(std::string_view seeker_text) const;
  bool operator()(const ConversationPair& pair) const { return is_relevant(pair.seeker.text); }

 private:
  std::optional<RelevanceClassifier> model_;
  std::unordered_set<std::string> keywords_;
};

}  // namespace partnerlab

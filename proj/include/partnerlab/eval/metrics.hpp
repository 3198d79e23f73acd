#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "partnerlab/core/nn.hpp"
#include "partnerlab/scorers/coherence.hpp"
#include "partnerlab/scorers/empathy.hpp"
#include "partnerlab/scorers/language_model.hpp"

namespace partnerlab {

struct EvalRecord {
  std::string id;
  std::string seeker_text;
  std::string original_text;
  std::string rewritten_text;
  std::optional<std::string> reference_text;
};

// Records file: JSONL {id, seeker_text, original_text, rewritten_text,
// reference_text?}. Throws DataError naming the line on malformed input.
std::vector<EvalRecord> read_records(const std::filesystem::path& path);
std::vector<EvalRecord> parse_records(std::string_view jsonl, std::string_view origin = "<records>");
std::string to_jsonl(const std::vector<EvalRecord>& records);
nlohmann::json to_json(const EvalRecord& r);

// Attaches reference_text from a file with the same schema, matched by id.
void attach_references(std::vector<EvalRecord>& records, const std::vector<EvalRecord>& references);

// Deterministic sentence embedder: every lowercased word maps to a fixed
// pseudo-random unit-scale vector derived from its hash; a text embeds as
// the mean of its word vectors (zero for a text without words).
class HashEmbedder {
 public:
  explicit HashEmbedder(int dim = 64, std::uint64_t seed = 0x5eed) : dim_(dim), seed_(seed) {}
  nn::Vector word_vector(std::string_view word) const;
  nn::Vector embed(std::string_view text) const;
  int dim() const { return dim_; }

 private:
  int dim_;
  std::uint64_t seed_;
};

// Returns nullopt when either vector has zero norm.
std::optional<double> cosine_similarity(const nn::Vector& a, const nn::Vector& b);

std::size_t word_levenshtein(const std::vector<std::string>& a, const std::vector<std::string>& b);

// Means are reduced in sorted order so results do not depend on record order.
// Metrics that skip records report the count through `skipped`.
double metric_change_in_empathy(const std::vector<EvalRecord>& records, const EmpathyScorer& scorer);
double metric_perplexity(const std::vector<EvalRecord>& records, const LanguageModel& lm,
                         std::size_t* skipped = nullptr);
double metric_specificity(const std::vector<EvalRecord>& records, const HashEmbedder& embedder,
                          std::size_t* skipped = nullptr);
double metric_distinct_n(const std::vector<EvalRecord>& records, int n);
double metric_sentence_coherence(const std::vector<EvalRecord>& records, const CoherenceModel& model,
                                 std::size_t* skipped = nullptr);
double metric_edit_rate(const std::vector<EvalRecord>& records, std::size_t* skipped = nullptr);
double metric_bleu(const std::vector<EvalRecord>& records);

// Score assigned to an n-gram order with candidate n-grams but no matches.
inline constexpr double kBleuZeroMatchFloor = 0.1;

}  // namespace partnerlab

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace partnerlab {

// Word-level language model over whitespace words. Every word receives a
// strictly positive probability.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;
  // Natural-log probability of each word given its history, in extended
  // precision so that exp(mean) round-trips to double.
  virtual std::vector<long double> word_log_probs(const std::vector<std::string>& words) const = 0;
  virtual std::size_t vocab_size() const = 0;
  virtual std::string kind() const = 0;
  virtual void save(const std::filesystem::path& dir) const = 0;
};

// Assigns 1/V to every word.
class UniformLm final : public LanguageModel {
 public:
  explicit UniformLm(std::size_t vocab_size);
  std::vector<long double> word_log_probs(const std::vector<std::string>& words) const override;
  std::size_t vocab_size() const override { return vocab_; }
  std::string kind() const override { return "uniform"; }
  void save(const std::filesystem::path& dir) const override;

 private:
  std::size_t vocab_;
};

struct BigramLmConfig {
  double bigram_weight = 0.6;
  double unigram_weight = 0.3;
  double uniform_weight = 0.1;
};

// Interpolated bigram model trained on lowercased whitespace words:
//   p(w | u) = a * c(u w)/c(u) + b * c(w)/N + g / (V + 1)
// The extra outcome in the uniform term is the unknown word. When the
// history u was never seen, the bigram weight is spread over the other two
// terms proportionally.
class BigramLm final : public LanguageModel {
 public:
  static BigramLm train(const std::vector<std::string>& texts, const BigramLmConfig& config = {});
  static BigramLm load(const std::filesystem::path& dir);

  std::vector<long double> word_log_probs(const std::vector<std::string>& words) const override;
  std::size_t vocab_size() const override { return unigram_.size(); }
  std::string kind() const override { return "bigram"; }
  void save(const std::filesystem::path& dir) const override;

  double probability(const std::string& history, const std::string& word) const;

 private:
  BigramLmConfig config_;
  std::map<std::string, long long> unigram_;
  std::map<std::string, long long> context_;  // counts of u as a history
  std::map<std::pair<std::string, std::string>, long long> bigram_;
  long long total_ = 0;
};

std::unique_ptr<LanguageModel> load_language_model(const std::filesystem::path& dir);

// r_f = p_LM(text)^(1/N) = exp(mean per-word log-probability), N = number of
// whitespace words. Throws DataError for empty text.
double fluency_reward(std::string_view text, const LanguageModel& lm);

// Sum of per-word negative log-likelihoods and the word count.
struct NllTotal {
  long double nll = 0.0L;
  std::size_t words = 0;
};
NllTotal negative_log_likelihood(std::string_view text, const LanguageModel& lm);

}  // namespace partnerlab

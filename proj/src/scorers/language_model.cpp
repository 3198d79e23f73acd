#include "partnerlab/scorers/language_model.hpp"

#include <cmath>
#include <sstream>

#include "partnerlab/core/checkpoint.hpp"
#include "partnerlab/core/errors.hpp"
#include "partnerlab/core/text.hpp"

namespace fs = std::filesystem;

namespace partnerlab {

namespace {
const std::string kBoundary = "<s>";

std::vector<std::string> lm_words(std::string_view text) { return text::split_words(text::to_lower(text)); }
}  // namespace

UniformLm::UniformLm(std::size_t vocab_size) : vocab_(vocab_size) {
  if (vocab_size == 0) throw ConfigError("language_model", "uniform LM needs a non-empty vocabulary");
}

std::vector<long double> UniformLm::word_log_probs(const std::vector<std::string>& words) const {
  return std::vector<long double>(words.size(), -std::log(static_cast<long double>(vocab_)));
}

void UniformLm::save(const fs::path& dir) const {
  fs::create_directories(dir);
  write_manifest(dir, "language_model", {{"impl", kind()}, {"vocab_size", vocab_}});
}

BigramLm BigramLm::train(const std::vector<std::string>& texts, const BigramLmConfig& config) {
  double sum = config.bigram_weight + config.unigram_weight + config.uniform_weight;
  if (config.uniform_weight <= 0.0 || std::abs(sum - 1.0) > 1e-12) {
    throw ConfigError("language_model", "interpolation weights must sum to 1 with a positive uniform weight");
  }
  BigramLm lm;
  lm.config_ = config;
  for (const auto& t : texts) {
    std::string prev = kBoundary;
    for (auto& w : lm_words(t)) {
      ++lm.unigram_[w];
      ++lm.context_[prev];
      ++lm.bigram_[{prev, w}];
      ++lm.total_;
      prev = w;
    }
  }
  if (lm.total_ == 0) throw DataError("language_model", "no training words");
  return lm;
}

double BigramLm::probability(const std::string& history, const std::string& word) const {
  double uni = 0.0;
  if (auto it = unigram_.find(word); it != unigram_.end()) uni = static_cast<double>(it->second) / static_cast<double>(total_);
  double uniform = 1.0 / static_cast<double>(unigram_.size() + 1);
  auto ctx = context_.find(history);
  if (ctx == context_.end()) {
    double z = config_.unigram_weight + config_.uniform_weight;
    return (config_.unigram_weight * uni + config_.uniform_weight * uniform) / z;
  }
  double bi = 0.0;
  if (auto it = bigram_.find({history, word}); it != bigram_.end()) {
    bi = static_cast<double>(it->second) / static_cast<double>(ctx->second);
  }
  return config_.bigram_weight * bi + config_.unigram_weight * uni + config_.uniform_weight * uniform;
}

std::vector<long double> BigramLm::word_log_probs(const std::vector<std::string>& words) const {
  std::vector<long double> out;
  out.reserve(words.size());
  std::string prev = kBoundary;
  for (const auto& raw : words) {
    std::string w = text::to_lower(raw);
    out.push_back(std::log(static_cast<long double>(probability(prev, w))));
    prev = std::move(w);
  }
  return out;
}

void BigramLm::save(const fs::path& dir) const {
  fs::create_directories(dir);
  std::string counts;
  for (const auto& [w, c] : unigram_) counts += "1\t" + w + "\t" + std::to_string(c) + "\n";
  for (const auto& [k, c] : bigram_) counts += "2\t" + k.first + "\t" + k.second + "\t" + std::to_string(c) + "\n";
  write_text_file(dir / "counts.tsv", counts);
  write_manifest(dir, "language_model",
                 {{"impl", kind()},
                  {"bigram_weight", config_.bigram_weight},
                  {"unigram_weight", config_.unigram_weight},
                  {"uniform_weight", config_.uniform_weight}},
                 {{"vocab_size", unigram_.size()}, {"tokens", total_}});
}

BigramLm BigramLm::load(const fs::path& dir) {
  Manifest m = read_manifest(dir, "language_model");
  BigramLm lm;
  lm.config_.bigram_weight = m.config.value("bigram_weight", 0.6);
  lm.config_.unigram_weight = m.config.value("unigram_weight", 0.3);
  lm.config_.uniform_weight = m.config.value("uniform_weight", 0.1);
  std::istringstream in(read_text_file(dir / "counts.tsv"));
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string order, a, b, count;
    std::getline(row, order, '\t');
    if (order == "1") {
      std::getline(row, a, '\t');
      std::getline(row, count, '\t');
      long long c = std::stoll(count);
      lm.unigram_[a] = c;
      lm.total_ += c;
    } else if (order == "2") {
      std::getline(row, a, '\t');
      std::getline(row, b, '\t');
      std::getline(row, count, '\t');
      long long c = std::stoll(count);
      lm.bigram_[{a, b}] = c;
      lm.context_[a] += c;
    }
  }
  if (lm.total_ == 0) throw ModelError("language_model", dir.string() + " holds no counts");
  return lm;
}

std::unique_ptr<LanguageModel> load_language_model(const fs::path& dir) {
  Manifest m = read_manifest(dir, "language_model");
  std::string impl = m.config.value("impl", "");
  if (impl == "bigram") return std::make_unique<BigramLm>(BigramLm::load(dir));
  if (impl == "uniform") return std::make_unique<UniformLm>(m.config.value("vocab_size", std::size_t{1}));
  throw ConfigError("language_model", "unknown language model '" + impl + "' in " + dir.string());
}

NllTotal negative_log_likelihood(std::string_view text, const LanguageModel& lm) {
  auto words = text::split_words(text);
  NllTotal t;
  t.words = words.size();
  for (long double lp : lm.word_log_probs(words)) t.nll -= lp;
  return t;
}

double fluency_reward(std::string_view text, const LanguageModel& lm) {
  NllTotal t = negative_log_likelihood(text, lm);
  if (t.words == 0) throw DataError("fluency", "fluency is undefined for empty text");
  return static_cast<double>(std::exp(-t.nll / static_cast<long double>(t.words)));
}

}  // namespace partnerlab

#include "partnerlab/corpus/relevance.hpp"

#include <sstream>

#include "partnerlab/core/checkpoint.hpp"
#include "partnerlab/core/errors.hpp"
#include "partnerlab/core/text.hpp"
#include "partnerlab/core/tokenizer.hpp"

namespace partnerlab {

namespace {
FeatureVector seeker_features(std::string_view text, int bits) {
  FeatureVector f;
  add_ngram_features(f, tokenize(text), "seeker", bits);
  return f;
}
}  // namespace

RelevanceClassifier RelevanceClassifier::train(const std::vector<ConversationPair>& pairs,
                                               const LinearTrainConfig& cfg) {
  std::vector<LabeledFeatures> data;
  int positives = 0;
  for (const auto& p : pairs) {
    if (!p.mental_health) continue;
    data.push_back({seeker_features(p.seeker.text, kHashBits), {*p.mental_health ? 1 : 0}});
    positives += *p.mental_health ? 1 : 0;
  }
  if (data.empty()) throw DataError("relevance", "no pairs carry a mental-health label");
  if (positives == 0 || positives == static_cast<int>(data.size())) {
    throw DataError("relevance", "training data contains a single class");
  }
  RelevanceClassifier c;
  c.model_.fit(data, cfg);
  return c;
}

double RelevanceClassifier::probability(std::string_view seeker_text) const {
  return model_.predict_proba(seeker_features(seeker_text, kHashBits), 0)[1];
}

void RelevanceClassifier::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  model_.save(dir / "weights.bin");
  write_manifest(dir, "relevance_classifier", {{"hash_bits", kHashBits}});
}

RelevanceClassifier RelevanceClassifier::load(const std::filesystem::path& dir) {
  read_manifest(dir, "relevance_classifier");
  RelevanceClassifier c;
  c.model_.load(dir / "weights.bin");
  return c;
}

RelevanceFilter::RelevanceFilter(std::optional<RelevanceClassifier> model, std::vector<std::string> fallback_keywords)
    : model_(std::move(model)) {
  for (auto& k : fallback_keywords) {
    std::string norm = text::to_lower(text::trim(k));
    if (!norm.empty()) keywords_.insert(std::move(norm));
  }
  if (!model_ && keywords_.empty()) {
    throw ConfigError("relevance", "no relevance model and no keyword fallback configured");
  }
}

std::vector<std::string> RelevanceFilter::load_keywords(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    line = text::trim(line);
    if (!line.empty() && line[0] != '#') out.push_back(line);
  }
  return out;
}

bool RelevanceFilter::is_relevant(std::string_view seeker_text) const {
  if (text::trim(seeker_text).empty()) return false;
  if (model_) return model_->predict(seeker_text);
  for (const auto& tok : tokenize(seeker_text)) {
    if (keywords_.count(tok)) return true;
  }
  return false;
}

}  // namespace partnerlab

#include "partnerlab/corpus/datasets.hpp"

#include <cmath>
#include <set>

#include "partnerlab/core/errors.hpp"
#include "partnerlab/core/random.hpp"
#include "partnerlab/corpus/segment.hpp"
#include "partnerlab/scorers/empathy.hpp"

namespace partnerlab {

std::vector<WarmStartExample> build_warmstart_dataset(const std::vector<ConversationPair>& pairs,
                                                      const EmpathyScorer& scorer) {
  std::vector<WarmStartExample> out;
  for (const auto& p : pairs) {
    const auto& sents = p.response.sentences;
    for (std::size_t j = 0; j < sents.size(); ++j) {
      int score = scorer.score(p.seeker, sents[j]).total();
      if (score < kHighEmpathyThreshold) continue;
      std::vector<std::string> rest;
      for (std::size_t i = 0; i < sents.size(); ++i) {
        if (i != j) rest.push_back(sents[i]);
      }
      WarmStartExample ex;
      ex.input = p.seeker.text + " " + std::string(kSplitMarker) + " " + p.response.text;
      ex.target = join_sentences(rest);
      ex.seeker_text = p.seeker.text;
      ex.response_sentences = sents;
      ex.removed_index = j;
      ex.removed_sentence = sents[j];
      ex.removed_score = score;
      out.push_back(std::move(ex));
    }
  }
  return out;
}

std::vector<CoherencePairExample> build_coherence_dataset(const std::vector<ConversationPair>& pairs,
                                                          double negative_ratio, std::uint64_t rng_seed) {
  std::set<std::string> threads;
  for (const auto& p : pairs) threads.insert(p.thread_id);
  if (threads.size() < 2) {
    throw DataError("coherence_dataset", "need at least two threads to draw out-of-thread negatives, found " +
                                             std::to_string(threads.size()));
  }
  if (negative_ratio < 0.0) throw ConfigError("coherence_dataset", "negative_ratio must be non-negative");

  std::vector<CoherencePairExample> out;
  struct Located {
    const std::string* thread;
    const std::string* sentence;
  };
  std::vector<Located> pool;
  for (const auto& p : pairs) {
    const auto& s = p.response.sentences;
    for (std::size_t i = 0; i < s.size(); ++i) {
      pool.push_back({&p.thread_id, &s[i]});
      for (std::size_t j = i + 1; j < s.size(); ++j) {
        out.push_back({s[i], s[j], CoherenceLabel::kCoherent, p.thread_id, p.thread_id});
      }
    }
  }
  const auto positives = out.size();
  const auto negatives = static_cast<std::size_t>(std::llround(negative_ratio * static_cast<double>(positives)));
  if (negatives == 0) return out;

  Rng rng(rng_seed);
  for (std::size_t n = 0; n < negatives; ++n) {
    const Located& anchor = pool[n % pool.size()];
    std::vector<std::size_t> foreign;
    // Rejection sampling first; exhaustive fallback for tiny corpora.
    const Located* pick = nullptr;
    for (int attempt = 0; attempt < 64 && !pick; ++attempt) {
      const Located& c = pool[rng.index(pool.size())];
      if (*c.thread != *anchor.thread) pick = &c;
    }
    if (!pick) {
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (*pool[i].thread != *anchor.thread) foreign.push_back(i);
      }
      if (foreign.empty()) {
        throw DataError("coherence_dataset", "no out-of-thread sentence available for thread " + *anchor.thread);
      }
      pick = &pool[foreign[rng.index(foreign.size())]];
    }
    out.push_back({*pick->sentence, *anchor.sentence, CoherenceLabel::kIncoherent, *pick->thread, *anchor.thread});
  }
  return out;
}

nlohmann::json to_json(const WarmStartExample& ex) {
  return {{"input", ex.input},
          {"target", ex.target},
          {"seeker_text", ex.seeker_text},
          {"response_sentences", ex.response_sentences},
          {"removed_index", ex.removed_index},
          {"removed_sentence", ex.removed_sentence},
          {"removed_score", ex.removed_score}};
}

WarmStartExample warmstart_from_json(const nlohmann::json& j) {
  WarmStartExample ex;
  ex.input = j.at("input").get<std::string>();
  ex.target = j.at("target").get<std::string>();
  ex.seeker_text = j.at("seeker_text").get<std::string>();
  ex.response_sentences = j.at("response_sentences").get<std::vector<std::string>>();
  ex.removed_index = j.at("removed_index").get<std::size_t>();
  ex.removed_sentence = j.at("removed_sentence").get<std::string>();
  ex.removed_score = j.value("removed_score", 0);
  if (ex.removed_index >= ex.response_sentences.size()) {
    throw DataError("warmstart", "removed_index out of range");
  }
  return ex;
}

nlohmann::json to_json(const CoherencePairExample& ex) {
  return {{"sentence_a", ex.sentence_a},
          {"sentence_b", ex.sentence_b},
          {"label", ex.label == CoherenceLabel::kCoherent ? "coherent" : "incoherent"},
          {"thread_a", ex.thread_a},
          {"thread_b", ex.thread_b}};
}

CoherencePairExample coherence_from_json(const nlohmann::json& j) {
  CoherencePairExample ex;
  ex.sentence_a = j.at("sentence_a").get<std::string>();
  ex.sentence_b = j.at("sentence_b").get<std::string>();
  std::string label = j.at("label").get<std::string>();
  if (label != "coherent" && label != "incoherent") throw DataError("coherence_dataset", "bad label " + label);
  ex.label = label == "coherent" ? CoherenceLabel::kCoherent : CoherenceLabel::kIncoherent;
  ex.thread_a = j.value("thread_a", "");
  ex.thread_b = j.value("thread_b", "");
  return ex;
}

}  // namespace partnerlab

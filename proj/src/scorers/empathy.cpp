#include "partnerlab/scorers/empathy.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "partnerlab/core/checkpoint.hpp"
#include "partnerlab/core/errors.hpp"
#include "partnerlab/core/text.hpp"
#include "partnerlab/core/tokenizer.hpp"

namespace fs = std::filesystem;

namespace partnerlab {

int level_of(const EmpathyScore& s, Mechanism m) {
  switch (m) {
    case Mechanism::kEmotionalReaction: return s.emotional_reaction;
    case Mechanism::kInterpretation: return s.interpretation;
    case Mechanism::kExploration: return s.exploration;
  }
  return 0;
}

void set_level(EmpathyScore& s, Mechanism m, int level) {
  switch (m) {
    case Mechanism::kEmotionalReaction: s.emotional_reaction = level; break;
    case Mechanism::kInterpretation: s.interpretation = level; break;
    case Mechanism::kExploration: s.exploration = level; break;
  }
}

namespace {

bool contains_sequence(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > hay.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

std::vector<std::string> read_phrase_file(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    line = text::trim(line);
    if (!line.empty() && line[0] != '#') out.push_back(line);
  }
  return out;
}

}  // namespace

LexiconOracle::LexiconOracle(PhraseLists phrases) : raw_(std::move(phrases)) {
  for (int m = 0; m < 3; ++m) {
    for (int l = 0; l < 2; ++l) {
      for (const auto& p : raw_[m][l]) {
        auto toks = tokenize(p);
        if (!toks.empty()) tokenized_[m][l].push_back(std::move(toks));
      }
    }
  }
}

LexiconOracle LexiconOracle::load(const fs::path& dir) {
  PhraseLists lists;
  for (int m = 0; m < 3; ++m) {
    for (int l = 0; l < 2; ++l) {
      fs::path p = dir / (std::string(kMechanismKeys[static_cast<size_t>(m)]) + "_" + std::to_string(l + 1) + ".txt");
      if (!fs::exists(p)) throw ConfigError("empathy", "lexicon oracle requires phrase list " + p.string());
      lists[m][l] = read_phrase_file(p);
    }
  }
  return LexiconOracle(std::move(lists));
}

void LexiconOracle::save(const fs::path& dir) const {
  fs::create_directories(dir);
  for (int m = 0; m < 3; ++m) {
    for (int l = 0; l < 2; ++l) {
      std::string content;
      for (const auto& p : raw_[m][l]) content += p + "\n";
      write_text_file(dir / (std::string(kMechanismKeys[static_cast<size_t>(m)]) + "_" + std::to_string(l + 1) + ".txt"),
                      content);
    }
  }
  write_manifest(dir, "empathy_scorer", {{"impl", kind()}});
}

EmpathyScore LexiconOracle::score_text(std::string_view response_text) const {
  EmpathyScore s;
  auto toks = tokenize(response_text);
  if (toks.empty()) return s;
  for (int m = 0; m < 3; ++m) {
    int level = 0;
    for (int l = 1; l >= 0 && level == 0; --l) {
      for (const auto& phrase : tokenized_[m][l]) {
        if (contains_sequence(toks, phrase)) {
          level = l + 1;
          break;
        }
      }
    }
    set_level(s, static_cast<Mechanism>(m), level);
  }
  return s;
}

EmpathyScore LexiconOracle::score(const SeekerPost&, std::string_view response_text) const {
  return score_text(response_text);
}

TrainedEmpathyScorer::TrainedEmpathyScorer(int hash_bits) : bits_(hash_bits), model_(3, 3, hash_bits) {}

FeatureVector TrainedEmpathyScorer::features(std::string_view response_text) const {
  FeatureVector f;
  add_ngram_features(f, tokenize(response_text), "response", bits_);
  return f;
}

EmpathyScore TrainedEmpathyScorer::score(const SeekerPost&, std::string_view response_text) const {
  EmpathyScore s;
  if (text::trim(response_text).empty()) return s;
  auto f = features(response_text);
  for (int m = 0; m < 3; ++m) set_level(s, static_cast<Mechanism>(m), model_.predict(f, m));
  return s;
}

void TrainedEmpathyScorer::save(const fs::path& dir) const {
  fs::create_directories(dir);
  model_.save(dir / "weights.bin");
  write_manifest(dir, "empathy_scorer", {{"impl", kind()}, {"hash_bits", bits_}},
                 {{"train_accuracy", metrics_.train_accuracy},
                  {"heldout_accuracy", metrics_.heldout_accuracy},
                  {"heldout_exact_match", metrics_.heldout_exact_match},
                  {"train_size", metrics_.train_size},
                  {"heldout_size", metrics_.heldout_size}});
}

TrainedEmpathyScorer TrainedEmpathyScorer::load(const fs::path& dir) {
  Manifest m = read_manifest(dir, "empathy_scorer");
  TrainedEmpathyScorer s(m.config.value("hash_bits", 16));
  s.model_.load(dir / "weights.bin");
  s.metrics_.train_accuracy = m.metrics.value("train_accuracy", 0.0);
  s.metrics_.heldout_accuracy = m.metrics.value("heldout_accuracy", 0.0);
  s.metrics_.heldout_exact_match = m.metrics.value("heldout_exact_match", 0.0);
  return s;
}

TrainedEmpathyScorer train_empathy_classifier(const std::vector<ConversationPair>& pairs,
                                              const EmpathyTrainConfig& config) {
  std::vector<const ConversationPair*> labeled;
  for (const auto& p : pairs) {
    if (p.empathy_label) labeled.push_back(&p);
  }
  if (labeled.size() < std::max<std::size_t>(config.min_examples, 2)) {
    throw DataError("empathy", "insufficient labeled data: " + std::to_string(labeled.size()) + " examples, need " +
                                   std::to_string(std::max<std::size_t>(config.min_examples, 2)));
  }
  bool any_variation = false;
  for (int m = 0; m < 3 && !any_variation; ++m) {
    int first = level_of(*labeled.front()->empathy_label, static_cast<Mechanism>(m));
    for (auto* p : labeled) any_variation |= level_of(*p->empathy_label, static_cast<Mechanism>(m)) != first;
  }
  if (!any_variation) throw DataError("empathy", "degenerate data: every example carries the same label");

  Rng rng(config.linear.seed);
  std::vector<std::size_t> order(labeled.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  auto n_holdout = static_cast<std::size_t>(config.holdout_fraction * static_cast<double>(labeled.size()));
  n_holdout = std::min(n_holdout, labeled.size() - 1);

  TrainedEmpathyScorer scorer(config.hash_bits);
  auto make = [&](const ConversationPair& p) {
    const auto& l = *p.empathy_label;
    return LabeledFeatures{scorer.features(p.response.text), {l.emotional_reaction, l.interpretation, l.exploration}};
  };
  std::vector<LabeledFeatures> train, held;
  for (std::size_t i = 0; i < order.size(); ++i) (i < n_holdout ? held : train).push_back(make(*labeled[order[i]]));
  scorer.model_.fit(train, config.linear);

  auto evaluate = [&](const std::vector<LabeledFeatures>& set, double& per_mech, double* exact) {
    if (set.empty()) return;
    double hits = 0.0, all = 0.0;
    for (const auto& ex : set) {
      bool every = true;
      for (int m = 0; m < 3; ++m) {
        bool ok = scorer.model_.predict(ex.features, m) == ex.labels[static_cast<size_t>(m)];
        hits += ok;
        every &= ok;
      }
      all += every;
    }
    per_mech = hits / (3.0 * static_cast<double>(set.size()));
    if (exact) *exact = all / static_cast<double>(set.size());
  };
  evaluate(train, scorer.metrics_.train_accuracy, nullptr);
  evaluate(held, scorer.metrics_.heldout_accuracy, &scorer.metrics_.heldout_exact_match);
  scorer.metrics_.train_size = train.size();
  scorer.metrics_.heldout_size = held.size();
  if (!held.empty() && scorer.metrics_.heldout_accuracy < config.accuracy_floor) {
    throw ModelError("empathy", "held-out accuracy " + std::to_string(scorer.metrics_.heldout_accuracy) +
                                    " is below the configured floor " + std::to_string(config.accuracy_floor));
  }
  return scorer;
}

std::unique_ptr<EmpathyScorer> load_empathy_scorer(const fs::path& dir) {
  Manifest m = read_manifest(dir, "empathy_scorer");
  std::string impl = m.config.value("impl", "");
  if (impl == "lexicon_oracle") return std::make_unique<LexiconOracle>(LexiconOracle::load(dir));
  if (impl == "trained_classifier") return std::make_unique<TrainedEmpathyScorer>(TrainedEmpathyScorer::load(dir));
  throw ConfigError("empathy", "unknown empathy scorer implementation '" + impl + "' in " + dir.string());
}

double change_in_empathy(const EmpathyScorer& scorer, const SeekerPost& seeker, std::string_view original,
                         std::string_view rewritten) {
  return static_cast<double>(scorer.score(seeker, rewritten).total() - scorer.score(seeker, original).total());
}

}  // namespace partnerlab

#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "partnerlab/core/linear_classifier.hpp"
#include "partnerlab/corpus/types.hpp"

namespace partnerlab {

enum class Mechanism { kEmotionalReaction = 0, kInterpretation = 1, kExploration = 2 };

inline constexpr std::array<const char*, 3> kMechanismKeys = {"er", "ip", "ex"};

int level_of(const EmpathyScore& s, Mechanism m);
void set_level(EmpathyScore& s, Mechanism m, int level);

// f_e: maps (seeker post, response text) to per-mechanism empathy levels.
// Implementations are immutable after construction and safe to share across
// threads.
class EmpathyScorer {
 public:
  virtual ~EmpathyScorer() = default;
  virtual EmpathyScore score(const SeekerPost& seeker, std::string_view response_text) const = 0;
  virtual std::string kind() const = 0;
  virtual void save(const std::filesystem::path& dir) const = 0;
};

// Deterministic phrase-list scorer. Each mechanism has a weak (level 1) and
// a strong (level 2) phrase list; a mechanism's level is the highest level of
// any phrase found in the response. Phrases match as whole token sequences,
// case-insensitively.
class LexiconOracle final : public EmpathyScorer {
 public:
  using PhraseLists = std::array<std::array<std::vector<std::string>, 2>, 3>;  // [mechanism][level-1]

  explicit LexiconOracle(PhraseLists phrases);

  // Reads <dir>/{er,ip,ex}_{1,2}.txt; one phrase per line, `#` comments.
  static LexiconOracle load(const std::filesystem::path& dir);

  EmpathyScore score(const SeekerPost& seeker, std::string_view response_text) const override;
  EmpathyScore score_text(std::string_view response_text) const;
  std::string kind() const override { return "lexicon_oracle"; }
  void save(const std::filesystem::path& dir) const override;

  const PhraseLists& phrases() const { return raw_; }

 private:
  PhraseLists raw_;
  std::array<std::array<std::vector<std::vector<std::string>>, 2>, 3> tokenized_;
};

struct EmpathyTrainConfig {
  std::size_t min_examples = 20;
  double holdout_fraction = 0.2;
  double accuracy_floor = 0.0;  // held-out accuracy below this is an error
  int hash_bits = 16;
  LinearTrainConfig linear;
};

struct ClassifierMetrics {
  double train_accuracy = 0.0;
  double heldout_accuracy = 0.0;       // mean per-mechanism accuracy
  double heldout_exact_match = 0.0;    // all three levels correct
  std::size_t train_size = 0;
  std::size_t heldout_size = 0;
};

// Small trainable scorer: one multinomial logistic-regression head per
// mechanism over hashed unigrams and bigrams of the response. Returns the
// argmax level per mechanism.
class TrainedEmpathyScorer final : public EmpathyScorer {
 public:
  explicit TrainedEmpathyScorer(int hash_bits = 16);

  EmpathyScore score(const SeekerPost& seeker, std::string_view response_text) const override;
  std::string kind() const override { return "trained_classifier"; }
  void save(const std::filesystem::path& dir) const override;
  static TrainedEmpathyScorer load(const std::filesystem::path& dir);

  const ClassifierMetrics& metrics() const { return metrics_; }

  friend TrainedEmpathyScorer train_empathy_classifier(const std::vector<ConversationPair>&,
                                                       const EmpathyTrainConfig&);

 private:
  FeatureVector features(std::string_view response_text) const;

  int bits_;
  LinearClassifier model_;
  ClassifierMetrics metrics_;
};

// Trains on pairs with empathy labels, holding out a seeded split for the
// reported metrics. Throws DataError on too little data or when every label
// of every mechanism is the same class; ModelError if held-out accuracy is
// below the configured floor.
TrainedEmpathyScorer train_empathy_classifier(const std::vector<ConversationPair>& pairs,
                                              const EmpathyTrainConfig& config = {});

// Loads whichever scorer a checkpoint directory holds.
std::unique_ptr<EmpathyScorer> load_empathy_scorer(const std::filesystem::path& dir);

// r_e = f_e(rewritten).total - f_e(original).total, in [-6, 6].
double change_in_empathy(const EmpathyScorer& scorer, const SeekerPost& seeker, std::string_view original,
                         std::string_view rewritten);

}  // namespace partnerlab

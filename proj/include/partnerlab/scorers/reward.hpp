#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "partnerlab/corpus/types.hpp"
#include "partnerlab/scorers/coherence.hpp"
#include "partnerlab/scorers/empathy.hpp"
#include "partnerlab/scorers/language_model.hpp"
#include "partnerlab/scorers/mutual_information.hpp"

namespace partnerlab {

struct RewardWeights {
  double w_e = 1.0;
  double w_f = 10.0;
  double w_c = 0.1;
  double w_m = 0.1;
  double lambda_mi = 0.5;
};

struct RewardBreakdown {
  double r_e = 0.0;
  double r_f = 0.0;
  double r_c = 0.0;
  double r_m = 0.0;
  double total = 0.0;
};

// r = w_e r_e + w_f r_f + w_c r_c + w_m r_m, keeping the components.
RewardBreakdown total_reward(double r_e, double r_f, double r_c, double r_m, const RewardWeights& weights);

nlohmann::json to_json(const RewardBreakdown& r);
nlohmann::json to_json(const EmpathyScore& s);

// Bundles the four reward models. Holds non-owning references; the models
// must outlive it and are only read, so one RewardModel can be shared by
// concurrent callers.
class RewardModel {
 public:
  RewardModel(const EmpathyScorer& empathy, const LanguageModel& fluency_lm, const CoherenceModel& coherence,
              const SequenceScorer& forward, const SequenceScorer& backward, RewardWeights weights)
      : empathy_(empathy),
        fluency_lm_(fluency_lm),
        coherence_(coherence),
        forward_(forward),
        backward_(backward),
        weights_(weights) {}

  // Reward of a provisional rewrite. r_e compares against the original
  // response; r_c scores `candidate` against the pre-edit window (1.0 when
  // there is no candidate, as for stop or deletion). Throws DataError if the
  // rewritten response is empty (fluency is undefined).
  RewardBreakdown evaluate(const SeekerPost& seeker, const std::string& original_text,
                           const std::string& rewritten_text, const std::optional<std::string>& candidate,
                           const std::vector<std::string>& window) const;

  const EmpathyScorer& empathy() const { return empathy_; }
  const LanguageModel& fluency_lm() const { return fluency_lm_; }
  const CoherenceModel& coherence() const { return coherence_; }
  const RewardWeights& weights() const { return weights_; }

 private:
  const EmpathyScorer& empathy_;
  const LanguageModel& fluency_lm_;
  const CoherenceModel& coherence_;
  const SequenceScorer& forward_;
  const SequenceScorer& backward_;
  RewardWeights weights_;
};

}  // namespace partnerlab

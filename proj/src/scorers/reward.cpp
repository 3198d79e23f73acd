#include "partnerlab/scorers/reward.hpp"

namespace partnerlab {

RewardBreakdown total_reward(double r_e, double r_f, double r_c, double r_m, const RewardWeights& w) {
  RewardBreakdown r{r_e, r_f, r_c, r_m, 0.0};
  r.total = w.w_e * r_e + w.w_f * r_f + w.w_c * r_c + w.w_m * r_m;
  return r;
}

nlohmann::json to_json(const RewardBreakdown& r) {
  return {{"r_e", r.r_e}, {"r_f", r.r_f}, {"r_c", r.r_c}, {"r_m", r.r_m}, {"total", r.total}};
}

nlohmann::json to_json(const EmpathyScore& s) {
  return {{"emotional_reaction", s.emotional_reaction},
          {"interpretation", s.interpretation},
          {"exploration", s.exploration},
          {"total", s.total()}};
}

RewardBreakdown RewardModel::evaluate(const SeekerPost& seeker, const std::string& original_text,
                                      const std::string& rewritten_text, const std::optional<std::string>& candidate,
                                      const std::vector<std::string>& window) const {
  double r_f = fluency_reward(rewritten_text, fluency_lm_);
  double r_e = change_in_empathy(empathy_, seeker, original_text, rewritten_text);
  double r_c = candidate && !candidate->empty() ? coherence_reward(*candidate, window, coherence_) : 1.0;
  double r_m = mutual_information_reward(seeker.text, rewritten_text, forward_, backward_, weights_.lambda_mi);
  return total_reward(r_e, r_f, r_c, r_m, weights_);
}

}  // namespace partnerlab

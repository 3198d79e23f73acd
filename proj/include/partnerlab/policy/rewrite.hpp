#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "partnerlab/corpus/safety.hpp"
#include "partnerlab/corpus/types.hpp"
#include "partnerlab/policy/policy.hpp"
#include "partnerlab/scorers/reward.hpp"

namespace partnerlab {

enum class StopReason { kNone, kStopAction, kMaxSteps, kWindowsExhausted };

const char* stop_reason_name(StopReason r);

struct RewriteConfig {
  int k = 2;
  double nucleus_p = 0.92;
  int max_steps = 4;
  int candidate_cap = kDefaultCandidateCap;
  bool sample_positions = false;  // false: argmax with lowest-index ties
  std::string window_schedule = "stride";
  int max_post_tokens = kDefaultMaxPostTokens;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TraceStep {
  RewriteState state;
  EditAction action;
  std::vector<TokenId> candidate_tokens;
  double position_prob = 0.0;
  bool candidate_truncated = false;
  std::string unsafe_category;  // non-empty when a generated candidate was suppressed
  std::vector<std::string> sentences_after;
  std::optional<RewardBreakdown> reward;
  std::string reward_error;  // set when scoring the provisional response failed
};

struct RewriteTrace {
  ResponsePost original;
  std::vector<TraceStep> steps;
  ResponsePost final;
  StopReason stopped_by = StopReason::kNone;

  std::vector<EditAction> actions() const;
  bool flagged_unsafe() const;
};

// Window bookkeeping of one episode. Windows advance left to right with
// stride k; after an edit the next window starts k sentences later, shifted
// by the change in sentence count. A stop action ends the episode. An empty
// response gets a single window over the empty list.
class Episode {
 public:
  Episode(std::vector<std::string> sentences, int k, int max_steps);

  bool done() const { return reason_ != StopReason::kNone; }
  StopReason reason() const { return reason_; }
  const std::vector<std::string>& sentences() const { return sentences_; }
  std::size_t window_start() const { return j_; }
  int steps() const { return steps_; }

  // Applies an edit at the current window and advances. Throws DataError when
  // the episode is already over or the edit addresses a missing position.
  void advance(const EditAction& action);

 private:
  void check_end();

  std::vector<std::string> sentences_;
  int k_;
  int max_steps_;
  std::size_t j_ = 0;
  int steps_ = 0;
  StopReason reason_ = StopReason::kNone;
};

// Proposes the next edit for an episode without applying it. Sampling uses a
// generator derived from (seed, step), so the proposal at a given step does
// not depend on how earlier steps were produced. Unsafe candidates turn the
// proposal into a flagged stop. Rewards are filled when `rewards` is set.
TraceStep propose_step(const Episode& episode, const SeekerPost& seeker, const std::string& original_text,
                       const RewritePolicy& policy, const Vocabulary& vocab, const RewriteConfig& config,
                       const RewardModel* rewards = nullptr, const SafetyFilter* safety = nullptr);

// Runs a full episode.
RewriteTrace rewrite(const SeekerPost& seeker, const ResponsePost& response, const RewritePolicy& policy,
                     const RewriteConfig& config, const RewardModel* rewards = nullptr,
                     const SafetyFilter* safety = nullptr);

// Replays actions from the original sentences with the same window schedule.
std::vector<std::string> replay(const std::vector<std::string>& original, const std::vector<EditAction>& actions,
                                int k, int max_steps);

nlohmann::json to_json(const RewriteTrace& trace);

// Vocabulary used to encode states for a policy (empty for scripted ones).
const Vocabulary& policy_vocabulary(const RewritePolicy& policy);

}  // namespace partnerlab

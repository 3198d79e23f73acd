#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "partnerlab/corpus/safety.hpp"
#include "partnerlab/corpus/types.hpp"
#include "partnerlab/policy/policy.hpp"
#include "partnerlab/scorers/reward.hpp"
#include "partnerlab/training/config.hpp"
#include "partnerlab/training/reinforce.hpp"

namespace partnerlab {

// Supervised view of a warm-start example: the state holds the response
// with the high-empathy sentence removed, and the targets are the insert
// position that restores it and the sentence itself.
PolicySample warmstart_sample(const NeuralPolicy& policy, const WarmStartExample& example);

struct WarmStartReport {
  double initial_heldout_loss = 0.0;
  double final_heldout_loss = 0.0;
  double final_train_loss = 0.0;
  std::size_t train_size = 0;
  std::size_t heldout_size = 0;
  int steps = 0;

  nlohmann::json to_json() const;
};

// Mean of -(log p_pos + log p_sent) over the samples.
double supervised_loss(const NeuralPolicy& policy, const std::vector<PolicySample>& samples);

// Maximizes log p_pos + log p_sent on the examples with Adam. A seeded split
// is held out for the reported losses (when the set has a single example it
// is used for both). Throws DataError on an empty set and ModelError on a
// non-finite loss.
WarmStartReport warm_start_finetune(NeuralPolicy& policy, const std::vector<WarmStartExample>& examples,
                                    const WarmStartConfig& config);

struct RlLogRecord {
  int step = 0;
  double loss = 0.0;
  double reward_mean = 0.0;
  double r_e = 0.0;
  double r_f = 0.0;
  double r_c = 0.0;
  double r_m = 0.0;
  double baseline = 0.0;
  std::size_t samples = 0;
  std::size_t skipped = 0;

  nlohmann::json to_json() const;
};

struct RlReport {
  std::vector<RlLogRecord> log;
  std::size_t samples = 0;
  std::size_t skipped = 0;
  std::size_t skipped_updates = 0;

  nlohmann::json to_json() const;
};

using RlLogSink = std::function<void(const RlLogRecord&)>;
using CheckpointSink = std::function<void(int step, const NeuralPolicy&)>;

// REINFORCE with a running-mean baseline. Each step rolls out batch_size
// episodes with sampled positions on pairs drawn from a seeded shuffle of the
// corpus, scores every edit with the reward model and takes one optimizer
// step. Samples whose reward cannot be computed are skipped; if more than
// max_skip_rate of them fail (after min_samples_for_abort samples), training
// aborts with ModelError. Unsafe candidates become stop actions.
RlReport train_rl(NeuralPolicy& policy, const std::vector<ConversationPair>& corpus, const RewardModel& rewards,
                  const TrainConfig& config, const SafetyFilter* safety = nullptr, const RlLogSink& on_step = {},
                  const CheckpointSink& on_checkpoint = {});

}  // namespace partnerlab

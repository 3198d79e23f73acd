#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "partnerlab/core/config.hpp"
#include "partnerlab/policy/policy.hpp"
#include "partnerlab/scorers/reward.hpp"

namespace partnerlab {

enum class RewardMode { kPerStep, kEpisodeFinal };

struct TrainConfig {
  int batch_size = 16;
  int steps = 20000;
  double learning_rate = 1e-5;
  int k = 2;
  double nucleus_p = 0.92;
  RewardWeights weights;
  int baseline_window = 100;
  std::uint64_t seed = 0;
  RewardMode reward_mode = RewardMode::kPerStep;

  int max_steps = 4;  // edits per episode
  int candidate_cap = kDefaultCandidateCap;
  double clip_norm = 1.0;
  int checkpoint_every = 0;  // 0 writes only the final checkpoint
  double max_skip_rate = 0.1;
  int min_samples_for_abort = 50;

  // Smaller, faster settings for a single CPU: batch 8, 300 steps.
  static TrainConfig desk_profile();

  // Reads keys under the given config (batch_size, steps, learning_rate, k,
  // nucleus_p, baseline_window, seed, reward_mode, max_steps, candidate_cap,
  // clip_norm, checkpoint_every, max_skip_rate, weights.{w_e,w_f,w_c,w_m,
  // lambda_mi}) on top of `base`.
  static TrainConfig from_config(const KeyValueConfig& cfg, TrainConfig base);

  void validate() const;
  nlohmann::json to_json() const;
};

struct WarmStartConfig {
  int steps = 200;
  int batch_size = 16;
  double learning_rate = 1e-2;
  double holdout_fraction = 0.2;
  double clip_norm = 1.0;
  std::uint64_t seed = 0;

  static WarmStartConfig from_config(const KeyValueConfig& cfg, WarmStartConfig base);
  nlohmann::json to_json() const;
};

PolicyArch policy_arch_from_config(const KeyValueConfig& cfg, PolicyArch base);

const char* reward_mode_name(RewardMode m);
RewardMode parse_reward_mode(const std::string& name);

}  // namespace partnerlab

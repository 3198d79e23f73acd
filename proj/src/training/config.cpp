#include "partnerlab/training/config.hpp"

#include "partnerlab/core/errors.hpp"

namespace partnerlab {

const char* reward_mode_name(RewardMode m) { return m == RewardMode::kPerStep ? "per_step" : "episode_final"; }

RewardMode parse_reward_mode(const std::string& name) {
  if (name == "per_step") return RewardMode::kPerStep;
  if (name == "episode_final") return RewardMode::kEpisodeFinal;
  throw ConfigError("training", "unknown reward_mode '" + name + "' (expected per_step or episode_final)");
}

TrainConfig TrainConfig::desk_profile() {
  TrainConfig c;
  c.batch_size = 8;
  c.steps = 300;
  c.learning_rate = 3e-4;
  return c;
}

TrainConfig TrainConfig::from_config(const KeyValueConfig& cfg, TrainConfig c) {
  c.batch_size = static_cast<int>(cfg.get_int("batch_size", c.batch_size));
  c.steps = static_cast<int>(cfg.get_int("steps", c.steps));
  c.learning_rate = cfg.get_double("learning_rate", c.learning_rate);
  c.k = static_cast<int>(cfg.get_int("k", c.k));
  c.nucleus_p = cfg.get_double("nucleus_p", c.nucleus_p);
  c.baseline_window = static_cast<int>(cfg.get_int("baseline_window", c.baseline_window));
  c.seed = static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<long long>(c.seed)));
  c.reward_mode = parse_reward_mode(cfg.get_string("reward_mode", reward_mode_name(c.reward_mode)));
  c.max_steps = static_cast<int>(cfg.get_int("max_steps", c.max_steps));
  c.candidate_cap = static_cast<int>(cfg.get_int("candidate_cap", c.candidate_cap));
  c.clip_norm = cfg.get_double("clip_norm", c.clip_norm);
  c.checkpoint_every = static_cast<int>(cfg.get_int("checkpoint_every", c.checkpoint_every));
  c.max_skip_rate = cfg.get_double("max_skip_rate", c.max_skip_rate);
  c.weights.w_e = cfg.get_double("weights.w_e", c.weights.w_e);
  c.weights.w_f = cfg.get_double("weights.w_f", c.weights.w_f);
  c.weights.w_c = cfg.get_double("weights.w_c", c.weights.w_c);
  c.weights.w_m = cfg.get_double("weights.w_m", c.weights.w_m);
  c.weights.lambda_mi = cfg.get_double("weights.lambda_mi", c.weights.lambda_mi);
  c.validate();
  return c;
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("training", "batch_size must be >= 1");
  if (steps < 0) throw ConfigError("training", "steps must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("training", "learning_rate must be positive");
  if (k < 1) throw ConfigError("training", "k must be >= 1");
  if (!(nucleus_p > 0.0 && nucleus_p <= 1.0)) throw ConfigError("training", "nucleus_p must lie in (0, 1]");
  if (baseline_window < 1) throw ConfigError("training", "baseline_window must be >= 1");
  if (max_steps < 0) throw ConfigError("training", "max_steps must be >= 0");
  if (weights.w_e < 0 || weights.w_f < 0 || weights.w_c < 0 || weights.w_m < 0) {
    throw ConfigError("training", "reward weights must be non-negative");
  }
  if (weights.lambda_mi < 0.0 || weights.lambda_mi > 1.0) throw ConfigError("training", "lambda_mi must lie in [0, 1]");
  if (max_skip_rate < 0.0 || max_skip_rate > 1.0) throw ConfigError("training", "max_skip_rate must lie in [0, 1]");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"batch_size", batch_size},
          {"steps", steps},
          {"learning_rate", learning_rate},
          {"k", k},
          {"nucleus_p", nucleus_p},
          {"baseline_window", baseline_window},
          {"seed", seed},
          {"reward_mode", reward_mode_name(reward_mode)},
          {"max_steps", max_steps},
          {"candidate_cap", candidate_cap},
          {"clip_norm", clip_norm},
          {"max_skip_rate", max_skip_rate},
          {"weights",
           {{"w_e", weights.w_e},
            {"w_f", weights.w_f},
            {"w_c", weights.w_c},
            {"w_m", weights.w_m},
            {"lambda_mi", weights.lambda_mi}}}};
}

WarmStartConfig WarmStartConfig::from_config(const KeyValueConfig& cfg, WarmStartConfig c) {
  c.steps = static_cast<int>(cfg.get_int("steps", c.steps));
  c.batch_size = static_cast<int>(cfg.get_int("batch_size", c.batch_size));
  c.learning_rate = cfg.get_double("learning_rate", c.learning_rate);
  c.holdout_fraction = cfg.get_double("holdout_fraction", c.holdout_fraction);
  c.clip_norm = cfg.get_double("clip_norm", c.clip_norm);
  c.seed = static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<long long>(c.seed)));
  if (c.steps < 0) throw ConfigError("warm_start", "steps must be >= 0");
  if (c.batch_size < 1) throw ConfigError("warm_start", "batch_size must be >= 1");
  if (c.holdout_fraction < 0.0 || c.holdout_fraction >= 1.0) {
    throw ConfigError("warm_start", "holdout_fraction must lie in [0, 1)");
  }
  return c;
}

nlohmann::json WarmStartConfig::to_json() const {
  return {{"steps", steps},
          {"batch_size", batch_size},
          {"learning_rate", learning_rate},
          {"holdout_fraction", holdout_fraction},
          {"clip_norm", clip_norm},
          {"seed", seed}};
}

PolicyArch policy_arch_from_config(const KeyValueConfig& cfg, PolicyArch a) {
  a.k = static_cast<int>(cfg.get_int("k", a.k));
  a.embed_dim = static_cast<int>(cfg.get_int("embed_dim", a.embed_dim));
  a.hidden_dim = static_cast<int>(cfg.get_int("hidden_dim", a.hidden_dim));
  a.decoder_hidden = static_cast<int>(cfg.get_int("decoder_hidden", a.decoder_hidden));
  a.max_post_tokens = static_cast<int>(cfg.get_int("max_post_tokens", a.max_post_tokens));
  return a;
}

}  // namespace partnerlab

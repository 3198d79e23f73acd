#include "partnerlab/training/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "partnerlab/core/errors.hpp"
#include "partnerlab/core/random.hpp"
#include "partnerlab/corpus/segment.hpp"
#include "partnerlab/policy/rewrite.hpp"

namespace partnerlab {

PolicySample warmstart_sample(const NeuralPolicy& policy, const WarmStartExample& example) {
  const int k = policy.arch().k;
  std::vector<std::string> reduced;
  for (std::size_t i = 0; i < example.response_sentences.size(); ++i) {
    if (i != example.removed_index) reduced.push_back(example.response_sentences[i]);
  }
  const std::size_t m = example.removed_index;
  const std::size_t n = reduced.size();
  const std::size_t uk = static_cast<std::size_t>(k);
  const std::size_t last_start = n == 0 ? 0 : ((n - 1) / uk) * uk;
  const std::size_t j = std::min((m / uk) * uk, last_start);

  SeekerPost seeker;
  seeker.text = example.seeker_text;
  PolicySample s;
  s.state = encode_state(seeker, reduced, j, k, policy.vocab(), policy.arch().max_post_tokens);
  s.action_index = insert_action(static_cast<int>(m - j), k).index;
  s.tokens = policy.target_tokens(example.removed_sentence);
  return s;
}

nlohmann::json WarmStartReport::to_json() const {
  return {{"initial_heldout_loss", initial_heldout_loss},
          {"final_heldout_loss", final_heldout_loss},
          {"final_train_loss", final_train_loss},
          {"train_size", train_size},
          {"heldout_size", heldout_size},
          {"steps", steps}};
}

double supervised_loss(const NeuralPolicy& policy, const std::vector<PolicySample>& samples) {
  if (samples.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : samples) total -= policy.log_prob(policy.params(), s.state, s.action_index, s.tokens);
  return total / static_cast<double>(samples.size());
}

WarmStartReport warm_start_finetune(NeuralPolicy& policy, const std::vector<WarmStartExample>& examples,
                                    const WarmStartConfig& config) {
  if (examples.empty()) throw DataError("warm_start", "warm-start dataset is empty");
  std::vector<PolicySample> all;
  all.reserve(examples.size());
  for (const auto& e : examples) all.push_back(warmstart_sample(policy, e));

  Rng rng(config.seed);
  std::vector<std::size_t> order(all.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  auto n_hold = static_cast<std::size_t>(std::llround(config.holdout_fraction * static_cast<double>(all.size())));
  if (all.size() > 1) n_hold = std::clamp<std::size_t>(n_hold, 1, all.size() - 1);
  else n_hold = 0;
  std::vector<PolicySample> train, held;
  for (std::size_t i = 0; i < order.size(); ++i) (i < n_hold ? held : train).push_back(all[order[i]]);
  if (held.empty()) held = train;

  WarmStartReport report;
  report.train_size = train.size();
  report.heldout_size = held.size();
  report.initial_heldout_loss = supervised_loss(policy, held);

  nn::Adam adam(config.learning_rate);
  std::vector<std::size_t> cursor(train.size());
  for (std::size_t i = 0; i < cursor.size(); ++i) cursor[i] = i;
  std::size_t pos = cursor.size();
  for (int step = 0; step < config.steps; ++step) {
    nn::Vector grad = nn::Vector::Zero(static_cast<Eigen::Index>(policy.num_params()));
    double loss = 0.0;
    const int b = std::min<int>(config.batch_size, static_cast<int>(train.size()));
    for (int i = 0; i < b; ++i) {
      if (pos == cursor.size()) {
        rng.shuffle(cursor);
        pos = 0;
      }
      const auto& s = train[cursor[pos++]];
      loss -= policy.accumulate_grad(policy.params(), s.state, s.action_index, s.tokens, -1.0 / b, grad) / b;
    }
    if (!std::isfinite(loss) || !grad.allFinite()) {
      throw ModelError("warm_start", "non-finite loss at step " + std::to_string(step));
    }
    if (config.clip_norm > 0.0) nn::clip_global_norm(grad, config.clip_norm);
    adam.step(policy.params(), grad);
    report.steps = step + 1;
  }
  report.final_heldout_loss = supervised_loss(policy, held);
  report.final_train_loss = supervised_loss(policy, train);
  if (!std::isfinite(report.final_heldout_loss)) throw ModelError("warm_start", "non-finite held-out loss");
  return report;
}

nlohmann::json RlLogRecord::to_json() const {
  return {{"step", step},   {"loss", loss}, {"reward_mean", reward_mean}, {"r_e", r_e},
          {"r_f", r_f},     {"r_c", r_c},   {"r_m", r_m},                 {"baseline", baseline},
          {"samples", samples}, {"skipped", skipped}};
}

nlohmann::json RlReport::to_json() const {
  return {{"steps", log.size()}, {"samples", samples}, {"skipped", skipped}, {"skipped_updates", skipped_updates}};
}

RlReport train_rl(NeuralPolicy& policy, const std::vector<ConversationPair>& corpus, const RewardModel& rewards,
                  const TrainConfig& config, const SafetyFilter* safety, const RlLogSink& on_step,
                  const CheckpointSink& on_checkpoint) {
  config.validate();
  if (policy.arch().k != config.k) {
    throw ConfigError("training", "policy k=" + std::to_string(policy.arch().k) + " differs from training k=" +
                                      std::to_string(config.k));
  }
  RlReport report;
  if (config.steps == 0) return report;
  if (corpus.empty()) throw DataError("training", "RL corpus is empty");

  Rng rng(config.seed);
  BaselineEstimator baseline(static_cast<std::size_t>(config.baseline_window));
  nn::Adam adam(config.learning_rate);
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::size_t pos = order.size();

  RewriteConfig rc;
  rc.k = config.k;
  rc.nucleus_p = config.nucleus_p;
  rc.max_steps = config.max_steps;
  rc.candidate_cap = config.candidate_cap;
  rc.sample_positions = true;

  for (int step = 0; step < config.steps; ++step) {
    std::vector<PolicySample> batch;
    RlLogRecord rec;
    rec.step = step;
    for (int e = 0; e < config.batch_size; ++e) {
      if (pos == order.size()) {
        rng.shuffle(order);
        pos = 0;
      }
      const ConversationPair& pair = corpus[order[pos++]];
      rc.seed = rng.fork_seed();
      RewriteTrace trace = rewrite(pair.seeker, pair.response, policy, rc, &rewards, safety);

      std::optional<RewardBreakdown> final_reward;
      if (config.reward_mode == RewardMode::kEpisodeFinal && !trace.steps.empty()) {
        final_reward = trace.steps.back().reward;
      }
      for (auto& ts : trace.steps) {
        std::optional<RewardBreakdown> r = config.reward_mode == RewardMode::kPerStep ? ts.reward : final_reward;
        ++report.samples;
        if (!r || !std::isfinite(r->total)) {
          ++report.skipped;
          ++rec.skipped;
          continue;
        }
        rec.reward_mean += r->total;
        rec.r_e += r->r_e;
        rec.r_f += r->r_f;
        rec.r_c += r->r_c;
        rec.r_m += r->r_m;
        batch.push_back({std::move(ts.state), ts.action.position.index, std::move(ts.candidate_tokens), r->total});
      }
    }
    if (report.samples >= static_cast<std::size_t>(config.min_samples_for_abort) &&
        static_cast<double>(report.skipped) > config.max_skip_rate * static_cast<double>(report.samples)) {
      throw ModelError("training", "reward computation failed for " + std::to_string(report.skipped) + " of " +
                                       std::to_string(report.samples) + " samples");
    }
    rec.samples = batch.size();
    if (!batch.empty()) {
      const double n = static_cast<double>(batch.size());
      rec.reward_mean /= n;
      rec.r_e /= n;
      rec.r_f /= n;
      rec.r_c /= n;
      rec.r_m /= n;
    }
    ReinforceStepResult r = reinforce_step(policy, batch, baseline, adam, config.clip_norm);
    if (r.skipped) ++report.skipped_updates;
    rec.loss = r.loss;
    rec.baseline = r.baseline;
    report.log.push_back(rec);
    if (on_step) on_step(rec);
    if (on_checkpoint && config.checkpoint_every > 0 && (step + 1) % config.checkpoint_every == 0 &&
        step + 1 < config.steps) {
      on_checkpoint(step + 1, policy);
    }
  }
  return report;
}

}  // namespace partnerlab

#include "partnerlab/policy/rewrite.hpp"

#include "partnerlab/core/errors.hpp"
#include "partnerlab/corpus/segment.hpp"

namespace partnerlab {

namespace {

std::uint64_t step_seed(std::uint64_t seed, int step) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(step + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

const char* stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::kNone:
      return "none";
    case StopReason::kStopAction:
      return "stop_action";
    case StopReason::kMaxSteps:
      return "max_steps";
    case StopReason::kWindowsExhausted:
      return "windows_exhausted";
  }
  return "none";
}

void RewriteConfig::validate() const {
  if (k < 1) throw ConfigError("rewrite", "k must be >= 1");
  if (!(nucleus_p > 0.0 && nucleus_p <= 1.0)) throw ConfigError("rewrite", "nucleus_p must lie in (0, 1]");
  if (max_steps < 0) throw ConfigError("rewrite", "max_steps must be >= 0");
  if (candidate_cap < 1) throw ConfigError("rewrite", "candidate_cap must be >= 1");
  if (window_schedule != "stride") throw ConfigError("rewrite", "unknown window schedule '" + window_schedule + "'");
}

std::vector<EditAction> RewriteTrace::actions() const {
  std::vector<EditAction> out;
  for (const auto& s : steps) out.push_back(s.action);
  return out;
}

bool RewriteTrace::flagged_unsafe() const {
  for (const auto& s : steps) {
    if (!s.unsafe_category.empty()) return true;
  }
  return false;
}

Episode::Episode(std::vector<std::string> sentences, int k, int max_steps)
    : sentences_(std::move(sentences)), k_(k), max_steps_(max_steps) {
  if (k_ < 1) throw ConfigError("rewrite", "k must be >= 1");
  check_end();
}

void Episode::check_end() {
  if (steps_ >= max_steps_) reason_ = StopReason::kMaxSteps;
  else if (j_ >= sentences_.size() && !(j_ == 0 && steps_ == 0)) reason_ = StopReason::kWindowsExhausted;
}

void Episode::advance(const EditAction& action) {
  if (done()) throw DataError("rewrite", "episode already ended");
  ++steps_;
  if (action.position.kind == PositionKind::kStop) {
    reason_ = StopReason::kStopAction;
    return;
  }
  sentences_ = apply_edit(sentences_, j_, action);
  auto next = static_cast<long long>(j_) + k_ + sentence_delta(action);
  j_ = static_cast<std::size_t>(std::max(0LL, next));
  check_end();
}

const Vocabulary& policy_vocabulary(const RewritePolicy& policy) {
  static const Vocabulary kEmpty;
  if (const auto* n = dynamic_cast<const NeuralPolicy*>(&policy)) return n->vocab();
  return kEmpty;
}

TraceStep propose_step(const Episode& episode, const SeekerPost& seeker, const std::string& original_text,
                       const RewritePolicy& policy, const Vocabulary& vocab, const RewriteConfig& config,
                       const RewardModel* rewards, const SafetyFilter* safety) {
  if (episode.done()) throw DataError("rewrite", "episode already ended");
  Rng rng(step_seed(config.seed, episode.steps()));
  TraceStep step;
  step.state = encode_state(seeker, episode.sentences(), episode.window_start(), config.k, vocab,
                            config.max_post_tokens);
  step.state.step = episode.steps();

  nn::Vector probs = policy.position_probs(step.state);
  check_head_size(probs, config.k);
  int index = config.sample_positions ? static_cast<int>(rng.categorical(std::span<const double>(probs.data(), probs.size())))
                                      : argmax_action(probs);
  step.position_prob = probs[index];
  step.action.position = position_action(index, config.k);

  if (step.action.position.kind != PositionKind::kStop) {
    Candidate c = policy.generate(step.state, step.action.position, config.nucleus_p, config.candidate_cap, rng);
    step.action.candidate = c.text;
    step.candidate_tokens = std::move(c.tokens);
    step.candidate_truncated = c.truncated;
    if (safety && !c.text.empty()) {
      SafetyVerdict v = safety->check(c.text);
      if (!v.safe) {
        step.unsafe_category = v.category.empty() ? "unsafe" : v.category;
        step.action = EditAction{stop_action(config.k), ""};
        step.candidate_tokens.clear();
        step.candidate_truncated = false;
      }
    }
  }
  step.sentences_after = apply_edit(episode.sentences(), episode.window_start(), step.action);

  if (rewards) {
    std::optional<std::string> candidate;
    if (step.action.position.kind != PositionKind::kStop && !step.action.candidate.empty()) {
      candidate = step.action.candidate;
    }
    try {
      step.reward = rewards->evaluate(seeker, original_text, join_sentences(step.sentences_after), candidate,
                                      step.state.window());
    } catch (const Error& e) {
      step.reward_error = e.what();
    }
  }
  return step;
}

RewriteTrace rewrite(const SeekerPost& seeker, const ResponsePost& response, const RewritePolicy& policy,
                     const RewriteConfig& config, const RewardModel* rewards, const SafetyFilter* safety) {
  config.validate();
  if (policy.window_size() != config.k) {
    throw ModelError("rewrite", "policy window size " + std::to_string(policy.window_size()) +
                                    " differs from configured k=" + std::to_string(config.k));
  }
  const Vocabulary& vocab = policy_vocabulary(policy);
  RewriteTrace trace;
  trace.original = response;
  Episode episode(response.sentences, config.k, config.max_steps);
  while (!episode.done()) {
    TraceStep step = propose_step(episode, seeker, response.text, policy, vocab, config, rewards, safety);
    episode.advance(step.action);
    trace.steps.push_back(std::move(step));
  }
  trace.stopped_by = episode.reason();
  trace.final = make_response(response.id, episode.sentences(), config.max_post_tokens);
  return trace;
}

std::vector<std::string> replay(const std::vector<std::string>& original, const std::vector<EditAction>& actions,
                                int k, int max_steps) {
  Episode episode(original, k, max_steps);
  for (const auto& a : actions) episode.advance(a);
  return episode.sentences();
}

nlohmann::json to_json(const RewriteTrace& trace) {
  nlohmann::json steps = nlohmann::json::array();
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& s = trace.steps[i];
    nlohmann::json j = {{"step", i},
                        {"window_start", s.state.window_start},
                        {"window", s.state.window()},
                        {"action", to_json(s.action)},
                        {"position_prob", s.position_prob},
                        {"candidate_truncated", s.candidate_truncated},
                        {"text_after", join_sentences(s.sentences_after)}};
    j["reward"] = s.reward ? to_json(*s.reward) : nlohmann::json(nullptr);
    if (!s.reward_error.empty()) j["reward_error"] = s.reward_error;
    if (!s.unsafe_category.empty()) j["unsafe_category"] = s.unsafe_category;
    steps.push_back(std::move(j));
  }
  return {{"original", {{"text", trace.original.text}, {"sentences", trace.original.sentences}}},
          {"steps", std::move(steps)},
          {"final", {{"text", trace.final.text}, {"sentences", trace.final.sentences}}},
          {"stopped_by", stop_reason_name(trace.stopped_by)},
          {"flagged_unsafe", trace.flagged_unsafe()}};
}

}  // namespace partnerlab

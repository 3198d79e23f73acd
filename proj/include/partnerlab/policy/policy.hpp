#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "partnerlab/core/nn.hpp"
#include "partnerlab/core/random.hpp"
#include "partnerlab/core/tokenizer.hpp"
#include "partnerlab/policy/actions.hpp"
#include "partnerlab/policy/state.hpp"

namespace partnerlab {

inline constexpr int kDefaultCandidateCap = 32;

struct Candidate {
  std::string text;             // one detokenized sentence, empty for a deletion
  std::vector<TokenId> tokens;  // as sampled, for log-probability replay
  double log_prob = 0.0;
  bool truncated = false;
};

// Dual-head rewriting policy: a distribution over the 2k+2 position classes
// and a sentence generator conditioned on the state and the chosen position.
// Implementations are immutable during inference.
class RewritePolicy {
 public:
  virtual ~RewritePolicy() = default;

  virtual int window_size() const = 0;
  virtual std::string kind() const = 0;

  // Normalized probabilities over all 2k+2 classes. Classes addressing a
  // position outside the (clipped) window get probability 0.
  virtual nn::Vector position_probs(const RewriteState& state) const = 0;

  virtual Candidate generate(const RewriteState& state, const PositionAction& position, double nucleus_p, int cap,
                             Rng& rng) const = 0;

  virtual void save(const std::filesystem::path& dir) const = 0;
};

// Lowest index among the maximal entries.
int argmax_action(const nn::Vector& probs);

// Checks that a distribution covers exactly 2k+2 classes; throws ModelError
// otherwise.
void check_head_size(const nn::Vector& probs, int k);

struct PolicyArch {
  int k = 2;
  int embed_dim = 32;
  int hidden_dim = 64;
  int decoder_hidden = 64;
  int max_post_tokens = kDefaultMaxPostTokens;

  nlohmann::json to_json() const;
  static PolicyArch from_json(const nlohmann::json& j);
};

// Neural policy with a shared encoder:
//   x = [mean_emb(seeker); for each slot i < k: mean_emb(sentence i), present_i]
//   h = tanh(W x + b)
//   p_pos = softmax(P h + c) over valid classes
// and a TokenDecoder over context [h; onehot(position)] for p_sent. All
// parameters live in one flat vector so the explicit-theta functions below
// can be evaluated at arbitrary parameter values (gradient checks, optimizer
// steps).
class NeuralPolicy final : public RewritePolicy {
 public:
  NeuralPolicy(Vocabulary vocab, const PolicyArch& arch, std::uint64_t seed);

  int window_size() const override { return arch_.k; }
  std::string kind() const override { return "neural"; }
  nn::Vector position_probs(const RewriteState& state) const override { return position_probs(theta_, state); }
  Candidate generate(const RewriteState& state, const PositionAction& position, double nucleus_p, int cap,
                     Rng& rng) const override;
  void save(const std::filesystem::path& dir) const override;
  static NeuralPolicy load(const std::filesystem::path& dir);

  const Vocabulary& vocab() const { return vocab_; }
  const PolicyArch& arch() const { return arch_; }
  const nn::ParamLayout& layout() const { return layout_; }
  const nn::Vector& params() const { return theta_; }
  nn::Vector& params() { return theta_; }
  std::size_t num_params() const { return layout_.size(); }

  nn::Vector position_probs(const nn::Vector& theta, const RewriteState& state) const;

  // Sequence the generator is trained to emit for a sentence: its tokens,
  // followed by <eos> unless the last token already ends the sentence.
  std::vector<TokenId> target_tokens(const std::string& sentence) const;

  // log p_pos(action | state) + log p_sent(tokens | state, action). For stop
  // the sentence term is 0.
  double log_prob(const nn::Vector& theta, const RewriteState& state, int action_index,
                  const std::vector<TokenId>& tokens) const;
  double position_log_prob(const nn::Vector& theta, const RewriteState& state, int action_index) const;
  double sentence_log_prob(const nn::Vector& theta, const RewriteState& state, int action_index,
                           const std::vector<TokenId>& tokens) const;

  // Adds scale * d(log_prob)/d(theta) into grad. Weights for the two terms
  // allow supervising one head at a time. Returns the weighted log_prob.
  double accumulate_grad(const nn::Vector& theta, const RewriteState& state, int action_index,
                         const std::vector<TokenId>& tokens, double scale, nn::Vector& grad,
                         double position_weight = 1.0, double sentence_weight = 1.0) const;

 private:
  struct Encoded {
    std::vector<std::vector<TokenId>> segments;  // seeker, then one per slot
    nn::Vector x;
    nn::Vector h;
  };
  Encoded encode(const nn::Vector& theta, const RewriteState& state) const;
  nn::Vector decoder_context(const nn::Vector& h, int action_index) const;
  nn::Vector masked_logits(const nn::Vector& theta, const Encoded& enc, const RewriteState& state) const;

  Vocabulary vocab_;
  PolicyArch arch_;
  nn::ParamLayout layout_;
  nn::Tensor embed_, enc_, enc_bias_, pos_, pos_bias_;
  nn::TokenDecoder decoder_;
  nn::Vector theta_;
};

// Deterministic policy that plays a fixed script: at episode step i it puts
// all mass on script[i].position and emits script[i].candidate; after the
// script ends it stops. An empty script stops immediately.
class ScriptedPolicy final : public RewritePolicy {
 public:
  ScriptedPolicy(int k, std::vector<EditAction> script);

  int window_size() const override { return k_; }
  std::string kind() const override { return "scripted"; }
  nn::Vector position_probs(const RewriteState& state) const override;
  Candidate generate(const RewriteState& state, const PositionAction& position, double nucleus_p, int cap,
                     Rng& rng) const override;
  void save(const std::filesystem::path& dir) const override;
  static ScriptedPolicy load(const std::filesystem::path& dir);

  const std::vector<EditAction>& script() const { return script_; }

 private:
  int k_;
  std::vector<EditAction> script_;
};

// Loads a policy checkpoint of either kind.
std::unique_ptr<RewritePolicy> load_policy(const std::filesystem::path& dir);

nlohmann::json to_json(const PositionAction& a);
nlohmann::json to_json(const EditAction& a);
EditAction edit_action_from_json(const nlohmann::json& j, int k);

}  // namespace partnerlab

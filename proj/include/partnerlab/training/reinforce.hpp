#pragma once

#include <cstddef>
#include <vector>

#include "partnerlab/core/nn.hpp"
#include "partnerlab/policy/policy.hpp"

namespace partnerlab {

// Running mean of the most recent `capacity` rewards. Empty means 0.
class BaselineEstimator {
 public:
  explicit BaselineEstimator(std::size_t capacity = 100);

  void update(double reward);
  double value() const;
  std::size_t size() const { return count_; }
  std::size_t capacity() const { return buffer_.size(); }

 private:
  std::vector<double> buffer_;
  std::size_t next_ = 0;
  std::size_t count_ = 0;
};

// One (state, a1, a2, r) sample for the policy-gradient loss.
struct PolicySample {
  RewriteState state;
  int action_index = 0;
  std::vector<TokenId> tokens;  // sampled candidate tokens; empty for stop
  double reward = 0.0;
};

// J = mean_i -(r_i - b) * (log p_pos(a1_i) + log p_sent(a2_i)), evaluated at
// theta with a frozen baseline value b.
double reinforce_objective(const NeuralPolicy& policy, const nn::Vector& theta, const std::vector<PolicySample>& batch,
                           double baseline);

struct LossAndGrad {
  double loss = 0.0;
  nn::Vector grad;
};

LossAndGrad reinforce_loss_and_grad(const NeuralPolicy& policy, const nn::Vector& theta,
                                    const std::vector<PolicySample>& batch, double baseline);

struct ReinforceStepResult {
  double loss = 0.0;
  double baseline = 0.0;  // value used for the advantages
  double grad_norm = 0.0;
  bool skipped = false;   // non-finite loss or gradient
};

// One optimizer step on the batch. Advantages use the baseline value before
// this batch; the batch rewards are pushed into the baseline afterwards.
ReinforceStepResult reinforce_step(NeuralPolicy& policy, const std::vector<PolicySample>& batch,
                                   BaselineEstimator& baseline, nn::Adam& optimizer, double clip_norm);

}  // namespace partnerlab

#include "partnerlab/training/reinforce.hpp"

#include <cmath>

#include "partnerlab/core/errors.hpp"

namespace partnerlab {

BaselineEstimator::BaselineEstimator(std::size_t capacity) : buffer_(capacity, 0.0) {
  if (capacity == 0) throw ConfigError("training", "baseline window must be >= 1");
}

void BaselineEstimator::update(double reward) {
  buffer_[next_] = reward;
  next_ = (next_ + 1) % buffer_.size();
  if (count_ < buffer_.size()) ++count_;
}

double BaselineEstimator::value() const {
  if (count_ == 0) return 0.0;
  double sum = 0.0;
  const std::size_t oldest = count_ < buffer_.size() ? 0 : next_;
  for (std::size_t i = 0; i < count_; ++i) sum += buffer_[(oldest + i) % buffer_.size()];
  return sum / static_cast<double>(count_);
}

double reinforce_objective(const NeuralPolicy& policy, const nn::Vector& theta, const std::vector<PolicySample>& batch,
                           double baseline) {
  if (batch.empty()) return 0.0;
  double j = 0.0;
  for (const auto& s : batch) {
    j -= (s.reward - baseline) * policy.log_prob(theta, s.state, s.action_index, s.tokens);
  }
  return j / static_cast<double>(batch.size());
}

LossAndGrad reinforce_loss_and_grad(const NeuralPolicy& policy, const nn::Vector& theta,
                                    const std::vector<PolicySample>& batch, double baseline) {
  LossAndGrad out;
  out.grad = nn::Vector::Zero(static_cast<Eigen::Index>(policy.num_params()));
  if (batch.empty()) return out;
  const double n = static_cast<double>(batch.size());
  for (const auto& s : batch) {
    const double advantage = s.reward - baseline;
    if (advantage == 0.0) continue;
    double lp = policy.accumulate_grad(theta, s.state, s.action_index, s.tokens, -advantage / n, out.grad);
    out.loss -= advantage * lp / n;
  }
  return out;
}

ReinforceStepResult reinforce_step(NeuralPolicy& policy, const std::vector<PolicySample>& batch,
                                   BaselineEstimator& baseline, nn::Adam& optimizer, double clip_norm) {
  ReinforceStepResult r;
  r.baseline = baseline.value();
  LossAndGrad lg = reinforce_loss_and_grad(policy, policy.params(), batch, r.baseline);
  r.loss = lg.loss;
  for (const auto& s : batch) baseline.update(s.reward);
  if (!std::isfinite(lg.loss) || !lg.grad.allFinite()) {
    r.skipped = true;
    return r;
  }
  r.grad_norm = clip_norm > 0.0 ? nn::clip_global_norm(lg.grad, clip_norm) : lg.grad.norm();
  optimizer.step(policy.params(), lg.grad);
  return r;
}

}  // namespace partnerlab

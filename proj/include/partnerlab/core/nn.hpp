#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "partnerlab/core/random.hpp"
#include "partnerlab/core/tokenizer.hpp"

// Small dense building blocks with hand-written gradients. Every model keeps
// all of its parameters in one flat vector so optimizers, gradient checks,
// clipping and checkpoint hashing operate on a single buffer.
namespace partnerlab::nn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using MatrixView = Eigen::Map<Matrix>;
using ConstMatrixView = Eigen::Map<const Matrix>;

// Location of one named matrix inside a flat parameter vector (column-major).
struct Tensor {
  std::size_t offset = 0;
  int rows = 0;
  int cols = 0;
  std::size_t size() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
};

class ParamLayout {
 public:
  Tensor add(std::string name, int rows, int cols);
  std::size_t size() const { return size_; }
  const std::vector<std::pair<std::string, Tensor>>& tensors() const { return tensors_; }

 private:
  std::size_t size_ = 0;
  std::vector<std::pair<std::string, Tensor>> tensors_;
};

inline MatrixView view(Vector& buf, const Tensor& t) { return MatrixView(buf.data() + t.offset, t.rows, t.cols); }
inline ConstMatrixView view(const Vector& buf, const Tensor& t) {
  return ConstMatrixView(buf.data() + t.offset, t.rows, t.cols);
}

// Glorot-uniform initialization for every tensor whose name does not end in
// "bias"; biases start at zero.
Vector init_params(const ParamLayout& layout, Rng& rng);

void save_params(const std::filesystem::path& path, const Vector& params);
Vector load_params(const std::filesystem::path& path, std::size_t expected_size);

// Numerically stable softmax / log-softmax over a logit vector.
Vector softmax(const Vector& logits);
Vector log_softmax(const Vector& logits);

// Scales `grad` so its L2 norm is at most max_norm. Returns the pre-clip norm.
double clip_global_norm(Vector& grad, double max_norm);

class Adam {
 public:
  explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  // Descends along `grad` (gradient of a loss to minimize).
  void step(Vector& params, const Vector& grad);
  long long steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long long t_ = 0;
  Vector m_, v_;
};

// Draws a token from the smallest set of highest-probability entries whose
// total mass reaches p, after renormalizing within that set. Ties in
// probability keep the lower index first, so p below the top probability is
// greedy argmax with lowest-index tie-breaking.
std::size_t nucleus_sample(std::span<const double> probs, double p, Rng& rng);

// Index set that nucleus_sample draws from (sorted by descending probability).
std::vector<std::size_t> nucleus_set(std::span<const double> probs, double p);

struct DecodeResult {
  std::vector<TokenId> tokens;  // sampled tokens, including a final <eos> if emitted
  double log_prob = 0.0;
  bool truncated = false;  // hit the length cap with no end of sentence
};

// Autoregressive token decoder conditioned on a context vector:
//   z_t = tanh(C h + E1[y_{t-1}] + E2[y_{t-2}] + b),  p(y_t) = softmax(O z_t + o)
// The sequence starts from two <bos> tokens. <SPLIT> and <bos> are never
// emitted (masked out of the softmax).
class TokenDecoder {
 public:
  TokenDecoder() = default;
  TokenDecoder(ParamLayout& layout, const std::string& prefix, int context_dim, int hidden, int vocab);

  int vocab_size() const { return vocab_; }

  // Next-token distribution after the given two previous tokens.
  Vector next_probs(const Vector& theta, const Vector& h, TokenId prev1, TokenId prev2) const;

  // Sum of log-probabilities of `targets` (teacher forced).
  double log_prob(const Vector& theta, const Vector& h, std::span<const TokenId> targets) const;

  // Adds scale * d(log_prob)/d(theta) into grad and scale * d(log_prob)/dh
  // into dh. Returns log_prob.
  double accumulate_grad(const Vector& theta, const Vector& h, std::span<const TokenId> targets, double scale,
                         Vector& grad, Vector& dh) const;

  // Nucleus sampling until <eos>, a sentence-final punctuation token, or cap.
  // <unk> is never sampled.
  DecodeResult sample(const Vector& theta, const Vector& h, const Vocabulary& vocab, double p, int cap,
                      Rng& rng) const;

 private:
  Vector pre_activation(const Vector& theta, const Vector& h, TokenId prev1, TokenId prev2) const;
  Vector logits(const Vector& theta, const Vector& z) const;

  Tensor ctx_, emb1_, emb2_, bias_, out_, out_bias_;
  int vocab_ = 0;
};

}  // namespace partnerlab::nn

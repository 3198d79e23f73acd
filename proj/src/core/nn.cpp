#include "partnerlab/core/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

#include "partnerlab/core/errors.hpp"

namespace partnerlab::nn {

namespace {
constexpr char kMagic[4] = {'P', 'L', 'W', '1'};
constexpr double kMasked = -std::numeric_limits<double>::infinity();

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}
}  // namespace

Tensor ParamLayout::add(std::string name, int rows, int cols) {
  Tensor t{size_, rows, cols};
  size_ += t.size();
  tensors_.emplace_back(std::move(name), t);
  return t;
}

Vector init_params(const ParamLayout& layout, Rng& rng) {
  Vector theta = Vector::Zero(static_cast<Eigen::Index>(layout.size()));
  for (const auto& [name, t] : layout.tensors()) {
    if (ends_with(name, "bias")) continue;
    double a = std::sqrt(6.0 / static_cast<double>(t.rows + t.cols));
    for (std::size_t i = 0; i < t.size(); ++i) theta[static_cast<Eigen::Index>(t.offset + i)] = rng.uniform(-a, a);
  }
  return theta;
}

void save_params(const std::filesystem::path& path, const Vector& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelError("weights", "cannot write " + path.string());
  std::uint64_t n = static_cast<std::uint64_t>(params.size());
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(params.data()), static_cast<std::streamsize>(n * sizeof(double)));
}

Vector load_params(const std::filesystem::path& path, std::size_t expected_size) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("weights", "cannot read " + path.string());
  char magic[4];
  std::uint64_t n = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw ModelError("weights", path.string() + " is not a weight file");
  if (n != expected_size) {
    throw ModelError("weights", path.string() + " holds " + std::to_string(n) + " parameters, model expects " +
                                    std::to_string(expected_size));
  }
  Vector params(static_cast<Eigen::Index>(n));
  in.read(reinterpret_cast<char*>(params.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw ModelError("weights", path.string() + " is truncated");
  return params;
}

Vector softmax(const Vector& logits) {
  double m = logits.maxCoeff();
  Vector e = (logits.array() - m).unaryExpr([](double x) { return std::exp(x); });
  return e / e.sum();
}

Vector log_softmax(const Vector& logits) {
  double m = logits.maxCoeff();
  double lse = m + std::log((logits.array() - m).unaryExpr([](double x) { return std::exp(x); }).sum());
  return logits.array() - lse;
}

double clip_global_norm(Vector& grad, double max_norm) {
  double norm = grad.norm();
  if (norm > max_norm && norm > 0.0) grad *= max_norm / norm;
  return norm;
}

void Adam::step(Vector& params, const Vector& grad) {
  if (m_.size() != params.size()) {
    m_ = Vector::Zero(params.size());
    v_ = Vector::Zero(params.size());
  }
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
  double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

std::vector<std::size_t> nucleus_set(std::span<const double> probs, double p) {
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  double cum = 0.0;
  std::size_t keep = 0;
  while (keep < order.size()) {
    cum += probs[order[keep]];
    ++keep;
    if (cum >= p * total) break;
  }
  while (keep > 1 && probs[order[keep - 1]] <= 0.0) --keep;
  order.resize(std::max<std::size_t>(keep, 1));
  return order;
}

std::size_t nucleus_sample(std::span<const double> probs, double p, Rng& rng) {
  if (probs.empty()) throw ModelError("sampling", "empty distribution");
  if (!(p > 0.0) || p > 1.0) throw ModelError("sampling", "nucleus threshold must lie in (0, 1]");
  auto set = nucleus_set(probs, p);
  if (set.size() == 1) return set.front();
  std::vector<double> w;
  w.reserve(set.size());
  for (auto i : set) w.push_back(probs[i]);
  return set[rng.categorical(w)];
}

TokenDecoder::TokenDecoder(ParamLayout& layout, const std::string& prefix, int context_dim, int hidden, int vocab)
    : vocab_(vocab) {
  ctx_ = layout.add(prefix + ".ctx", hidden, context_dim);
  emb1_ = layout.add(prefix + ".emb1", hidden, vocab);
  emb2_ = layout.add(prefix + ".emb2", hidden, vocab);
  bias_ = layout.add(prefix + ".hidden_bias", hidden, 1);
  out_ = layout.add(prefix + ".out", vocab, hidden);
  out_bias_ = layout.add(prefix + ".out_bias", vocab, 1);
}

Vector TokenDecoder::pre_activation(const Vector& theta, const Vector& h, TokenId prev1, TokenId prev2) const {
  return view(theta, ctx_) * h + view(theta, emb1_).col(prev1) + view(theta, emb2_).col(prev2) +
         view(theta, bias_).col(0);
}

Vector TokenDecoder::logits(const Vector& theta, const Vector& z) const {
  Vector l = view(theta, out_) * z + view(theta, out_bias_).col(0);
  l[Vocabulary::kSplit] = kMasked;
  l[Vocabulary::kBos] = kMasked;
  return l;
}

Vector TokenDecoder::next_probs(const Vector& theta, const Vector& h, TokenId prev1, TokenId prev2) const {
  Vector z = pre_activation(theta, h, prev1, prev2).array().tanh();
  return softmax(logits(theta, z));
}

double TokenDecoder::log_prob(const Vector& theta, const Vector& h, std::span<const TokenId> targets) const {
  double total = 0.0;
  TokenId p1 = Vocabulary::kBos, p2 = Vocabulary::kBos;
  for (TokenId y : targets) {
    Vector z = pre_activation(theta, h, p1, p2).array().tanh();
    total += log_softmax(logits(theta, z))[y];
    p2 = p1;
    p1 = y;
  }
  return total;
}

double TokenDecoder::accumulate_grad(const Vector& theta, const Vector& h, std::span<const TokenId> targets,
                                     double scale, Vector& grad, Vector& dh) const {
  double total = 0.0;
  TokenId p1 = Vocabulary::kBos, p2 = Vocabulary::kBos;
  auto out = view(theta, out_);
  auto ctx = view(theta, ctx_);
  auto g_out = view(grad, out_);
  auto g_out_bias = view(grad, out_bias_);
  auto g_ctx = view(grad, ctx_);
  auto g_emb1 = view(grad, emb1_);
  auto g_emb2 = view(grad, emb2_);
  auto g_bias = view(grad, bias_);
  for (TokenId y : targets) {
    Vector z = pre_activation(theta, h, p1, p2).array().tanh();
    Vector lsm = log_softmax(logits(theta, z));
    total += lsm[y];
    // d log p_y / d logits = onehot(y) - softmax; masked entries are exp(-inf) = 0.
    Vector dlogits = -lsm.array().exp();
    dlogits[y] += 1.0;
    dlogits *= scale;
    g_out.noalias() += dlogits * z.transpose();
    g_out_bias.col(0) += dlogits;
    Vector dpre = (out.transpose() * dlogits).array() * (1.0 - z.array().square());
    g_ctx.noalias() += dpre * h.transpose();
    dh.noalias() += ctx.transpose() * dpre;
    g_emb1.col(p1) += dpre;
    g_emb2.col(p2) += dpre;
    g_bias.col(0) += dpre;
    p2 = p1;
    p1 = y;
  }
  return total;
}

DecodeResult TokenDecoder::sample(const Vector& theta, const Vector& h, const Vocabulary& vocab, double p, int cap,
                                  Rng& rng) const {
  DecodeResult r;
  TokenId p1 = Vocabulary::kBos, p2 = Vocabulary::kBos;
  while (true) {
    if (static_cast<int>(r.tokens.size()) >= cap) {
      r.truncated = true;
      break;
    }
    Vector probs = next_probs(theta, h, p1, p2);
    Vector sampling = probs;
    sampling[Vocabulary::kUnk] = 0.0;
    auto y = static_cast<TokenId>(nucleus_sample(std::span<const double>(sampling.data(), sampling.size()), p, rng));
    r.tokens.push_back(y);
    r.log_prob += std::log(probs[y]);
    if (y == Vocabulary::kEos || vocab.is_sentence_final(y)) break;
    p2 = p1;
    p1 = y;
  }
  return r;
}

}  // namespace partnerlab::nn

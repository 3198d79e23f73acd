#include "partnerlab/policy/policy.hpp"

#include <cmath>
#include <limits>

#include "partnerlab/core/checkpoint.hpp"
#include "partnerlab/core/errors.hpp"
#include "partnerlab/corpus/segment.hpp"

namespace fs = std::filesystem;

namespace partnerlab {

namespace {

constexpr double kMasked = -std::numeric_limits<double>::infinity();

nn::Vector mean_embedding(const nn::ConstMatrixView& emb, const std::vector<TokenId>& ids) {
  nn::Vector v = nn::Vector::Zero(emb.rows());
  if (ids.empty()) return v;
  for (TokenId id : ids) v += emb.col(id);
  return v / static_cast<double>(ids.size());
}

}  // namespace

int argmax_action(const nn::Vector& probs) {
  int best = 0;
  for (int i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best]) best = i;
  }
  return best;
}

void check_head_size(const nn::Vector& probs, int k) {
  if (probs.size() != action_count(k)) {
    throw ModelError("policy", "position head has " + std::to_string(probs.size()) + " classes, window size " +
                                   std::to_string(k) + " needs " + std::to_string(action_count(k)));
  }
}

nlohmann::json PolicyArch::to_json() const {
  return {{"k", k},
          {"embed_dim", embed_dim},
          {"hidden_dim", hidden_dim},
          {"decoder_hidden", decoder_hidden},
          {"max_post_tokens", max_post_tokens}};
}

PolicyArch PolicyArch::from_json(const nlohmann::json& j) {
  PolicyArch a;
  a.k = j.value("k", a.k);
  a.embed_dim = j.value("embed_dim", a.embed_dim);
  a.hidden_dim = j.value("hidden_dim", a.hidden_dim);
  a.decoder_hidden = j.value("decoder_hidden", a.decoder_hidden);
  a.max_post_tokens = j.value("max_post_tokens", a.max_post_tokens);
  return a;
}

NeuralPolicy::NeuralPolicy(Vocabulary vocab, const PolicyArch& arch, std::uint64_t seed)
    : vocab_(std::move(vocab)), arch_(arch) {
  if (arch_.k < 1) throw ConfigError("policy", "window size k must be >= 1");
  if (arch_.embed_dim < 1 || arch_.hidden_dim < 1 || arch_.decoder_hidden < 1) {
    throw ConfigError("policy", "layer sizes must be positive");
  }
  const int d = arch_.embed_dim;
  const int input_dim = d + arch_.k * (d + 1);
  embed_ = layout_.add("embed", d, vocab_.size());
  enc_ = layout_.add("encoder", arch_.hidden_dim, input_dim);
  enc_bias_ = layout_.add("encoder_bias", arch_.hidden_dim, 1);
  pos_ = layout_.add("position", action_count(arch_.k), arch_.hidden_dim);
  pos_bias_ = layout_.add("position_bias", action_count(arch_.k), 1);
  decoder_ = nn::TokenDecoder(layout_, "decoder", arch_.hidden_dim + action_count(arch_.k), arch_.decoder_hidden,
                              vocab_.size());
  Rng rng(seed);
  theta_ = nn::init_params(layout_, rng);
}

NeuralPolicy::Encoded NeuralPolicy::encode(const nn::Vector& theta, const RewriteState& state) const {
  if (state.window_size != arch_.k) {
    throw ModelError("policy", "state window size " + std::to_string(state.window_size) +
                                   " does not match the policy's k=" + std::to_string(arch_.k));
  }
  Encoded e;
  std::vector<TokenId> seeker;
  for (TokenId id : state.encoded_input) {
    if (id == Vocabulary::kSplit) break;
    seeker.push_back(id);
  }
  e.segments.push_back(std::move(seeker));
  const auto window = state.window();
  for (int i = 0; i < arch_.k; ++i) {
    if (static_cast<std::size_t>(i) < window.size()) {
      e.segments.push_back(vocab_.encode_tokens(truncate_tokens(tokenize(window[i]), arch_.max_post_tokens)));
    } else {
      e.segments.emplace_back();
    }
  }
  const int d = arch_.embed_dim;
  auto emb = nn::view(theta, embed_);
  e.x = nn::Vector::Zero(d + arch_.k * (d + 1));
  e.x.head(d) = mean_embedding(emb, e.segments[0]);
  for (int i = 0; i < arch_.k; ++i) {
    const int off = d + i * (d + 1);
    e.x.segment(off, d) = mean_embedding(emb, e.segments[i + 1]);
    e.x[off + d] = static_cast<std::size_t>(i) < window.size() ? 1.0 : 0.0;
  }
  e.h = (nn::view(theta, enc_) * e.x + nn::view(theta, enc_bias_).col(0)).array().tanh();
  return e;
}

nn::Vector NeuralPolicy::masked_logits(const nn::Vector& theta, const Encoded& enc, const RewriteState& state) const {
  nn::Vector logits = nn::view(theta, pos_) * enc.h + nn::view(theta, pos_bias_).col(0);
  const auto valid = valid_actions(arch_.k, state.window_length());
  for (int i = 0; i < logits.size(); ++i) {
    if (!valid[i]) logits[i] = kMasked;
  }
  return logits;
}

nn::Vector NeuralPolicy::decoder_context(const nn::Vector& h, int action_index) const {
  nn::Vector c = nn::Vector::Zero(h.size() + action_count(arch_.k));
  c.head(h.size()) = h;
  c[h.size() + action_index] = 1.0;
  return c;
}

nn::Vector NeuralPolicy::position_probs(const nn::Vector& theta, const RewriteState& state) const {
  return nn::softmax(masked_logits(theta, encode(theta, state), state));
}

std::vector<TokenId> NeuralPolicy::target_tokens(const std::string& sentence) const {
  auto ids = vocab_.encode_tokens(truncate_tokens(tokenize(sentence), kDefaultCandidateCap));
  if (ids.empty() || !vocab_.is_sentence_final(ids.back())) ids.push_back(Vocabulary::kEos);
  return ids;
}

double NeuralPolicy::position_log_prob(const nn::Vector& theta, const RewriteState& state, int action_index) const {
  position_action(action_index, arch_.k);
  return nn::log_softmax(masked_logits(theta, encode(theta, state), state))[action_index];
}

double NeuralPolicy::sentence_log_prob(const nn::Vector& theta, const RewriteState& state, int action_index,
                                       const std::vector<TokenId>& tokens) const {
  if (position_action(action_index, arch_.k).kind == PositionKind::kStop) return 0.0;
  Encoded enc = encode(theta, state);
  return decoder_.log_prob(theta, decoder_context(enc.h, action_index), tokens);
}

double NeuralPolicy::log_prob(const nn::Vector& theta, const RewriteState& state, int action_index,
                              const std::vector<TokenId>& tokens) const {
  return position_log_prob(theta, state, action_index) + sentence_log_prob(theta, state, action_index, tokens);
}

double NeuralPolicy::accumulate_grad(const nn::Vector& theta, const RewriteState& state, int action_index,
                                     const std::vector<TokenId>& tokens, double scale, nn::Vector& grad,
                                     double position_weight, double sentence_weight) const {
  const PositionAction action = position_action(action_index, arch_.k);
  Encoded enc = encode(theta, state);
  const int H = arch_.hidden_dim;
  nn::Vector dh = nn::Vector::Zero(H);
  double total = 0.0;

  if (position_weight != 0.0) {
    nn::Vector lsm = nn::log_softmax(masked_logits(theta, enc, state));
    total += position_weight * lsm[action_index];
    nn::Vector dlogits = -lsm.array().exp();
    dlogits[action_index] += 1.0;
    dlogits *= scale * position_weight;
    nn::view(grad, pos_).noalias() += dlogits * enc.h.transpose();
    nn::view(grad, pos_bias_).col(0) += dlogits;
    dh.noalias() += nn::view(theta, pos_).transpose() * dlogits;
  }
  if (sentence_weight != 0.0 && action.kind != PositionKind::kStop) {
    nn::Vector dctx = nn::Vector::Zero(H + action_count(arch_.k));
    total += sentence_weight * decoder_.accumulate_grad(theta, decoder_context(enc.h, action_index), tokens,
                                                        scale * sentence_weight, grad, dctx);
    dh += dctx.head(H);
  }

  nn::Vector dpre = dh.array() * (1.0 - enc.h.array().square());
  nn::view(grad, enc_).noalias() += dpre * enc.x.transpose();
  nn::view(grad, enc_bias_).col(0) += dpre;
  nn::Vector dx = nn::view(theta, enc_).transpose() * dpre;
  auto g_emb = nn::view(grad, embed_);
  const int d = arch_.embed_dim;
  for (std::size_t s = 0; s < enc.segments.size(); ++s) {
    const auto& ids = enc.segments[s];
    if (ids.empty()) continue;
    const int off = s == 0 ? 0 : d + static_cast<int>(s - 1) * (d + 1);
    nn::Vector share = dx.segment(off, d) / static_cast<double>(ids.size());
    for (TokenId id : ids) g_emb.col(id) += share;
  }
  return total;
}

Candidate NeuralPolicy::generate(const RewriteState& state, const PositionAction& position, double nucleus_p, int cap,
                                 Rng& rng) const {
  Candidate c;
  if (position.kind == PositionKind::kStop) return c;
  Encoded enc = encode(theta_, state);
  nn::DecodeResult r = decoder_.sample(theta_, decoder_context(enc.h, position.index), vocab_, nucleus_p, cap, rng);
  c.tokens = r.tokens;
  c.log_prob = r.log_prob;
  c.truncated = r.truncated;
  auto sentences = segment_sentences(vocab_.decode(r.tokens));
  if (!sentences.empty()) c.text = sentences.front();
  return c;
}

void NeuralPolicy::save(const fs::path& dir) const {
  fs::create_directories(dir);
  vocab_.save(dir / "vocab.txt");
  nn::save_params(dir / "weights.bin", theta_);
  nlohmann::json cfg = arch_.to_json();
  cfg["vocab_size"] = vocab_.size();
  cfg["impl"] = "neural";
  write_manifest(dir, "policy", cfg);
}

NeuralPolicy NeuralPolicy::load(const fs::path& dir) {
  Manifest m = read_manifest(dir, "policy");
  if (m.config.value("impl", "neural") != "neural") throw ModelError("policy", dir.string() + " is not a neural policy");
  Vocabulary vocab = Vocabulary::load(dir / "vocab.txt");
  if (m.config.contains("vocab_size") && m.config["vocab_size"].get<int>() != vocab.size()) {
    throw ModelError("policy", "vocabulary size does not match the checkpoint manifest");
  }
  NeuralPolicy p(std::move(vocab), PolicyArch::from_json(m.config), 0);
  p.theta_ = nn::load_params(dir / "weights.bin", p.layout_.size());
  return p;
}

ScriptedPolicy::ScriptedPolicy(int k, std::vector<EditAction> script) : k_(k), script_(std::move(script)) {
  if (k_ < 1) throw ConfigError("policy", "window size k must be >= 1");
  for (const auto& a : script_) position_action(a.position.index, k_);
}

nn::Vector ScriptedPolicy::position_probs(const RewriteState& state) const {
  nn::Vector p = nn::Vector::Zero(action_count(k_));
  int index = 2 * k_ + 1;
  if (state.step >= 0 && static_cast<std::size_t>(state.step) < script_.size()) {
    index = script_[state.step].position.index;
    if (!valid_actions(k_, state.window_length())[index]) index = 2 * k_ + 1;
  }
  p[index] = 1.0;
  return p;
}

Candidate ScriptedPolicy::generate(const RewriteState& state, const PositionAction& position, double, int, Rng&) const {
  Candidate c;
  if (position.kind == PositionKind::kStop) return c;
  if (state.step >= 0 && static_cast<std::size_t>(state.step) < script_.size()) c.text = script_[state.step].candidate;
  return c;
}

void ScriptedPolicy::save(const fs::path& dir) const {
  fs::create_directories(dir);
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& a : script_) steps.push_back(to_json(a));
  write_text_file(dir / "script.json", steps.dump(2) + "\n");
  write_manifest(dir, "policy", {{"impl", "scripted"}, {"k", k_}});
}

ScriptedPolicy ScriptedPolicy::load(const fs::path& dir) {
  Manifest m = read_manifest(dir, "policy");
  int k = m.config.value("k", 2);
  std::vector<EditAction> script;
  nlohmann::json steps;
  try {
    steps = nlohmann::json::parse(read_text_file(dir / "script.json"));
  } catch (const nlohmann::json::exception& e) {
    throw ModelError("policy", "bad script.json: " + std::string(e.what()));
  }
  for (const auto& s : steps) script.push_back(edit_action_from_json(s, k));
  return ScriptedPolicy(k, std::move(script));
}

std::unique_ptr<RewritePolicy> load_policy(const fs::path& dir) {
  Manifest m = read_manifest(dir, "policy");
  const std::string impl = m.config.value("impl", "neural");
  if (impl == "neural") return std::make_unique<NeuralPolicy>(NeuralPolicy::load(dir));
  if (impl == "scripted") return std::make_unique<ScriptedPolicy>(ScriptedPolicy::load(dir));
  throw ModelError("policy", "unknown policy implementation '" + impl + "'");
}

nlohmann::json to_json(const PositionAction& a) {
  return {{"index", a.index}, {"kind", kind_name(a.kind)}, {"slot", a.slot}};
}

nlohmann::json to_json(const EditAction& a) { return {{"position", to_json(a.position)}, {"candidate", a.candidate}}; }

EditAction edit_action_from_json(const nlohmann::json& j, int k) {
  try {
    EditAction a;
    const auto& pos = j.at("position");
    if (pos.contains("index")) {
      a.position = position_action(pos.at("index").get<int>(), k);
      if (pos.contains("kind") && parse_kind(pos["kind"].get<std::string>()) != a.position.kind) {
        throw DataError("policy", "position kind does not match index");
      }
    } else {
      PositionKind kind = parse_kind(pos.at("kind").get<std::string>());
      int slot = pos.value("slot", 0);
      a.position = kind == PositionKind::kInsert    ? insert_action(slot, k)
                   : kind == PositionKind::kReplace ? replace_action(slot, k)
                                                    : stop_action(k);
    }
    a.candidate = j.value("candidate", "");
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("policy", std::string("malformed edit action: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError("policy", e.what());
  }
}

}  // namespace partnerlab

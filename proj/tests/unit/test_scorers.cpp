#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "partnerlab/core/errors.hpp"
#include "partnerlab/core/random.hpp"
#include "partnerlab/core/text.hpp"
#include "partnerlab/core/tokenizer.hpp"
#include "partnerlab/corpus/datasets.hpp"
#include "partnerlab/corpus/segment.hpp"
#include "partnerlab/scorers/coherence.hpp"
#include "partnerlab/scorers/empathy.hpp"
#include "partnerlab/scorers/language_model.hpp"
#include "partnerlab/scorers/mutual_information.hpp"
#include "partnerlab/scorers/reward.hpp"
#include "test_support.hpp"

using namespace partnerlab;
namespace pt = partnerlab::testing;

namespace {

class FixedScorer final : public SequenceScorer {
 public:
  explicit FixedScorer(double v) : v_(v) {}
  double log_prob(std::string_view, std::string_view) const override { return v_; }

 private:
  double v_;
};

// Deterministic pseudo-probability per ordered sentence pair.
class HashCoherence final : public CoherenceModel {
 public:
  double coherence_prob(std::string_view a, std::string_view b) const override {
    std::string key = std::string(a) + "|" + std::string(b);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : key) h = (h ^ c) * 1099511628211ULL;
    return static_cast<double>(h % 10007) / 10007.0;
  }
  std::string kind() const override { return "hash"; }
  void save(const std::filesystem::path&) const override {}
};

// Responses built only from topic-specific sentences, so in-thread pairs
// share a topic and cross-thread pairs do not.
std::vector<ConversationPair> topic_pure_corpus(std::size_t threads, std::uint64_t seed) {
  const auto& t = pt::templates();
  auto topics = t.mental_health_topics();
  Rng rng(seed);
  std::vector<ConversationPair> out;
  for (std::size_t i = 0; i < threads; ++i) {
    const std::string& topic = topics[i % topics.size()];
    std::vector<std::string> pool;
    for (const char* kind : {"advice", "er2", "ex2", "ip2"}) {
      auto it = t.sentences.find(kind);
      if (it == t.sentences.end()) continue;
      auto jt = it->second.find(topic);
      if (jt != it->second.end()) pool.insert(pool.end(), jt->second.begin(), jt->second.end());
    }
    rng.shuffle(pool);
    pool.resize(3);
    out.push_back(make_pair("t" + std::to_string(i), "p" + std::to_string(i), t.seekers.at(topic).front(),
                            join_sentences(pool)));
  }
  return out;
}

}  // namespace

TEST_CASE("lexicon oracle examples") {
  const auto& o = pt::oracle();
  CHECK(o.score(pt::seeker("x"), "").total() == 0);
  CHECK(o.score(pt::seeker("x"), "Oh no. I understand.") == EmpathyScore{1, 1, 0});
  CHECK(o.score(pt::seeker("x"), "I am so sorry, that must be really hard. How are you feeling?").total() == 6);
  CHECK(o.score(pt::seeker("x"), "SO SORRY") == EmpathyScore{2, 0, 0});
  CHECK(o.score(pt::seeker("x"), "sorrow is real").total() == 0);
}

TEST_CASE("lexicon oracle matches a brute-force phrase search") {
  const auto& o = pt::oracle();
  auto contains_phrase = [](const std::vector<std::string>& toks, const std::vector<std::string>& phrase) {
    if (phrase.empty() || phrase.size() > toks.size()) return false;
    for (std::size_t i = 0; i + phrase.size() <= toks.size(); ++i) {
      if (std::equal(phrase.begin(), phrase.end(), toks.begin() + static_cast<std::ptrdiff_t>(i))) return true;
    }
    return false;
  };
  for (const auto& p : pt::synthetic(120, 0.4, 31)) {
    auto toks = tokenize(p.response.text);
    EmpathyScore expected;
    for (int m = 0; m < 3; ++m) {
      int level = 0;
      for (int l = 0; l < 2; ++l) {
        for (const auto& phrase : o.phrases()[m][l]) {
          if (contains_phrase(toks, tokenize(phrase))) level = std::max(level, l + 1);
        }
      }
      set_level(expected, static_cast<Mechanism>(m), level);
    }
    CHECK(o.score(p.seeker, p.response.text) == expected);
  }
}

TEST_CASE("change in empathy examples") {
  const auto& o = pt::oracle();
  auto s = pt::seeker("x");
  CHECK(change_in_empathy(o, s, "Go for a walk.", "Go for a walk.") == 0);
  CHECK(change_in_empathy(o, s, "Go for a walk.", "Go for a walk. I am so sorry.") == 2);
  const std::string six = "I am so sorry, that must be really hard. How are you feeling?";
  CHECK(change_in_empathy(o, s, six, "") == -6);
  for (const auto& p : pt::synthetic(30, 0.5, 2)) {
    const std::string other = "Oh no, tell me more.";
    CHECK(change_in_empathy(o, s, p.response.text, other) == -change_in_empathy(o, s, other, p.response.text));
  }
}

TEST_CASE("fluency examples") {
  UniformLm u(50);
  CHECK(fluency_reward("any words at all", u) == doctest::Approx(1.0 / 50).epsilon(1e-12));
  pt::TableLm t({{"a", std::exp(-1.0)}, {"b", std::exp(-3.0)}}, 0.5, 10);
  CHECK(fluency_reward("a b", t) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
  pt::TableLm q({{"w", 0.25}}, 0.5, 10);
  CHECK(fluency_reward("w", q) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK_THROWS_AS(fluency_reward("", u), DataError);
  CHECK_THROWS_AS(fluency_reward("   ", u), DataError);
}

TEST_CASE("bigram model matches a hand-counted interpolation") {
  std::vector<std::string> train = {"the cat sat", "the dog sat down", "a cat ran"};
  BigramLmConfig cfg;
  BigramLm lm = BigramLm::train(train, cfg);
  std::map<std::string, double> uni;
  std::map<std::string, double> ctx;
  std::map<std::pair<std::string, std::string>, double> bi;
  double total = 0;
  for (const auto& s : train) {
    std::string prev = "<s>";
    for (const auto& w : text::split_words(text::to_lower(s))) {
      uni[w] += 1;
      total += 1;
      ctx[prev] += 1;
      bi[{prev, w}] += 1;
      prev = w;
    }
  }
  const double V = static_cast<double>(uni.size());
  auto prob = [&](const std::string& u, const std::string& w) {
    double pu = uni.count(w) ? uni[w] / total : 0.0;
    double pg = 1.0 / (V + 1.0);
    if (!ctx.count(u)) {
      double s = cfg.unigram_weight + cfg.uniform_weight;
      double a = cfg.unigram_weight + cfg.bigram_weight * cfg.unigram_weight / s;
      double g = cfg.uniform_weight + cfg.bigram_weight * cfg.uniform_weight / s;
      return a * pu + g * pg;
    }
    double pb = bi.count({u, w}) ? bi[{u, w}] / ctx[u] : 0.0;
    return cfg.bigram_weight * pb + cfg.unigram_weight * pu + cfg.uniform_weight * pg;
  };
  CHECK(lm.vocab_size() == uni.size());
  Rng rng(12);
  std::vector<std::string> words = {"the", "cat", "sat", "dog", "down", "a", "ran", "zebra"};
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t n = 1 + rng.index(6);
    std::vector<std::string> w;
    for (std::size_t i = 0; i < n; ++i) w.push_back(rng.pick(words));
    double lp = 0.0;
    std::string prev = "<s>";
    for (const auto& x : w) {
      lp += std::log(prob(prev, x));
      prev = x;
    }
    double expected = std::exp(lp / static_cast<double>(n));
    CHECK(std::abs(fluency_reward(text::join(w, " "), lm) - expected) <= 1e-9);
  }
}

TEST_CASE("language models survive a save and load") {
  pt::TempDir tmp("lm");
  BigramLm lm = BigramLm::train({"one two three", "two three four"});
  lm.save(tmp / "bigram");
  auto loaded = load_language_model(tmp / "bigram");
  CHECK(fluency_reward("two three five", *loaded) == fluency_reward("two three five", lm));
  UniformLm u(7);
  u.save(tmp / "uniform");
  CHECK(load_language_model(tmp / "uniform")->vocab_size() == 7);
}

TEST_CASE("coherence stub and reward mean") {
  ConstantCoherenceModel stub;
  CHECK(stub.coherence_prob("a", "b") == 0.5);
  CHECK(coherence_reward("x", {"a", "b"}, stub) == 0.5);
  CHECK(coherence_reward("x", {}, stub) == 1.0);
  HashCoherence h;
  Rng rng(3);
  std::vector<std::string> sents;
  for (const auto& p : pt::synthetic(20, 0.5, 8)) sents.insert(sents.end(), p.response.sentences.begin(), p.response.sentences.end());
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> window;
    std::size_t k = 1 + rng.index(4);
    for (std::size_t i = 0; i < k; ++i) window.push_back(rng.pick(sents));
    const std::string& cand = rng.pick(sents);
    double sum = 0.0;
    for (const auto& s : window) sum += h.coherence_prob(cand, s);
    CHECK(std::abs(coherence_reward(cand, window, h) - sum / static_cast<double>(k)) <= 1e-12);
  }
}

TEST_CASE("trained coherence classifier on a topic-pure fixture") {
  auto train_corpus = topic_pure_corpus(1200, 1);
  auto train = build_coherence_dataset(train_corpus, 1.0, 2);
  auto model = train_coherence_classifier(train);
  auto held = build_coherence_dataset(topic_pure_corpus(240, 77), 1.0, 5);
  double pos_sum = 0, neg_sum = 0;
  std::size_t pos = 0, neg = 0, correct = 0, n = 0;
  for (const auto& e : held) {
    double p = model.coherence_prob(e.sentence_a, e.sentence_b);
    bool coherent = e.label == CoherenceLabel::kCoherent;
    (coherent ? pos_sum : neg_sum) += p;
    (coherent ? pos : neg) += 1;
    correct += (p > 0.5) == coherent ? 1 : 0;
    ++n;
  }
  REQUIRE(pos > 10);
  REQUIRE(neg > 10);
  CHECK(pos_sum / static_cast<double>(pos) > 0.5);
  CHECK(neg_sum / static_cast<double>(neg) < 0.5);
  CHECK(static_cast<double>(correct) / static_cast<double>(n) >= 0.8);
  CHECK(model.metrics().heldout_accuracy >= 0.8);

  pt::TempDir tmp("coh");
  model.save(tmp.path());
  auto loaded = load_coherence_model(tmp.path());
  CHECK(loaded->coherence_prob(held[0].sentence_a, held[0].sentence_b) ==
        model.coherence_prob(held[0].sentence_a, held[0].sentence_b));
}

TEST_CASE("coherence training errors") {
  CHECK_THROWS_AS(train_coherence_classifier({}), DataError);
  std::vector<CoherencePairExample> one_class(20, CoherencePairExample{"a b", "c d", CoherenceLabel::kCoherent, "t", "t"});
  CHECK_THROWS_AS(train_coherence_classifier(one_class), DataError);
  CHECK_THROWS(CoherenceClassifier().coherence_prob("a", "b"));
}

TEST_CASE("mutual information reward interpolates both directions") {
  FixedScorer fwd(-10.0), bwd(-6.0);
  CHECK(mutual_information_reward("s", "r", fwd, bwd, 0.5) == -8.0);
  CHECK(mutual_information_reward("s", "r", fwd, bwd, 1.0) == -10.0);
  CHECK(mutual_information_reward("s", "r", fwd, bwd, 0.0) == -6.0);
}

TEST_CASE("conditional language model trains and clamps") {
  auto corpus = pt::synthetic(60, 0.5, 5);
  std::vector<std::pair<std::string, std::string>> pairs;
  std::vector<std::string> texts;
  for (const auto& p : corpus) {
    pairs.emplace_back(p.seeker.text, p.response.text);
    texts.push_back(p.seeker.text);
    texts.push_back(p.response.text);
  }
  Vocabulary vocab = Vocabulary::build(texts);
  ConditionalLmConfig cfg;
  cfg.epochs = 0;
  double before = ConditionalLm::train(pairs, vocab, cfg).mean_nll(pairs);
  cfg.epochs = 3;
  ConditionalLm lm = ConditionalLm::train(pairs, vocab, cfg);
  CHECK(lm.mean_nll(pairs) < before);
  const std::string target = "zzz qqq unseen words here";
  double lp = lm.log_prob("anything", target);
  CHECK(lp <= 0.0);
  CHECK(lp >= kLogProbFloor * static_cast<double>(tokenize(target).size() + 1));
  pt::TempDir tmp("clm");
  lm.save(tmp.path());
  CHECK(ConditionalLm::load(tmp.path()).log_prob(pairs[0].first, pairs[0].second) ==
        lm.log_prob(pairs[0].first, pairs[0].second));
  CHECK_THROWS_AS(ConditionalLm::train({}, vocab, cfg), DataError);
}

TEST_CASE("total reward examples and linearity") {
  RewardWeights w;
  CHECK(total_reward(1.0, 0.5, 0.2, -1.0, w).total == doctest::Approx(5.92).epsilon(1e-12));
  CHECK(total_reward(0, 0, 0, 0, w).total == 0.0);
  RewardWeights zero{0, 0, 0, 0, 0.5};
  CHECK(total_reward(1.0, 0.5, 0.2, -1.0, zero).total == 0.0);
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    RewardWeights rw{rng.uniform(0, 5), rng.uniform(0, 20), rng.uniform(0, 1), rng.uniform(0, 1), 0.5};
    double a[4], b[4];
    for (int i = 0; i < 4; ++i) {
      a[i] = rng.uniform(-10, 10);
      b[i] = rng.uniform(-10, 10);
    }
    auto ra = total_reward(a[0], a[1], a[2], a[3], rw);
    auto rb = total_reward(b[0], b[1], b[2], b[3], rw);
    auto rs = total_reward(a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3], rw);
    double direct = rw.w_e * a[0] + rw.w_f * a[1] + rw.w_c * a[2] + rw.w_m * a[3];
    CHECK(std::abs(ra.total - direct) <= 1e-12 * (1 + std::abs(direct)));
    CHECK(std::abs(rs.total - (ra.total + rb.total)) <= 1e-9);
    CHECK(ra.r_e == a[0]);
    CHECK(ra.r_m == a[3]);
  }
}

TEST_CASE("reward model combines its parts") {
  const auto& o = pt::oracle();
  UniformLm lm(20);
  ConstantCoherenceModel coh(0.8);
  FixedScorer fwd(-4.0), bwd(-2.0);
  RewardModel rm(o, lm, coh, fwd, bwd, RewardWeights{});
  auto s = pt::seeker("I am scared.");
  auto r = rm.evaluate(s, "Go outside.", "Go outside. I am so sorry.", std::string("I am so sorry."), {"Go outside."});
  CHECK(r.r_e == 2.0);
  CHECK(r.r_f == doctest::Approx(1.0 / 20));
  CHECK(r.r_c == 0.8);
  CHECK(r.r_m == -3.0);
  CHECK(r.total == doctest::Approx(2.0 + 10.0 / 20 + 0.08 - 0.3));
  auto stop = rm.evaluate(s, "Go outside.", "Go outside.", std::nullopt, {"Go outside."});
  CHECK(stop.r_c == 1.0);
  CHECK(stop.r_e == 0.0);
  CHECK_THROWS_AS(rm.evaluate(s, "Go outside.", "", std::string(""), {}), DataError);
}

TEST_CASE("trained empathy classifier on labeled synthetic data") {
  auto corpus = pt::synthetic(400, 0.5, 10);
  auto clf = train_empathy_classifier(corpus);
  CHECK(clf.metrics().heldout_accuracy >= 0.9);
  auto fresh = pt::synthetic(100, 0.5, 1234);
  double agree = 0;
  for (const auto& p : fresh) {
    auto got = clf.score(p.seeker, p.response.text);
    for (int m = 0; m < 3; ++m) {
      agree += level_of(got, static_cast<Mechanism>(m)) == level_of(*p.empathy_label, static_cast<Mechanism>(m));
    }
  }
  CHECK(agree / (3.0 * static_cast<double>(fresh.size())) >= 0.9);
  pt::TempDir tmp("emp");
  clf.save(tmp.path());
  auto loaded = load_empathy_scorer(tmp.path());
  CHECK(loaded->score(fresh[0].seeker, fresh[0].response.text) == clf.score(fresh[0].seeker, fresh[0].response.text));

  CHECK_THROWS_AS(train_empathy_classifier({}), DataError);
  std::vector<ConversationPair> same;
  for (auto p : pt::synthetic(60, 1.0, 3)) {
    p.empathy_label = EmpathyScore{0, 0, 0};
    same.push_back(p);
  }
  CHECK_THROWS_AS(train_empathy_classifier(same), DataError);
}

TEST_CASE("lexicon oracle survives a save and load") {
  pt::TempDir tmp("lex");
  pt::oracle().save(tmp.path());
  auto loaded = load_empathy_scorer(tmp.path());
  for (const auto& p : pt::synthetic(30, 0.3, 4)) {
    CHECK(loaded->score(p.seeker, p.response.text) == pt::oracle().score(p.seeker, p.response.text));
  }
}

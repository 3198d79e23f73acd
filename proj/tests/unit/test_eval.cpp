#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "doctest.h"
#include "partnerlab/core/errors.hpp"
#include "partnerlab/core/random.hpp"
#include "partnerlab/core/text.hpp"
#include "partnerlab/core/tokenizer.hpp"
#include "partnerlab/eval/metrics.hpp"
#include "partnerlab/eval/suite.hpp"
#include "test_support.hpp"

using namespace partnerlab;
namespace pt = partnerlab::testing;

namespace {

EvalRecord rec(std::string original, std::string rewritten, std::string seeker = "I feel sad.") {
  static int counter = 0;
  EvalRecord r;
  r.id = "r" + std::to_string(counter++);
  r.seeker_text = std::move(seeker);
  r.original_text = std::move(original);
  r.rewritten_text = std::move(rewritten);
  return r;
}

std::size_t levenshtein_recursive(const std::vector<std::string>& a, std::size_t i, const std::vector<std::string>& b,
                                  std::size_t j) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  if (a[i] == b[j]) return levenshtein_recursive(a, i + 1, b, j + 1);
  return 1 + std::min({levenshtein_recursive(a, i + 1, b, j), levenshtein_recursive(a, i, b, j + 1),
                       levenshtein_recursive(a, i + 1, b, j + 1)});
}

std::vector<std::vector<std::string>> grams(const std::vector<std::string>& t, std::size_t n) {
  std::vector<std::vector<std::string>> out;
  for (std::size_t i = 0; i + n <= t.size(); ++i) out.emplace_back(t.begin() + static_cast<long>(i), t.begin() + static_cast<long>(i + n));
  return out;
}

// Corpus BLEU by direct enumeration with the same smoothing rule.
double bleu_oracle(const std::vector<EvalRecord>& records) {
  double m[4] = {0, 0, 0, 0}, tot[4] = {0, 0, 0, 0};
  double c_len = 0, r_len = 0;
  for (const auto& r : records) {
    auto c = tokenize(r.rewritten_text);
    auto ref = tokenize(*r.reference_text);
    c_len += static_cast<double>(c.size());
    r_len += static_cast<double>(ref.size());
    for (std::size_t n = 1; n <= 4; ++n) {
      auto cg = grams(c, n);
      auto rg = grams(ref, n);
      tot[n - 1] += static_cast<double>(cg.size());
      std::vector<bool> used(rg.size(), false);
      for (const auto& g : cg) {
        for (std::size_t k = 0; k < rg.size(); ++k) {
          if (!used[k] && rg[k] == g) {
            used[k] = true;
            m[n - 1] += 1;
            break;
          }
        }
      }
    }
  }
  if (m[0] == 0) return 0.0;
  double s = 0;
  int orders = 0;
  for (int n = 0; n < 4; ++n) {
    if (tot[n] == 0) continue;
    s += std::log((m[n] > 0 ? m[n] : kBleuZeroMatchFloor) / tot[n]);
    ++orders;
  }
  double bp = c_len >= r_len ? 1.0 : std::exp(1 - r_len / c_len);
  return bp * std::exp(s / orders);
}

class PairTable final : public CoherenceModel {
 public:
  explicit PairTable(double p) : p_(p) {}
  double coherence_prob(std::string_view, std::string_view) const override { return p_; }
  std::string kind() const override { return "table"; }
  void save(const std::filesystem::path&) const override {}

 private:
  double p_;
};

}  // namespace

TEST_CASE("distinct-n examples") {
  CHECK(metric_distinct_n({rec("x", "i am i")}, 1) == doctest::Approx(2.0 / 3.0));
  CHECK(metric_distinct_n({rec("x", "a a a a")}, 2) == doctest::Approx(0.25));
  CHECK(metric_distinct_n({rec("x", "one two"), rec("x", "three four")}, 1) == 1.0);
  CHECK_THROWS_AS(metric_distinct_n({rec("x", "   ")}, 1), DataError);
  auto corpus = pt::synthetic(20, 0.5, 3);
  std::vector<EvalRecord> once, twice;
  for (const auto& p : corpus) once.push_back(rec(p.response.text, p.response.text));
  twice = once;
  twice.insert(twice.end(), once.begin(), once.end());
  for (int n : {1, 2}) CHECK(metric_distinct_n(twice, n) == doctest::Approx(metric_distinct_n(once, n) / 2));
}

TEST_CASE("edit rate examples and Levenshtein oracle") {
  CHECK(metric_edit_rate({rec("a b c", "a b c d")}) == doctest::Approx(1.0 / 3.0));
  CHECK(metric_edit_rate({rec("a b", "c d")}) == 1.0);
  CHECK(metric_edit_rate({rec("same words here", "same words here")}) == 0.0);
  std::size_t skipped = 0;
  CHECK(metric_edit_rate({rec("", "x"), rec("a b", "a")}, &skipped) == 0.5);
  CHECK(skipped == 1);

  Rng rng(7);
  std::vector<std::string> alphabet = {"a", "b", "c", "d"};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> x, y;
    for (std::size_t i = rng.index(7); i > 0; --i) x.push_back(rng.pick(alphabet));
    for (std::size_t i = rng.index(7); i > 0; --i) y.push_back(rng.pick(alphabet));
    auto d = word_levenshtein(x, y);
    CHECK(d == levenshtein_recursive(x, 0, y, 0));
    CHECK(d == word_levenshtein(y, x));
    CHECK((d == 0) == (x == y));
  }
}

TEST_CASE("perplexity examples") {
  pt::TableLm t({{"a", 0.5}, {"b", 0.125}}, 0.5, 10);
  CHECK(metric_perplexity({rec("x", "a b")}, t) == doctest::Approx(4.0).epsilon(1e-12));
  UniformLm u(37);
  auto corpus = pt::synthetic(15, 0.5, 1);
  std::vector<EvalRecord> rs;
  for (const auto& p : corpus) rs.push_back(rec(p.response.text, p.response.text));
  CHECK(metric_perplexity(rs, u) == 37.0);
  auto one = std::vector<EvalRecord>{rs[0]};
  CHECK(metric_perplexity(one, t) == doctest::Approx(1.0 / fluency_reward(rs[0].rewritten_text, t)).epsilon(1e-12));
  std::size_t skipped = 0;
  rs.push_back(rec("x", ""));
  metric_perplexity(rs, u, &skipped);
  CHECK(skipped == 1);
}

TEST_CASE("specificity examples") {
  HashEmbedder e(16, 3);
  CHECK(metric_specificity({rec("x", "I feel sad.", "I feel sad.")}, e) == doctest::Approx(1.0));
  nn::Vector a(2), b(2), z = nn::Vector::Zero(2);
  a << 1, 0;
  b << 0, 3;
  CHECK(*cosine_similarity(a, b) == 0.0);
  CHECK(!cosine_similarity(a, z));
  std::vector<EvalRecord> rs;
  double sum = 0;
  for (const auto& p : pt::synthetic(12, 0.5, 2)) {
    rs.push_back(rec(p.response.text, p.response.text, p.seeker.text));
    nn::Vector u = e.embed(p.seeker.text), v = e.embed(p.response.text);
    double dot = 0, nu = 0, nv = 0;
    for (int i = 0; i < u.size(); ++i) {
      dot += u[i] * v[i];
      nu += u[i] * u[i];
      nv += v[i] * v[i];
    }
    sum += dot / std::sqrt(nu * nv);
  }
  CHECK(metric_specificity(rs, e) == doctest::Approx(sum / 12).epsilon(1e-12));
  std::size_t skipped = 0;
  rs.push_back(rec("x", "", "seeker"));
  metric_specificity(rs, e, &skipped);
  CHECK(skipped == 1);
  CHECK(e.embed("Word word").isApprox(e.word_vector("word")));
}

TEST_CASE("sentence coherence examples") {
  PairTable half(0.5), eight(0.8);
  CHECK(metric_sentence_coherence({rec("x", "One sentence."), rec("x", "Another one.")}, half) == 1.0);
  CHECK(metric_sentence_coherence({rec("x", "A b. C d. E f.")}, half) == 0.5);
  CHECK(metric_sentence_coherence({rec("x", "A b. C d.")}, eight) == doctest::Approx(0.8));
  std::size_t skipped = 0;
  CHECK(metric_sentence_coherence({rec("x", ""), rec("x", "A b. C d.")}, eight, &skipped) == doctest::Approx(0.8));
  CHECK(skipped == 1);
}

TEST_CASE("bleu matches enumeration") {
  auto a = rec("x", "I am so sorry about the exam.");
  a.reference_text = "I am so sorry about the exam.";
  CHECK(metric_bleu({a}) == doctest::Approx(1.0).epsilon(1e-12));
  auto none = rec("x", "alpha beta");
  none.reference_text = "gamma delta";
  CHECK(metric_bleu({none}) == 0.0);
  CHECK_THROWS_AS(metric_bleu({rec("x", "y")}), DataError);

  Rng rng(11);
  std::vector<std::string> words = {"i", "am", "so", "sorry", "that", "is", "hard", "."};
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<EvalRecord> rs;
    for (std::size_t r = 1 + rng.index(3); r > 0; --r) {
      std::vector<std::string> c, f;
      for (std::size_t i = 1 + rng.index(8); i > 0; --i) c.push_back(rng.pick(words));
      for (std::size_t i = 1 + rng.index(8); i > 0; --i) f.push_back(rng.pick(words));
      auto x = rec("o", text::join(c, " "));
      x.reference_text = text::join(f, " ");
      rs.push_back(x);
    }
    double got = metric_bleu(rs);
    CHECK(got == doctest::Approx(bleu_oracle(rs)).epsilon(1e-12));
    CHECK(got >= 0.0);
    CHECK(got <= 1.0 + 1e-12);
    std::reverse(rs.begin(), rs.end());
    CHECK(metric_bleu(rs) == got);
  }
}

TEST_CASE("change in empathy metric examples") {
  std::vector<EvalRecord> rs;
  for (int i = 0; i < 10; ++i) rs.push_back(rec("Go for a walk.", "Go for a walk. I am so sorry."));
  CHECK(metric_change_in_empathy(rs, pt::oracle()) == 2.0);
  CHECK_THROWS_AS(metric_change_in_empathy({}, pt::oracle()), DataError);
}

TEST_CASE("suite on identity rewrites and permutations") {
  auto corpus = pt::synthetic(30, 0.5, 5);
  std::vector<EvalRecord> rs;
  for (const auto& p : corpus) {
    auto r = rec(p.response.text, p.response.text, p.seeker.text);
    r.reference_text = p.response.text;
    rs.push_back(r);
  }
  UniformLm lm(50);
  PairTable coh(0.7);
  HashEmbedder emb;
  EvalModels models{pt::oracle(), lm, coh, emb};
  auto report = evaluate_suite(rs, models);
  CHECK(report.change_in_empathy == 0.0);
  CHECK(report.edit_rate == 0.0);
  REQUIRE(report.bleu);
  CHECK(*report.bleu == doctest::Approx(1.0));
  CHECK(report.n == 30);
  CHECK(report.perplexity == doctest::Approx(50.0));

  auto shuffled = rs;
  Rng rng(2);
  rng.shuffle(shuffled);
  CHECK(evaluate_suite(shuffled, models).to_json().dump() == report.to_json().dump());

  CHECK(!evaluate_suite(rs, models, BleuMode::kOff).bleu);
  auto no_refs = rs;
  for (auto& r : no_refs) r.reference_text.reset();
  CHECK(!evaluate_suite(no_refs, models).bleu);
  CHECK_THROWS_AS(evaluate_suite(no_refs, models, BleuMode::kRequired), DataError);
  try {
    evaluate_suite({}, models);
    FAIL("empty corpus accepted");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("empty") != std::string::npos);
  }

  auto table = format_report_table(report);
  CHECK(table.find("n = 30") != std::string::npos);
  CHECK(table.find("Edit rate") != std::string::npos);
}

TEST_CASE("suite fields match per-metric oracles on a scripted fixture") {
  std::vector<EvalRecord> rs = {rec("Go outside.", "I am so sorry. Go outside."),
                                rec("Try to relax.", "Try to relax."),
                                rec("Study more for the test.", "That must be hard. Study more.")};
  rs[0].reference_text = "I am sorry. Go outside.";
  pt::TableLm lm({{"i", 0.2}}, 0.05, 100);
  PairTable coh(0.6);
  HashEmbedder emb;
  EvalModels models{pt::oracle(), lm, coh, emb};
  auto r = evaluate_suite(rs, models);
  double change = 0;
  for (const auto& x : rs) {
    change += change_in_empathy(pt::oracle(), pt::seeker(x.seeker_text), x.original_text, x.rewritten_text);
  }
  CHECK(r.change_in_empathy == doctest::Approx(change / 3));
  CHECK(r.edit_rate == doctest::Approx((4.0 / 2 + 0.0 + 6.0 / 5) / 3));
  CHECK(r.sentence_coherence == doctest::Approx((0.6 + 1.0 + 0.6) / 3));
  CHECK(r.distinct_1 == metric_distinct_n(rs, 1));
  CHECK(r.perplexity == metric_perplexity(rs, lm));
  CHECK(r.specificity == metric_specificity(rs, emb));
  CHECK(*r.bleu == metric_bleu(rs));
  CHECK(r.with_reference == 1);
}

TEST_CASE("records files round-trip and report files are written") {
  std::vector<EvalRecord> rs = {rec("a b", "a c")};
  rs[0].reference_text = "a b";
  auto back = parse_records(to_jsonl(rs));
  REQUIRE(back.size() == 1);
  CHECK(back[0].rewritten_text == "a c");
  CHECK(*back[0].reference_text == "a b");
  CHECK_THROWS_AS(parse_records("{\"id\": 1}\n"), DataError);

  pt::TempDir tmp("report");
  UniformLm lm(5);
  PairTable coh(0.5);
  HashEmbedder emb;
  EvalModels models{pt::oracle(), lm, coh, emb};
  write_report(tmp.path(), evaluate_suite(rs, models), rs, models, {});
  for (const char* f : {"report.json", "report.txt", "records.jsonl", "manifest.json"}) {
    CHECK(std::filesystem::exists(tmp / f));
  }
}

#include <boost/regex.hpp>
#include <set>

#include "doctest.h"
#include "partnerlab/core/checkpoint.hpp"
#include "partnerlab/core/errors.hpp"
#include "partnerlab/core/text.hpp"
#include "partnerlab/corpus/datasets.hpp"
#include "partnerlab/corpus/ingest.hpp"
#include "partnerlab/corpus/relevance.hpp"
#include "partnerlab/corpus/safety.hpp"
#include "partnerlab/corpus/segment.hpp"
#include "partnerlab/corpus/synthetic.hpp"
#include "test_support.hpp"

using namespace partnerlab;
namespace pt = partnerlab::testing;

TEST_CASE("ingest: good lines, malformed lines and empty input") {
  const std::string good =
      R"({"thread_id":"t1","id":"a","seeker_text":"I feel low.","response_text":"Sorry. Try rest."})"
      "\n"
      R"({"thread_id":"t2","id":"b","seeker_text":"Panic again","response_text":"Breathe slowly.","labels":{"er":1,"ip":0,"ex":2},"mh":true})"
      "\n";
  auto r = ingest_jsonl_string(good);
  REQUIRE(r.pairs.size() == 2);
  CHECK(r.errors.empty());
  CHECK(r.pairs[0].response.sentences == std::vector<std::string>{"Sorry.", "Try rest."});
  CHECK(r.pairs[1].empathy_label == EmpathyScore{1, 0, 2});
  CHECK(r.pairs[1].mental_health == true);

  const std::string mixed =
      R"({"seeker_text":"hello","response_text":"hi there."})"
      "\n{not json\n";
  auto m = ingest_jsonl_string(mixed);
  CHECK(m.pairs.size() == 1);
  REQUIRE(m.errors.size() == 1);
  CHECK(m.errors[0].line == 2);
  IngestOptions strict;
  strict.strict = true;
  CHECK_THROWS_AS(ingest_jsonl_string(mixed, strict), DataError);

  CHECK(ingest_jsonl_string("").pairs.empty());
  CHECK(ingest_jsonl_string("").errors.empty());
}

TEST_CASE("ingest rejects bad field types and label ranges") {
  auto r = ingest_jsonl_string(R"({"seeker_text":1,"response_text":"x"})"
                               "\n"
                               R"({"seeker_text":"a","response_text":"b","labels":{"er":3,"ip":0,"ex":0}})"
                               "\n"
                               R"({"seeker_text":"a"})"
                               "\n");
  CHECK(r.pairs.empty());
  CHECK(r.errors.size() == 3);
  CHECK_THROWS_AS(ingest_jsonl("/nonexistent/corpus.jsonl"), DataError);
}

TEST_CASE("ingest round-trips its own output") {
  auto corpus = pt::synthetic(30, 0.5, 4);
  auto again = ingest_jsonl_string(to_jsonl(corpus));
  REQUIRE(again.pairs.size() == corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CHECK(again.pairs[i].response.text == corpus[i].response.text);
    CHECK(again.pairs[i].thread_id == corpus[i].thread_id);
    CHECK(again.pairs[i].empathy_label == corpus[i].empathy_label);
  }
  CHECK(to_jsonl(again.pairs) == to_jsonl(corpus));
}

TEST_CASE("segmentation examples") {
  CHECK(segment_sentences("Don't worry! Try to relax. Anyone you can talk to?") ==
        std::vector<std::string>{"Don't worry!", "Try to relax.", "Anyone you can talk to?"});
  CHECK(segment_sentences("").empty());
  CHECK(segment_sentences("   ").empty());
  CHECK(segment_sentences("No final punctuation") == std::vector<std::string>{"No final punctuation"});
  CHECK(segment_sentences("Wait... what?! Ok.") == std::vector<std::string>{"Wait...", "what?!", "Ok."});
  CHECK(segment_sentences("See Dr. Smith today. Then rest.") ==
        std::vector<std::string>{"See Dr. Smith today.", "Then rest."});
}

TEST_CASE("segmentation preserves text up to whitespace") {
  for (const auto& p : pt::synthetic(60, 0.5, 9)) {
    auto s = segment_sentences(p.response.text);
    CHECK(join_sentences(s) == text::normalize_whitespace(p.response.text));
    CHECK(segment_sentences(join_sentences(s)) == s);
  }
}

TEST_CASE("safety filter examples") {
  SafetyFilter f = SafetyFilter::load(pt::data_dir() / "safety_patterns.txt");
  CHECK_FALSE(f.check("I might commit suicide tonight").safe);
  CHECK(f.check("I might commit suicide tonight").category == "self_harm");
  CHECK(f.check("Thanks for listening").safe);
  CHECK(SafetyFilter().check("commit suicide").safe);
  CHECK(SafetyFilter::from_patterns({}).check("anything").safe);
  CHECK_THROWS_AS(SafetyFilter::parse("(unclosed\n"), ConfigError);
}

TEST_CASE("safety filter agrees with an independent regex engine") {
  SafetyFilter f = SafetyFilter::load(pt::data_dir() / "safety_patterns.txt");
  std::vector<boost::regex> reference;
  for (const auto& p : f.patterns()) reference.emplace_back(p.source, boost::regex::icase | boost::regex::ECMAScript);
  std::vector<std::string> texts = {"Commit Suicide",   "committing suicide is not the answer", "i will KILL MYSELF",
                                    "killjoy",          "end your life",                        "ending my life story",
                                    "hurting yourself", "cut yourself some slack",              "I want to dine",
                                    "I want to die",    "kill them with kindness",              "thanks, that helped"};
  for (const auto& p : pt::synthetic(50, 0.5, 3)) texts.push_back(p.response.text);
  for (const auto& t : texts) {
    bool expected_unsafe = false;
    for (const auto& re : reference) expected_unsafe = expected_unsafe || boost::regex_search(t, re);
    CHECK_MESSAGE(f.check(t).safe == !expected_unsafe, t);
  }
}

TEST_CASE("relevance filter examples") {
  RelevanceFilter f(std::nullopt, RelevanceFilter::load_keywords(pt::data_dir() / "relevance_keywords.txt"));
  for (const auto& [topic, posts] : pt::templates().seekers) {
    for (const auto& post : posts) CHECK_MESSAGE(f.is_relevant(post) == (topic != "smalltalk"), post);
  }
  CHECK_FALSE(f.is_relevant("happy mother's day"));
  CHECK_FALSE(f.is_relevant(""));
  CHECK_THROWS_AS(RelevanceFilter(std::nullopt, {}), ConfigError);
}

TEST_CASE("trained relevance classifier separates templated seekers") {
  SyntheticSpec spec;
  spec.pairs = 200;
  spec.smalltalk_fraction = 0.3;
  auto corpus = generate_synthetic_corpus(spec, pt::templates(), 5);
  auto clf = RelevanceClassifier::train(corpus);
  std::size_t correct = 0;
  for (const auto& p : corpus) correct += clf.predict(p.seeker.text) == *p.mental_health ? 1 : 0;
  CHECK(static_cast<double>(correct) / static_cast<double>(corpus.size()) >= 0.9);
  RelevanceFilter f(clf, {});
  CHECK_FALSE(f.is_relevant(""));
  pt::TempDir tmp("rel");
  clf.save(tmp.path());
  auto loaded = RelevanceClassifier::load(tmp.path());
  CHECK(loaded.probability(corpus[0].seeker.text) == clf.probability(corpus[0].seeker.text));
  CHECK_THROWS_AS(RelevanceClassifier::train(pt::synthetic(20, 0.5, 1)), DataError);
}

TEST_CASE("warm-start dataset examples") {
  const auto& o = pt::oracle();
  auto pair = make_pair("t", "p", "I feel so alone.", "Try to rest. I am so sorry. Call a friend.");
  auto ex = build_warmstart_dataset({pair}, o);
  REQUIRE(ex.size() == 1);
  CHECK(ex[0].removed_index == 1);
  CHECK(ex[0].target == "Try to rest. Call a friend.");
  CHECK(ex[0].removed_score == 2);

  CHECK(build_warmstart_dataset({make_pair("t", "p", "x", "Go outside. Drink water.")}, o).empty());

  auto two = build_warmstart_dataset({make_pair("t", "p", "x", "I am so sorry. How are you feeling now?")}, o);
  CHECK(two.size() == 2);
}

TEST_CASE("warm-start invariant: target plus the removed sentence restores the response") {
  auto corpus = pt::synthetic(100, 0.3, 21);
  auto examples = build_warmstart_dataset(corpus, pt::oracle());
  CHECK(!examples.empty());
  for (const auto& ex : examples) {
    auto rest = segment_sentences(ex.target);
    rest.insert(rest.begin() + static_cast<std::ptrdiff_t>(ex.removed_index), ex.removed_sentence);
    CHECK(rest == ex.response_sentences);
    CHECK(pt::oracle().score(pt::seeker(ex.seeker_text), ex.removed_sentence).total() >= 2);
  }
}

TEST_CASE("coherence dataset examples") {
  auto a = make_pair("t1", "a", "s1", "First here. Second here.");
  auto b = make_pair("t2", "b", "s2", "Other one. Other two.");
  auto data = build_coherence_dataset({a, b}, 1.0, 3);
  std::size_t pos = 0;
  for (const auto& e : data) pos += e.label == CoherenceLabel::kCoherent ? 1 : 0;
  CHECK(pos == 2);
  CHECK(data.size() == 4);

  auto c = make_pair("t1", "c", "s", "Only one.");
  auto d = make_pair("t2", "d", "s", "Just one.");
  auto singles = build_coherence_dataset({c, d}, 1.0, 3);
  CHECK(singles.empty());

  auto corpus = pt::synthetic(80, 0.5, 2);
  auto x = build_coherence_dataset(corpus, 1.0, 9);
  auto y = build_coherence_dataset(corpus, 1.0, 9);
  REQUIRE(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(x[i].sentence_a == y[i].sentence_a);
    CHECK(x[i].sentence_b == y[i].sentence_b);
    CHECK(x[i].label == y[i].label);
  }
  CHECK_THROWS_AS(build_coherence_dataset({a}, 1.0, 1), DataError);
}

TEST_CASE("coherence positives match an enumeration oracle and negatives never share a thread") {
  auto corpus = pt::synthetic(120, 0.5, 17);
  auto data = build_coherence_dataset(corpus, 1.0, 4);
  std::multiset<std::pair<std::string, std::string>> expected, got;
  for (const auto& p : corpus) {
    const auto& s = p.response.sentences;
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = i + 1; j < s.size(); ++j) expected.insert({s[i], s[j]});
  }
  std::size_t neg = 0;
  for (const auto& e : data) {
    if (e.label == CoherenceLabel::kCoherent) {
      got.insert({e.sentence_a, e.sentence_b});
      CHECK(e.thread_a == e.thread_b);
    } else {
      ++neg;
      CHECK(e.thread_a != e.thread_b);
    }
  }
  CHECK(got == expected);
  CHECK(neg == expected.size());
}

TEST_CASE("dataset rows round-trip through json") {
  auto corpus = pt::synthetic(40, 0.3, 8);
  for (const auto& ex : build_warmstart_dataset(corpus, pt::oracle())) {
    auto back = warmstart_from_json(to_json(ex));
    CHECK(back.target == ex.target);
    CHECK(back.response_sentences == ex.response_sentences);
    CHECK(back.removed_index == ex.removed_index);
  }
  for (const auto& ex : build_coherence_dataset(corpus, 1.0, 1)) {
    auto back = coherence_from_json(to_json(ex));
    CHECK(back.sentence_a == ex.sentence_a);
    CHECK(back.label == ex.label);
    CHECK(back.thread_b == ex.thread_b);
  }
}

TEST_CASE("synthetic corpus: exact low share, determinism, empty") {
  auto c = pt::synthetic(100, 0.8, 1);
  REQUIRE(c.size() == 100);
  int low = 0;
  for (const auto& p : c) low += p.empathy_label->total() <= 1 ? 1 : 0;
  CHECK(low == 80);
  CHECK(to_jsonl(c) == to_jsonl(pt::synthetic(100, 0.8, 1)));
  CHECK(to_jsonl(c) != to_jsonl(pt::synthetic(100, 0.8, 2)));
  CHECK(pt::synthetic(0, 0.8, 1).empty());
  SyntheticSpec bad;
  bad.low_fraction = 1.5;
  CHECK_THROWS_AS(generate_synthetic_corpus(bad, pt::templates(), 1), ConfigError);
}

TEST_CASE("synthetic labels agree with the lexicon oracle") {
  for (double low : {0.0, 0.5, 1.0}) {
    for (const auto& p : pt::synthetic(150, low, 13)) {
      CHECK_MESSAGE(pt::oracle().score(p.seeker, p.response.text) == *p.empathy_label, p.response.text);
      CHECK(p.mental_health == true);
    }
  }
}

TEST_CASE("synthetic threads respect the per-thread cap") {
  SyntheticSpec spec;
  spec.pairs = 90;
  spec.max_responses_per_thread = 3;
  std::map<std::string, int> per_thread;
  std::set<std::string> ids;
  for (const auto& p : generate_synthetic_corpus(spec, pt::templates(), 6)) {
    ++per_thread[p.thread_id];
    ids.insert(p.response.id);
  }
  CHECK(ids.size() == 90);
  for (const auto& [t, n] : per_thread) CHECK(n <= 3);
  CHECK(per_thread.size() > 1);
}

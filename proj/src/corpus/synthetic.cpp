#include "partnerlab/corpus/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "partnerlab/core/checkpoint.hpp"
#include "partnerlab/core/errors.hpp"
#include "partnerlab/core/random.hpp"
#include "partnerlab/core/text.hpp"
#include "partnerlab/corpus/segment.hpp"

namespace fs = std::filesystem;

namespace partnerlab {

namespace {

constexpr const char* kSmalltalk = "smalltalk";
constexpr const char* kMechanismPrefix[3] = {"er", "ip", "ex"};

std::vector<std::vector<std::string>> read_rows(const fs::path& path, std::size_t fields) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(read_text_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = text::trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> row;
    std::size_t start = 0;
    for (std::size_t f = 0; f + 1 < fields; ++f) {
      auto bar = line.find('|', start);
      if (bar == std::string::npos) {
        throw DataError("synthetic", path.string() + ":" + std::to_string(line_no) + ": expected " +
                                         std::to_string(fields) + " '|'-separated fields");
      }
      row.push_back(text::trim(std::string_view(line).substr(start, bar - start)));
      start = bar + 1;
    }
    row.push_back(text::trim(std::string_view(line).substr(start)));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string pair_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "p%05zu", i);
  return buf;
}

std::string thread_id(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "t%05zu", i);
  return buf;
}

// Draws up to n distinct entries in random order.
std::vector<std::string> draw_distinct(const std::vector<std::string>& pool, std::size_t n, Rng& rng) {
  std::vector<std::string> copy = pool;
  rng.shuffle(copy);
  copy.resize(std::min(n, copy.size()));
  return copy;
}

struct Built {
  std::vector<std::string> sentences;
  EmpathyScore label;
};

Built build_low(const SyntheticTemplates& t, const std::string& topic, const SyntheticSpec& spec, Rng& rng) {
  Built b;
  auto advice = draw_distinct(t.pool("advice", topic), 1 + rng.index(2), rng);
  b.sentences = advice;
  if (rng.bernoulli(0.5)) {
    const auto generic = t.pool("generic", topic);
    if (!generic.empty()) {
      const std::string& g = rng.pick(generic);
      if (rng.bernoulli(0.5)) b.sentences.insert(b.sentences.begin(), g);
      else b.sentences.push_back(g);
    }
  }
  if (rng.bernoulli(spec.weak_marker_rate)) {
    int m = static_cast<int>(rng.index(3));
    auto pool = t.pool(std::string(kMechanismPrefix[m]) + "1", topic);
    if (!pool.empty()) {
      const std::string& s = rng.pick(pool);
      if (m == 2) b.sentences.push_back(s);
      else b.sentences.insert(b.sentences.begin(), s);
      if (m == 0) b.label.emotional_reaction = 1;
      if (m == 1) b.label.interpretation = 1;
      if (m == 2) b.label.exploration = 1;
    }
  }
  return b;
}

Built build_high(const SyntheticTemplates& t, const std::string& topic, Rng& rng) {
  static constexpr double kLevelWeights[3] = {0.2, 0.3, 0.5};
  int levels[3] = {0, 0, 0};
  do {
    for (int& l : levels) l = static_cast<int>(rng.categorical(kLevelWeights));
  } while (levels[0] + levels[1] + levels[2] < 2);

  Built b;
  std::string mech_sentence[3];
  for (int m = 0; m < 3; ++m) {
    if (levels[m] == 0) continue;
    auto pool = t.pool(std::string(kMechanismPrefix[m]) + std::to_string(levels[m]), topic);
    if (pool.empty()) {
      levels[m] = 0;
      continue;
    }
    mech_sentence[m] = rng.pick(pool);
  }
  b.label = {levels[0], levels[1], levels[2]};
  if (levels[0]) b.sentences.push_back(mech_sentence[0]);
  if (levels[1]) b.sentences.push_back(mech_sentence[1]);
  static constexpr double kAdviceWeights[3] = {0.2, 0.6, 0.2};
  for (auto& a : draw_distinct(t.pool("advice", topic), rng.categorical(kAdviceWeights), rng)) b.sentences.push_back(a);
  if (levels[2]) b.sentences.push_back(mech_sentence[2]);
  return b;
}

}  // namespace

SyntheticTemplates SyntheticTemplates::load(const fs::path& seekers_path, const fs::path& responses_path) {
  SyntheticTemplates t;
  for (auto& row : read_rows(seekers_path, 2)) t.seekers[row[0]].push_back(row[1]);
  for (auto& row : read_rows(responses_path, 3)) t.sentences[row[0]][row[1]].push_back(row[2]);
  return t;
}

std::vector<std::string> SyntheticTemplates::mental_health_topics() const {
  std::vector<std::string> topics;
  for (const auto& [topic, posts] : seekers) {
    if (topic != kSmalltalk && !posts.empty()) topics.push_back(topic);
  }
  return topics;
}

std::vector<std::string> SyntheticTemplates::pool(const std::string& kind, const std::string& topic) const {
  std::vector<std::string> out;
  auto k = sentences.find(kind);
  if (k == sentences.end()) return out;
  if (auto it = k->second.find(topic); it != k->second.end()) out = it->second;
  if (auto it = k->second.find("*"); it != k->second.end()) out.insert(out.end(), it->second.begin(), it->second.end());
  return out;
}

SyntheticSpec SyntheticSpec::from_config(const KeyValueConfig& cfg, const fs::path& base_dir) {
  SyntheticSpec s;
  long long pairs = cfg.get_int("pairs", static_cast<long long>(s.pairs));
  if (pairs < 0) throw ConfigError("synthetic", "pairs must be non-negative");
  s.pairs = static_cast<std::size_t>(pairs);
  s.low_fraction = cfg.get_double("low_fraction", s.low_fraction);
  s.smalltalk_fraction = cfg.get_double("smalltalk_fraction", s.smalltalk_fraction);
  s.max_responses_per_thread = static_cast<int>(cfg.get_int("max_responses_per_thread", s.max_responses_per_thread));
  s.weak_marker_rate = cfg.get_double("weak_marker_rate", s.weak_marker_rate);
  s.seed = static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<long long>(s.seed)));
  auto resolve = [&](const std::string& key) {
    fs::path p = cfg.require_string(key);
    return p.is_absolute() ? p : base_dir / p;
  };
  s.seekers_path = resolve("templates.seekers");
  s.responses_path = resolve("templates.responses");
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(s.low_fraction) || !in_unit(s.smalltalk_fraction) || !in_unit(s.weak_marker_rate)) {
    throw ConfigError("synthetic", "fractions must lie in [0, 1]");
  }
  if (s.max_responses_per_thread < 1) throw ConfigError("synthetic", "max_responses_per_thread must be >= 1");
  return s;
}

std::vector<ConversationPair> generate_synthetic_corpus(const SyntheticSpec& spec, const SyntheticTemplates& templates,
                                                        std::uint64_t rng_seed) {
  if (spec.pairs == 0) return {};
  const auto topics = templates.mental_health_topics();
  const auto n_small = static_cast<std::size_t>(std::llround(spec.smalltalk_fraction * static_cast<double>(spec.pairs)));
  const auto n_low = static_cast<std::size_t>(std::llround(spec.low_fraction * static_cast<double>(spec.pairs)));
  const std::size_t n_mh = spec.pairs - n_small;
  if (n_mh > 0) {
    if (topics.empty()) throw DataError("synthetic", "template set has no mental-health seeker posts");
    for (const auto& topic : topics) {
      if (templates.pool("advice", topic).empty()) {
        throw DataError("synthetic", "template set has no advice sentences for topic '" + topic + "'");
      }
    }
  }
  if (n_small > 0) {
    auto it = templates.seekers.find(kSmalltalk);
    if (it == templates.seekers.end() || it->second.empty() || templates.pool("smalltalk", kSmalltalk).empty()) {
      throw DataError("synthetic", "template set has no small-talk posts or replies");
    }
  }
  if (n_small > n_low) throw ConfigError("synthetic", "smalltalk_fraction exceeds low_fraction");

  Rng rng(rng_seed);
  // Styles for the mental-health pairs: true = low empathy.
  std::vector<bool> low_style(n_mh, false);
  for (std::size_t i = 0; i < n_low - n_small && i < n_mh; ++i) low_style[i] = true;
  rng.shuffle(low_style);
  if (n_low - n_small > n_mh) throw ConfigError("synthetic", "low_fraction exceeds the available pairs");

  // Group consecutive pairs into threads, keeping small talk separate.
  struct Thread {
    bool smalltalk;
    std::vector<bool> styles;
  };
  std::vector<Thread> threads;
  auto group = [&](std::size_t count, bool smalltalk, const std::vector<bool>& styles) {
    std::size_t i = 0;
    while (i < count) {
      std::size_t size = 1 + rng.index(static_cast<std::size_t>(spec.max_responses_per_thread));
      size = std::min(size, count - i);
      Thread t{smalltalk, {}};
      for (std::size_t k = 0; k < size; ++k) t.styles.push_back(smalltalk ? true : styles[i + k]);
      threads.push_back(std::move(t));
      i += size;
    }
  };
  group(n_mh, false, low_style);
  group(n_small, true, {});
  rng.shuffle(threads);

  std::vector<ConversationPair> out;
  out.reserve(spec.pairs);
  for (std::size_t ti = 0; ti < threads.size(); ++ti) {
    const Thread& th = threads[ti];
    const std::string topic = th.smalltalk ? kSmalltalk : rng.pick(topics);
    const std::string seeker = rng.pick(templates.seekers.at(topic));
    for (bool low : th.styles) {
      Built b;
      if (th.smalltalk) {
        b.sentences = draw_distinct(templates.pool("smalltalk", kSmalltalk), 1 + rng.index(2), rng);
      } else {
        b = low ? build_low(templates, topic, spec, rng) : build_high(templates, topic, rng);
      }
      ConversationPair p = make_pair(thread_id(ti), pair_id(out.size()), seeker, join_sentences(b.sentences));
      p.empathy_label = b.label;
      p.mental_health = !th.smalltalk;
      out.push_back(std::move(p));
    }
  }
  return out;
}

}  // namespace partnerlab

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "partnerlab/core/config.hpp"
#include "partnerlab/corpus/types.hpp"

namespace partnerlab {

// Template sets for the synthetic corpus. Seeker posts are keyed by topic
// ("smalltalk" is the non-mental-health topic). Response sentences are keyed
// by kind (advice, generic, smalltalk, er1, er2, ip1, ip2, ex1, ex2) and then
// by topic, with "*" for sentences that fit any topic.
struct SyntheticTemplates {
  std::map<std::string, std::vector<std::string>> seekers;
  std::map<std::string, std::map<std::string, std::vector<std::string>>> sentences;

  // Files use `field | field | ...` rows with `#` comments:
  //   seekers:   topic | text
  //   responses: kind | topic | sentence
  static SyntheticTemplates load(const std::filesystem::path& seekers_path,
                                 const std::filesystem::path& responses_path);

  std::vector<std::string> mental_health_topics() const;
  // Sentences of `kind` usable for `topic` (topic-specific first, then "*").
  std::vector<std::string> pool(const std::string& kind, const std::string& topic) const;
};

struct SyntheticSpec {
  std::size_t pairs = 200;
  double low_fraction = 0.8;        // share of pairs whose empathy total is <= 1
  double smalltalk_fraction = 0.0;  // share of pairs with a non-mental-health seeker
  int max_responses_per_thread = 2;
  double weak_marker_rate = 0.3;    // low-empathy responses carrying one level-1 marker
  std::filesystem::path seekers_path;
  std::filesystem::path responses_path;
  std::uint64_t seed = 1;

  // Keys: pairs, low_fraction, smalltalk_fraction, max_responses_per_thread,
  // weak_marker_rate, templates.seekers, templates.responses, seed. Relative
  // template paths resolve against base_dir.
  static SyntheticSpec from_config(const KeyValueConfig& cfg, const std::filesystem::path& base_dir);
};

// Templated corpus with construction-time labels: every pair carries the
// per-mechanism levels of the sentences it was built from and a
// mental-health flag. Exactly round(low_fraction * pairs) pairs have an
// empathy total <= 1. Deterministic in (spec, templates, rng_seed).
std::vector<ConversationPair> generate_synthetic_corpus(const SyntheticSpec& spec, const SyntheticTemplates& templates,
                                                        std::uint64_t rng_seed);

}  // namespace partnerlab

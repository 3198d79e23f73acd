#include "partnerlab/eval/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "partnerlab/core/checkpoint.hpp"
#include "partnerlab/core/errors.hpp"
#include "partnerlab/core/hashing.hpp"
#include "partnerlab/core/random.hpp"
#include "partnerlab/core/text.hpp"
#include "partnerlab/core/tokenizer.hpp"
#include "partnerlab/corpus/segment.hpp"

namespace partnerlab {

namespace {

using nlohmann::json;

double sorted_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

double sorted_mean(std::vector<double> values, const char* metric) {
  if (values.empty()) throw DataError("eval", std::string(metric) + ": no scorable records");
  const double n = static_cast<double>(values.size());
  return sorted_sum(std::move(values)) / n;
}

void require_records(const std::vector<EvalRecord>& records, const char* metric) {
  if (records.empty()) throw DataError("eval", std::string(metric) + ": record set is empty");
}

void set_skipped(std::size_t* out, std::size_t value) {
  if (out) *out = value;
}

std::string required_string(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw std::invalid_argument(std::string("missing string field '") + key + "'");
  }
  return j.at(key).get<std::string>();
}

using Ngram = std::vector<std::string>;

std::map<Ngram, int> ngram_counts(const std::vector<std::string>& toks, int n) {
  std::map<Ngram, int> counts;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= toks.size(); ++i) {
    ++counts[Ngram(toks.begin() + static_cast<std::ptrdiff_t>(i), toks.begin() + static_cast<std::ptrdiff_t>(i) + n)];
  }
  return counts;
}

}  // namespace

std::vector<EvalRecord> parse_records(std::string_view jsonl, std::string_view origin) {
  std::vector<EvalRecord> out;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      json j = json::parse(line);
      if (!j.is_object()) throw std::invalid_argument("line is not a JSON object");
      EvalRecord r;
      if (j.contains("id")) {
        const auto& id = j.at("id");
        r.id = id.is_string() ? id.get<std::string>() : id.dump();
      } else {
        r.id = std::to_string(line_no);
      }
      r.seeker_text = required_string(j, "seeker_text");
      r.original_text = required_string(j, "original_text");
      r.rewritten_text = j.contains("rewritten_text") ? required_string(j, "rewritten_text") : r.original_text;
      if (j.contains("reference_text") && !j.at("reference_text").is_null()) {
        r.reference_text = required_string(j, "reference_text");
      }
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw DataError("eval", std::string(origin) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<EvalRecord> read_records(const std::filesystem::path& path) {
  return parse_records(read_text_file(path), path.string());
}

json to_json(const EvalRecord& r) {
  json j = {{"id", r.id},
            {"seeker_text", r.seeker_text},
            {"original_text", r.original_text},
            {"rewritten_text", r.rewritten_text}};
  if (r.reference_text) j["reference_text"] = *r.reference_text;
  return j;
}

std::string to_jsonl(const std::vector<EvalRecord>& records) {
  std::string out;
  for (const auto& r : records) out += to_json(r).dump() + "\n";
  return out;
}

void attach_references(std::vector<EvalRecord>& records, const std::vector<EvalRecord>& references) {
  std::unordered_map<std::string, const EvalRecord*> by_id;
  for (const auto& r : references) by_id[r.id] = &r;
  for (auto& r : records) {
    auto it = by_id.find(r.id);
    if (it == by_id.end()) continue;
    const EvalRecord& ref = *it->second;
    r.reference_text = ref.reference_text ? *ref.reference_text : ref.rewritten_text;
  }
}

nn::Vector HashEmbedder::word_vector(std::string_view word) const {
  Rng rng(hashing::fnv1a(text::to_lower(word), seed_));
  nn::Vector v(dim_);
  for (int i = 0; i < dim_; ++i) v[i] = rng.uniform(-1.0, 1.0);
  return v;
}

nn::Vector HashEmbedder::embed(std::string_view text) const {
  nn::Vector sum = nn::Vector::Zero(dim_);
  const auto words = text::split_words(text);
  if (words.empty()) return sum;
  for (const auto& w : words) sum += word_vector(w);
  return sum / static_cast<double>(words.size());
}

std::optional<double> cosine_similarity(const nn::Vector& a, const nn::Vector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return std::nullopt;
  return a.dot(b) / (na * nb);
}

std::size_t word_levenshtein(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double metric_change_in_empathy(const std::vector<EvalRecord>& records, const EmpathyScorer& scorer) {
  require_records(records, "change_in_empathy");
  std::vector<double> values;
  for (const auto& r : records) {
    SeekerPost seeker;
    seeker.id = r.id;
    seeker.text = r.seeker_text;
    values.push_back(change_in_empathy(scorer, seeker, r.original_text, r.rewritten_text));
  }
  return sorted_mean(std::move(values), "change_in_empathy");
}

double metric_perplexity(const std::vector<EvalRecord>& records, const LanguageModel& lm, std::size_t* skipped) {
  require_records(records, "perplexity");
  std::vector<long double> nll;
  long double words = 0.0L;
  std::size_t skip = 0;
  for (const auto& r : records) {
    if (text::split_words(r.rewritten_text).empty()) {
      ++skip;
      continue;
    }
    NllTotal t = negative_log_likelihood(r.rewritten_text, lm);
    nll.push_back(t.nll);
    words += static_cast<long double>(t.words);
  }
  set_skipped(skipped, skip);
  if (nll.empty()) throw DataError("eval", "perplexity: every rewritten response is empty");
  std::sort(nll.begin(), nll.end());
  long double total = 0.0L;
  for (long double v : nll) total += v;
  return static_cast<double>(std::exp(total / words));
}

double metric_specificity(const std::vector<EvalRecord>& records, const HashEmbedder& embedder, std::size_t* skipped) {
  require_records(records, "specificity");
  std::vector<double> values;
  std::size_t skip = 0;
  for (const auto& r : records) {
    auto c = cosine_similarity(embedder.embed(r.seeker_text), embedder.embed(r.rewritten_text));
    if (!c) {
      ++skip;
      continue;
    }
    values.push_back(*c);
  }
  set_skipped(skipped, skip);
  return sorted_mean(std::move(values), "specificity");
}

double metric_distinct_n(const std::vector<EvalRecord>& records, int n) {
  if (n < 1) throw ConfigError("eval", "distinct-n needs n >= 1");
  std::set<Ngram> distinct;
  std::size_t tokens = 0;
  for (const auto& r : records) {
    auto toks = text::split_words(r.rewritten_text);
    tokens += toks.size();
    for (auto& [g, c] : ngram_counts(toks, n)) distinct.insert(g);
  }
  if (tokens == 0) throw DataError("eval", "distinct_" + std::to_string(n) + ": corpus has no tokens");
  return static_cast<double>(distinct.size()) / static_cast<double>(tokens);
}

double metric_sentence_coherence(const std::vector<EvalRecord>& records, const CoherenceModel& model,
                                 std::size_t* skipped) {
  require_records(records, "sentence_coherence");
  std::vector<double> values;
  std::size_t skip = 0;
  for (const auto& r : records) {
    auto sents = segment_sentences(r.rewritten_text);
    if (sents.empty()) {
      ++skip;
      continue;
    }
    if (sents.size() == 1) {
      values.push_back(1.0);
      continue;
    }
    std::vector<double> pairs;
    for (std::size_t i = 0; i < sents.size(); ++i) {
      for (std::size_t j = i + 1; j < sents.size(); ++j) pairs.push_back(model.coherence_prob(sents[i], sents[j]));
    }
    values.push_back(sorted_mean(std::move(pairs), "sentence_coherence"));
  }
  set_skipped(skipped, skip);
  return sorted_mean(std::move(values), "sentence_coherence");
}

double metric_edit_rate(const std::vector<EvalRecord>& records, std::size_t* skipped) {
  require_records(records, "edit_rate");
  std::vector<double> values;
  std::size_t skip = 0;
  for (const auto& r : records) {
    auto a = text::split_words(r.original_text);
    if (a.empty()) {
      ++skip;
      continue;
    }
    auto b = text::split_words(r.rewritten_text);
    values.push_back(static_cast<double>(word_levenshtein(a, b)) / static_cast<double>(a.size()));
  }
  set_skipped(skipped, skip);
  return sorted_mean(std::move(values), "edit_rate");
}

double metric_bleu(const std::vector<EvalRecord>& records) {
  std::array<long long, 4> matches{}, totals{};
  long long cand_len = 0, ref_len = 0;
  std::size_t used = 0;
  for (const auto& r : records) {
    if (!r.reference_text) continue;
    ++used;
    auto cand = tokenize(r.rewritten_text);
    auto ref = tokenize(*r.reference_text);
    cand_len += static_cast<long long>(cand.size());
    ref_len += static_cast<long long>(ref.size());
    for (int n = 1; n <= 4; ++n) {
      auto c = ngram_counts(cand, n);
      auto rc = ngram_counts(ref, n);
      for (const auto& [g, count] : c) {
        auto it = rc.find(g);
        matches[n - 1] += std::min(count, it == rc.end() ? 0 : it->second);
        totals[n - 1] += count;
      }
    }
  }
  if (used == 0) throw DataError("eval", "bleu: no record has a reference rewriting");
  if (cand_len == 0 || matches[0] == 0) return 0.0;
  double log_sum = 0.0;
  int orders = 0;
  for (int n = 0; n < 4; ++n) {
    if (totals[n] == 0) continue;
    const double m = matches[n] > 0 ? static_cast<double>(matches[n]) : kBleuZeroMatchFloor;
    log_sum += std::log(m / static_cast<double>(totals[n]));
    ++orders;
  }
  const double bp = cand_len >= ref_len ? 1.0 : std::exp(1.0 - static_cast<double>(ref_len) / cand_len);
  return bp * std::exp(log_sum / orders);
}

}  // namespace partnerlab

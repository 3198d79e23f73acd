#include "partnerlab/eval/suite.hpp"

#include <cstdio>
#include <functional>

#include "partnerlab/core/checkpoint.hpp"
#include "partnerlab/core/errors.hpp"
#include "partnerlab/core/text.hpp"
#include "partnerlab/corpus/segment.hpp"

namespace partnerlab {

namespace {

using nlohmann::json;

template <typename F>
auto named(const char* metric, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw DataError("eval", std::string("metric ") + metric + " failed: " + e.what());
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

json MetricReport::to_json() const {
  json j = {{"change_in_empathy", change_in_empathy},
            {"perplexity", perplexity},
            {"specificity", specificity},
            {"distinct_1", distinct_1},
            {"distinct_2", distinct_2},
            {"sentence_coherence", sentence_coherence},
            {"edit_rate", edit_rate},
            {"n", n},
            {"with_reference", with_reference},
            {"skipped", skipped}};
  j["bleu"] = bleu ? json(*bleu) : json(nullptr);
  return j;
}

MetricReport evaluate_suite(const std::vector<EvalRecord>& records, const EvalModels& models, BleuMode bleu) {
  if (records.empty()) throw DataError("eval", "evaluation record set is empty");
  MetricReport r;
  r.n = records.size();
  for (const auto& rec : records) r.with_reference += rec.reference_text ? 1 : 0;
  std::size_t skip = 0;
  r.change_in_empathy = named("change_in_empathy", [&] { return metric_change_in_empathy(records, models.empathy); });
  r.perplexity = named("perplexity", [&] { return metric_perplexity(records, models.lm, &skip); });
  r.skipped["perplexity"] = skip;
  r.specificity = named("specificity", [&] { return metric_specificity(records, models.embedder, &skip); });
  r.skipped["specificity"] = skip;
  r.distinct_1 = named("distinct_1", [&] { return metric_distinct_n(records, 1); });
  r.distinct_2 = named("distinct_2", [&] { return metric_distinct_n(records, 2); });
  r.sentence_coherence =
      named("sentence_coherence", [&] { return metric_sentence_coherence(records, models.coherence, &skip); });
  r.skipped["sentence_coherence"] = skip;
  r.edit_rate = named("edit_rate", [&] { return metric_edit_rate(records, &skip); });
  r.skipped["edit_rate"] = skip;
  if (bleu == BleuMode::kRequired || (bleu == BleuMode::kAuto && r.with_reference > 0)) {
    r.bleu = named("bleu", [&] { return metric_bleu(records); });
  }
  return r;
}

std::string format_report_table(const MetricReport& report) {
  struct Row {
    const char* name;
    const char* arrow;
    std::string value;
  };
  std::vector<Row> rows = {
      {"Change in empathy", "↑", fmt(report.change_in_empathy)},
      {"Perplexity", "↓", fmt(report.perplexity)},
      {"Specificity", "↑", fmt(report.specificity)},
      {"Distinct-1", "↑", fmt(report.distinct_1)},
      {"Distinct-2", "↑", fmt(report.distinct_2)},
      {"Sentence coherence", "↑", fmt(report.sentence_coherence)},
      {"Edit rate", "↓", fmt(report.edit_rate)},
      {"BLEU", "↑", report.bleu ? fmt(*report.bleu) : std::string("n/a")},
  };
  std::size_t name_w = 6, value_w = 5;
  for (const auto& r : rows) {
    name_w = std::max(name_w, std::string(r.name).size());
    value_w = std::max(value_w, r.value.size());
  }
  auto pad_right = [](std::string s, std::size_t w) { return s + std::string(w - std::min(w, s.size()), ' '); };
  auto pad_left = [](std::string s, std::size_t w) { return std::string(w - std::min(w, s.size()), ' ') + s; };
  std::string out = pad_right("Metric", name_w) + "    " + pad_left("Value", value_w) + "\n";
  out += std::string(name_w, '-') + "    " + std::string(value_w, '-') + "\n";
  for (const auto& r : rows) out += pad_right(r.name, name_w) + "  " + r.arrow + " " + pad_left(r.value, value_w) + "\n";
  out += "\nn = " + std::to_string(report.n) + " records";
  if (report.bleu) out += ", " + std::to_string(report.with_reference) + " with references";
  out += "\n↑ higher is better, ↓ lower is better.\n";
  out += "BLEU: corpus-level, 4-gram, uniform weights, brevity penalty. An order with candidate n-grams but no\n"
         "matches counts " +
         fmt(kBleuZeroMatchFloor) +
         " matches (add-epsilon); orders with no candidate n-grams are left out; zero unigram matches give 0.\n";
  return out;
}

std::string per_record_jsonl(const std::vector<EvalRecord>& records, const EvalModels& models) {
  std::string out;
  for (const auto& rec : records) {
    std::vector<EvalRecord> one{rec};
    json j = {{"id", rec.id}};
    SeekerPost seeker;
    seeker.text = rec.seeker_text;
    j["empathy_original"] = models.empathy.score(seeker, rec.original_text).total();
    j["empathy_rewritten"] = models.empathy.score(seeker, rec.rewritten_text).total();
    j["change_in_empathy"] = metric_change_in_empathy(one, models.empathy);
    auto optional_metric = [&](const char* key, const std::function<double()>& f) {
      try {
        j[key] = f();
      } catch (const Error&) {
        j[key] = nullptr;
      }
    };
    optional_metric("perplexity", [&] { return metric_perplexity(one, models.lm); });
    optional_metric("specificity", [&] { return metric_specificity(one, models.embedder); });
    optional_metric("distinct_1", [&] { return metric_distinct_n(one, 1); });
    optional_metric("distinct_2", [&] { return metric_distinct_n(one, 2); });
    optional_metric("sentence_coherence", [&] { return metric_sentence_coherence(one, models.coherence); });
    optional_metric("edit_rate", [&] { return metric_edit_rate(one); });
    if (rec.reference_text) optional_metric("bleu", [&] { return metric_bleu(one); });
    out += j.dump() + "\n";
  }
  return out;
}

void write_report(const std::filesystem::path& dir, const MetricReport& report, const std::vector<EvalRecord>& records,
                  const EvalModels& models, const json& config) {
  write_text_file(dir / "report.json", report.to_json().dump(2) + "\n");
  write_text_file(dir / "report.txt", format_report_table(report));
  write_text_file(dir / "records.jsonl", per_record_jsonl(records, models));
  write_manifest(dir, "eval_report", config, report.to_json());
}

}  // namespace partnerlab

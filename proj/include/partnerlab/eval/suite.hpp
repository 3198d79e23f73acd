#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "partnerlab/eval/metrics.hpp"

namespace partnerlab {

struct MetricReport {
  double change_in_empathy = 0.0;
  double perplexity = 0.0;
  double specificity = 0.0;
  double distinct_1 = 0.0;
  double distinct_2 = 0.0;
  double sentence_coherence = 0.0;
  double edit_rate = 0.0;
  std::optional<double> bleu;
  std::size_t n = 0;
  std::size_t with_reference = 0;
  nlohmann::json skipped = nlohmann::json::object();  // per-metric skipped record counts

  nlohmann::json to_json() const;
};

struct EvalModels {
  const EmpathyScorer& empathy;
  const LanguageModel& lm;
  const CoherenceModel& coherence;
  const HashEmbedder& embedder;
};

enum class BleuMode { kAuto, kRequired, kOff };

// Computes every metric on the same records. BLEU is computed when any
// record has a reference (kAuto), demanded (kRequired, error without
// references) or skipped (kOff). Errors name the failing metric.
MetricReport evaluate_suite(const std::vector<EvalRecord>& records, const EvalModels& models,
                            BleuMode bleu = BleuMode::kAuto);

// Aligned text table with higher/lower-is-better arrows and a footer
// describing the BLEU smoothing.
std::string format_report_table(const MetricReport& report);

// One JSON object per record with the per-record metric values.
std::string per_record_jsonl(const std::vector<EvalRecord>& records, const EvalModels& models);

// Writes report.json, report.txt and records.jsonl (the per-record dump)
// under dir, plus a manifest.
void write_report(const std::filesystem::path& dir, const MetricReport& report, const std::vector<EvalRecord>& records,
                  const EvalModels& models, const nlohmann::json& config);

}  // namespace partnerlab

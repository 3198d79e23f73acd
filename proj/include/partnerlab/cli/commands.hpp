#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "partnerlab/core/config.hpp"
#include "partnerlab/eval/suite.hpp"
#include "partnerlab/policy/rewrite.hpp"
#include "partnerlab/training/config.hpp"

namespace partnerlab::cli {

struct CliOptions {
  std::filesystem::path config_path;  // empty: built-in defaults only
  std::vector<std::string> overrides;  // dotted key=value, applied after the file
  std::optional<std::uint64_t> seed;
  bool strict = false;
  int verbosity = 1;
};

// Effective configuration of one invocation. Relative paths named in the
// config resolve against base_dir (PARTNERLAB_HOME, else the working
// directory); paths given on the command line are used as given.
struct CliContext {
  KeyValueConfig config;
  std::filesystem::path base_dir;
  std::filesystem::path home;
  bool strict = false;
  std::ostream* log = nullptr;

  std::filesystem::path resolve(const std::filesystem::path& p) const;
  std::uint64_t seed() const;
  void info(const std::string& line) const;
};

// Loads the config file, applies overrides, then --seed (as key `seed`).
CliContext make_context(const CliOptions& options, std::ostream* log);

// PARTNERLAB_HOME, or the empty path when unset.
std::filesystem::path home_from_env();

// Section accessors: keys under [synth], [scorers], [policy], [warm], [rl],
// [rewrite], [eval], [serve]; a top-level `seed` is the default for every
// section that reads one.
KeyValueConfig section(const CliContext& ctx, const std::string& name);
RewriteConfig rewrite_config(const CliContext& ctx);
TrainConfig rl_config(const CliContext& ctx);

// Every command writes into an output directory and finishes with a manifest
// carrying the effective config hash.

// corpus.jsonl from the synthetic generator.
void cmd_synth(const CliContext& ctx, const std::filesystem::path& out_dir);

// warmstart.jsonl and coherence.jsonl. The empathy scorer comes from a
// scorer bundle when given, else from the configured lexicon oracle.
void cmd_build_data(const CliContext& ctx, const std::filesystem::path& corpus,
                    const std::optional<std::filesystem::path>& scorers, const std::filesystem::path& out_dir);

// Scorer bundle trained on the corpus.
void cmd_train_scorers(const CliContext& ctx, const std::filesystem::path& corpus,
                       const std::filesystem::path& out_dir);

// Policy checkpoint: vocabulary from the corpus, then warm-start fine-tuning
// on warmstart.jsonl from a build-data directory.
void cmd_train_warm(const CliContext& ctx, const std::filesystem::path& corpus, const std::filesystem::path& data_dir,
                    const std::filesystem::path& out_dir);

// REINFORCE from a warm checkpoint, or from a fresh policy when
// from_scratch is set. Writes the final checkpoint, train_log.jsonl and
// optional step_N/ checkpoints.
void cmd_train_rl(const CliContext& ctx, const std::filesystem::path& corpus, const std::filesystem::path& scorers,
                  const std::optional<std::filesystem::path>& warm, bool from_scratch,
                  const std::filesystem::path& out_dir);

// rewritten.jsonl (evaluation records) and traces.jsonl for every pair of
// the input corpus. Unsafe generated sentences are suppressed and flagged.
void cmd_rewrite(const CliContext& ctx, const std::filesystem::path& input, const std::filesystem::path& policy,
                 const std::optional<std::filesystem::path>& scorers, const std::filesystem::path& out_dir);

// report.json, report.txt, records.jsonl.
MetricReport cmd_eval(const CliContext& ctx, const std::filesystem::path& records,
                      const std::filesystem::path& scorers, const std::optional<std::filesystem::path>& references,
                      BleuMode bleu, const std::filesystem::path& out_dir);

}  // namespace partnerlab::cli

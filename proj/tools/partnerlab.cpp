#include <csignal>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "partnerlab/cli/commands.hpp"
#include "partnerlab/core/errors.hpp"
#include "partnerlab/service/service.hpp"

namespace fs = std::filesystem;
using namespace partnerlab;

namespace {

struct Paths {
  std::string out, corpus, data, scorers, warm, input, policy, records, references, bind, static_dir;
  std::string mode;
  bool from_scratch = false;
  bool bleu = false;
  bool no_bleu = false;
};

fs::path output_dir(const cli::CliContext& ctx, const std::string& given, const std::string& name) {
  if (!given.empty()) return given;
  if (!ctx.home.empty()) return ctx.home / "runs" / name;
  throw ConfigError("cli", "--out is required when PARTNERLAB_HOME is not set");
}

std::optional<fs::path> optional_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return fs::path(s);
}

ServiceConfig service_config(const cli::CliContext& ctx, const Paths& p) {
  KeyValueConfig s = cli::section(ctx, "serve");
  ServiceConfig c;
  c.host = s.get_string("host", c.host);
  c.port = static_cast<int>(s.get_int("port", c.port));
  c.max_request_bytes = static_cast<std::size_t>(s.get_int("max_request_bytes", static_cast<long long>(c.max_request_bytes)));
  if (auto d = s.find("static_dir")) c.static_dir = ctx.resolve(*d);
  if (!p.static_dir.empty()) c.static_dir = p.static_dir;
  if (!p.bind.empty()) {
    auto colon = p.bind.rfind(':');
    if (colon == std::string::npos) throw ConfigError("serve", "--bind expects HOST:PORT");
    c.host = p.bind.substr(0, colon);
    try {
      c.port = std::stoi(p.bind.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("serve", "--bind expects HOST:PORT");
    }
  }
  c.rewrite = cli::rewrite_config(ctx);
  c.weights = cli::rl_config(ctx).weights;
  c.embed_dim = static_cast<int>(cli::section(ctx, "eval").get_int("embed_dim", c.embed_dim));
  return c;
}

int serve(const cli::CliContext& ctx, const Paths& p) {
  if (p.policy.empty() || p.scorers.empty()) throw ConfigError("serve", "--policy and --scorers are required");
  if (!fs::exists(fs::path(p.policy) / "manifest.json")) {
    throw ConfigError("serve", "policy checkpoint not found at " + p.policy);
  }
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  ServiceConfig cfg = service_config(ctx, p);
  RewriteService service(cfg);
  HttpServer server(service);
  int port = server.start();
  ctx.info("listening on " + cfg.host + ":" + std::to_string(port));

  std::thread loader([&] {
    try {
      service.install(ModelSnapshot::load(p.policy, p.scorers, cfg.weights));
      ctx.info("model ready (" + service.snapshot()->model_version + ")");
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      kill(getpid(), SIGTERM);
    }
  });
  int sig = 0;
  sigwait(&signals, &sig);
  server.stop();
  loader.join();
  return service.snapshot() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"partnerlab: sentence-level empathic rewriting"};
  app.require_subcommand(1);
  cli::CliOptions options;
  std::string config_path;
  std::uint64_t seed = 0;
  int verbose = 0;
  bool quiet = false;
  app.add_option("--config", config_path, "Config file (key = value, [section] headers)")->check(CLI::ExistingFile);
  app.add_option("--set", options.overrides, "Override a config key: section.key=value (repeatable)");
  auto* seed_opt = app.add_option("--seed", seed, "Seed for every stage");
  app.add_flag("--strict", options.strict, "Abort on the first malformed input line");
  app.add_flag("-v,--verbose", verbose, "Echo the effective config");
  app.add_flag("-q,--quiet", quiet, "Only print errors");

  Paths p;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth->add_option("--out", p.out, "Output directory");

  auto* build = app.add_subcommand("build-data", "Build warm-start and coherence datasets");
  build->add_option("--corpus", p.corpus, "Corpus JSONL")->required();
  build->add_option("--scorers", p.scorers, "Scorer bundle (default: lexicon oracle from config)");
  build->add_option("--out", p.out, "Output directory");

  auto* train = app.add_subcommand("train", "Train scorers, warm start or RL");
  train->add_option("mode", p.mode, "scorers | warm | rl")->required()->check(CLI::IsMember({"scorers", "warm", "rl"}));
  train->add_option("--corpus", p.corpus, "Corpus JSONL")->required();
  train->add_option("--data", p.data, "build-data output directory (warm)");
  train->add_option("--scorers", p.scorers, "Scorer bundle (rl)");
  train->add_option("--warm", p.warm, "Warm-start checkpoint (rl)");
  train->add_flag("--from-scratch", p.from_scratch, "Start RL from a fresh policy");
  train->add_option("--out", p.out, "Output checkpoint directory");

  auto* rw = app.add_subcommand("rewrite", "Rewrite every pair of a corpus");
  rw->add_option("--input", p.input, "Corpus JSONL")->required();
  rw->add_option("--policy", p.policy, "Policy checkpoint")->required();
  rw->add_option("--scorers", p.scorers, "Scorer bundle (rewards in traces, safety patterns)");
  rw->add_option("--out", p.out, "Output directory");

  auto* ev = app.add_subcommand("eval", "Compute the metric suite");
  ev->add_option("--records", p.records, "Records JSONL")->required();
  ev->add_option("--scorers", p.scorers, "Scorer bundle")->required();
  ev->add_option("--references", p.references, "Reference rewritings JSONL");
  ev->add_flag("--bleu", p.bleu, "Require BLEU against references");
  ev->add_flag("--no-bleu", p.no_bleu, "Skip BLEU");
  ev->add_option("--out", p.out, "Output directory");

  auto* sv = app.add_subcommand("serve", "Serve the HTTP API");
  sv->add_option("--policy", p.policy, "Policy checkpoint");
  sv->add_option("--scorers", p.scorers, "Scorer bundle");
  sv->add_option("--bind", p.bind, "HOST:PORT (default from [serve])");
  sv->add_option("--static", p.static_dir, "Directory served under /app");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    options.config_path = config_path;
    if (*seed_opt) options.seed = seed;
    options.verbosity = quiet ? 0 : 1 + verbose;
    cli::CliContext ctx = cli::make_context(options, options.verbosity > 0 ? &std::cerr : nullptr);

    if (*synth) {
      cli::cmd_synth(ctx, output_dir(ctx, p.out, "corpus"));
    } else if (*build) {
      cli::cmd_build_data(ctx, p.corpus, optional_path(p.scorers), output_dir(ctx, p.out, "data"));
    } else if (*train) {
      if (p.mode == "scorers") {
        cli::cmd_train_scorers(ctx, p.corpus, output_dir(ctx, p.out, "scorers"));
      } else if (p.mode == "warm") {
        if (p.data.empty()) throw ConfigError("train", "warm training needs --data (a build-data directory)");
        cli::cmd_train_warm(ctx, p.corpus, p.data, output_dir(ctx, p.out, "warm"));
      } else {
        if (p.scorers.empty()) throw ConfigError("train", "rl training needs --scorers");
        cli::cmd_train_rl(ctx, p.corpus, p.scorers, optional_path(p.warm), p.from_scratch,
                          output_dir(ctx, p.out, "rl"));
      }
    } else if (*rw) {
      cli::cmd_rewrite(ctx, p.input, p.policy, optional_path(p.scorers), output_dir(ctx, p.out, "rewrites"));
    } else if (*ev) {
      if (p.bleu && p.no_bleu) throw ConfigError("eval", "--bleu and --no-bleu are exclusive");
      BleuMode mode = p.bleu ? BleuMode::kRequired : p.no_bleu ? BleuMode::kOff : BleuMode::kAuto;
      cli::cmd_eval(ctx, p.records, p.scorers, optional_path(p.references), mode, output_dir(ctx, p.out, "eval"));
    } else if (*sv) {
      return serve(ctx, p);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

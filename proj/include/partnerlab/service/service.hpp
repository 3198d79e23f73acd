#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "partnerlab/eval/metrics.hpp"
#include "partnerlab/policy/rewrite.hpp"
#include "partnerlab/training/scorer_bundle.hpp"

namespace httplib {
class Server;
}

namespace partnerlab {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::size_t max_request_bytes = 64 * 1024;
  std::filesystem::path static_dir;  // mounted under /app when set
  RewriteConfig rewrite;
  RewardWeights weights;
  int embed_dim = 64;
};

// Immutable model state shared by concurrent requests.
struct ModelSnapshot {
  std::unique_ptr<RewritePolicy> policy;
  ScorerBundle scorers;
  std::optional<RewardModel> rewards;
  std::string model_version;
  std::string config_hash;

  static std::shared_ptr<const ModelSnapshot> create(std::unique_ptr<RewritePolicy> policy, ScorerBundle scorers,
                                                     const RewardWeights& weights, std::string model_version,
                                                     std::string config_hash);
  // model_version and config_hash come from the policy manifest.
  static std::shared_ptr<const ModelSnapshot> load(const std::filesystem::path& policy_dir,
                                                   const std::filesystem::path& scorers_dir,
                                                   const RewardWeights& weights);
};

struct ServiceReply {
  int status = 200;
  nlohmann::json body;
};

// Request handling independent of the HTTP transport. Every reply body is a
// JSON object; failures carry {error, message} and unsafe input carries the
// pattern category only.
class RewriteService {
 public:
  explicit RewriteService(ServiceConfig config);

  // Atomically replaces the snapshot. Requests in flight keep the snapshot
  // they started with until they finish.
  void install(std::shared_ptr<const ModelSnapshot> snapshot);
  std::shared_ptr<const ModelSnapshot> snapshot() const;

  ServiceReply rewrite(const std::string& body) const;
  ServiceReply score(const std::string& body) const;
  ServiceReply health() const;

  const ServiceConfig& config() const { return config_; }

 private:
  ServiceConfig config_;
  HashEmbedder embedder_;
  mutable std::mutex mutex_;
  std::shared_ptr<const ModelSnapshot> snapshot_;
};

// HTTP front end: POST /rewrite, POST /score, GET /health and the static
// mount under /app.
class HttpServer {
 public:
  explicit HttpServer(RewriteService& service);
  ~HttpServer();

  // Binds and serves on a background thread. Returns the bound port. Throws
  // ConfigError when the address cannot be bound.
  int start();
  // Binds and serves on the calling thread until stop().
  void run();
  void stop();

 private:
  void bind();

  RewriteService& service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace partnerlab

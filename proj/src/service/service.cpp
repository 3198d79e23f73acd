#include "partnerlab/service/service.hpp"

#include <httplib.h>

#include "partnerlab/core/checkpoint.hpp"
#include "partnerlab/core/errors.hpp"
#include "partnerlab/core/text.hpp"
#include "partnerlab/corpus/segment.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace partnerlab {

namespace {

ServiceReply error_reply(int status, const std::string& error, const std::string& message) {
  return {status, {{"error", error}, {"message", message}}};
}

struct BadRequest : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsafeInput {
  std::string category;
};

json parse_object(const std::string& body, std::size_t cap) {
  if (body.size() > cap) throw BadRequest("request body exceeds " + std::to_string(cap) + " bytes");
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception&) {
    throw BadRequest("body is not valid JSON");
  }
  if (!j.is_object()) throw BadRequest("body must be a JSON object");
  return j;
}

std::string string_field(const json& j, const char* key) {
  if (!j.contains(key)) throw BadRequest(std::string("missing field '") + key + "'");
  if (!j.at(key).is_string()) throw BadRequest(std::string("field '") + key + "' must be a string");
  return j.at(key).get<std::string>();
}

void check_safe(const SafetyFilter& safety, std::string_view text) {
  SafetyVerdict v = safety.check(text);
  if (!v.safe) throw UnsafeInput{v.category};
}

template <typename F>
ServiceReply guarded(F&& f) {
  try {
    return f();
  } catch (const BadRequest& e) {
    return error_reply(400, "bad_request", e.what());
  } catch (const UnsafeInput& u) {
    return {422, {{"error", "unsafe_input"}, {"category", u.category}}};
  } catch (const DataError& e) {
    return error_reply(400, "bad_request", e.what());
  } catch (const std::exception& e) {
    return error_reply(500, "internal_error", e.what());
  }
}

json proposal_json(const TraceStep& step, const ModelSnapshot& snap, const SeekerPost& seeker) {
  const std::string before = join_sentences(step.state.response_sentences);
  const std::string after = join_sentences(step.sentences_after);
  return {{"step", step.state.step},
          {"window_start", step.state.window_start},
          {"position", to_json(step.action.position)},
          {"candidate", step.action.candidate},
          {"candidate_truncated", step.candidate_truncated},
          {"provisional_text", after},
          {"reward", step.reward ? to_json(*step.reward) : json(nullptr)},
          {"empathy_before", to_json(snap.scorers.empathy->score(seeker, before))},
          {"empathy_after", to_json(snap.scorers.empathy->score(seeker, after))}};
}

}  // namespace

std::shared_ptr<const ModelSnapshot> ModelSnapshot::create(std::unique_ptr<RewritePolicy> policy, ScorerBundle scorers,
                                                           const RewardWeights& weights, std::string model_version,
                                                           std::string config_hash) {
  auto s = std::make_shared<ModelSnapshot>();
  s->policy = std::move(policy);
  s->scorers = std::move(scorers);
  s->rewards.emplace(s->scorers.reward_model(weights));
  s->model_version = std::move(model_version);
  s->config_hash = std::move(config_hash);
  return s;
}

std::shared_ptr<const ModelSnapshot> ModelSnapshot::load(const fs::path& policy_dir, const fs::path& scorers_dir,
                                                         const RewardWeights& weights) {
  Manifest m = read_manifest(policy_dir, "policy");
  return create(load_policy(policy_dir), ScorerBundle::load(scorers_dir), weights, m.model_version(), m.config_hash);
}

RewriteService::RewriteService(ServiceConfig config) : config_(std::move(config)), embedder_(config_.embed_dim) {
  config_.rewrite.validate();
}

void RewriteService::install(std::shared_ptr<const ModelSnapshot> snapshot) {
  std::lock_guard<std::mutex> lock(mutex_);
  snapshot_ = std::move(snapshot);
}

std::shared_ptr<const ModelSnapshot> RewriteService::snapshot() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return snapshot_;
}

ServiceReply RewriteService::health() const {
  auto snap = snapshot();
  if (!snap) return {200, {{"status", "loading"}, {"model_version", nullptr}, {"config_hash", nullptr}}};
  return {200, {{"status", "ready"}, {"model_version", snap->model_version}, {"config_hash", snap->config_hash}}};
}

ServiceReply RewriteService::rewrite(const std::string& body) const {
  return guarded([&]() -> ServiceReply {
    json req = parse_object(body, config_.max_request_bytes);
    const std::string seeker_text = string_field(req, "seeker_text");
    const std::string response_text = string_field(req, "response_text");
    const std::string mode = req.contains("mode") ? string_field(req, "mode") : "full";
    if (mode != "full" && mode != "step") throw BadRequest("mode must be 'full' or 'step'");
    RewriteConfig rc = config_.rewrite;
    if (req.contains("seed")) {
      if (!req["seed"].is_number_integer() || req["seed"].get<long long>() < 0) {
        throw BadRequest("seed must be a non-negative integer");
      }
      rc.seed = req["seed"].get<std::uint64_t>();
    }
    json prefix = json::array();
    if (req.contains("accepted_prefix")) {
      if (mode != "step") throw BadRequest("accepted_prefix is only valid in step mode");
      if (!req["accepted_prefix"].is_array()) throw BadRequest("accepted_prefix must be an array");
      prefix = req["accepted_prefix"];
    }

    auto snap = snapshot();
    if (!snap) return error_reply(503, "model_not_loaded", "the model snapshot is still loading");
    const SafetyFilter& safety = snap->scorers.safety;
    check_safe(safety, seeker_text);
    check_safe(safety, response_text);

    rc.k = snap->policy->window_size();
    ConversationPair pair = make_pair("request", "request", seeker_text, response_text, rc.max_post_tokens);
    const RewardModel* rewards = &*snap->rewards;
    json proposals = json::array();
    std::string stopped_by;

    if (mode == "full") {
      RewriteTrace trace = partnerlab::rewrite(pair.seeker, pair.response, *snap->policy, rc, rewards, &safety);
      for (const auto& step : trace.steps) {
        if (step.action.position.kind != PositionKind::kStop) proposals.push_back(proposal_json(step, *snap, pair.seeker));
      }
      return {200,
              {{"proposed_edits", proposals},
               {"stopped", true},
               {"stopped_by", stop_reason_name(trace.stopped_by)},
               {"final_text", trace.final.text},
               {"model_version", snap->model_version}}};
    }

    Episode episode(pair.response.sentences, rc.k, rc.max_steps);
    for (const auto& item : prefix) {
      EditAction a;
      try {
        a = edit_action_from_json(item, rc.k);
      } catch (const Error& e) {
        throw BadRequest(std::string("bad accepted_prefix entry: ") + e.what());
      }
      if (a.position.kind == PositionKind::kStop) throw BadRequest("accepted_prefix cannot contain a stop action");
      if (episode.done()) throw BadRequest("accepted_prefix is longer than the episode allows");
      check_safe(safety, a.candidate);
      try {
        episode.advance(a);
      } catch (const Error& e) {
        throw BadRequest(std::string("accepted_prefix is not replayable: ") + e.what());
      }
    }
    bool stopped = episode.done();
    if (stopped) {
      stopped_by = stop_reason_name(episode.reason());
    } else {
      TraceStep step = propose_step(episode, pair.seeker, pair.response.text, *snap->policy, policy_vocabulary(*snap->policy),
                                    rc, rewards, &safety);
      if (step.action.position.kind == PositionKind::kStop) {
        stopped = true;
        stopped_by = stop_reason_name(StopReason::kStopAction);
      } else {
        proposals.push_back(proposal_json(step, *snap, pair.seeker));
      }
    }
    json out = {{"proposed_edits", proposals},
                {"stopped", stopped},
                {"current_text", join_sentences(episode.sentences())},
                {"model_version", snap->model_version}};
    out["stopped_by"] = stopped ? json(stopped_by) : json(nullptr);
    return {200, out};
  });
}

ServiceReply RewriteService::score(const std::string& body) const {
  return guarded([&]() -> ServiceReply {
    json req = parse_object(body, config_.max_request_bytes);
    const std::string seeker_text = req.contains("seeker_text") ? string_field(req, "seeker_text") : "";
    const std::string response_text = string_field(req, "response_text");
    if (text::trim(response_text).empty()) throw BadRequest("response_text must not be empty");
    bool specificity = false;
    if (req.contains("include_specificity")) {
      if (!req["include_specificity"].is_boolean()) throw BadRequest("include_specificity must be a boolean");
      specificity = req["include_specificity"].get<bool>();
    }

    auto snap = snapshot();
    if (!snap) return error_reply(503, "model_not_loaded", "the model snapshot is still loading");
    check_safe(snap->scorers.safety, seeker_text);
    check_safe(snap->scorers.safety, response_text);

    ConversationPair pair = make_pair("request", "request", seeker_text, response_text, config_.rewrite.max_post_tokens);
    const EvalRecord record{"request", pair.seeker.text, pair.response.text, pair.response.text, std::nullopt};
    const RewardWeights& w = snap->rewards->weights();
    json out = {{"empathy", to_json(snap->scorers.empathy->score(pair.seeker, pair.response.text))},
                {"fluency", fluency_reward(pair.response.text, *snap->scorers.fluency_lm)},
                {"coherence", metric_sentence_coherence({record}, *snap->scorers.coherence)},
                {"model_version", snap->model_version}};
    if (!pair.seeker.text.empty()) {
      out["mutual_information"] = mutual_information_reward(pair.seeker.text, pair.response.text,
                                                            *snap->scorers.mi_forward, *snap->scorers.mi_backward,
                                                            w.lambda_mi);
    } else {
      out["mutual_information"] = nullptr;
    }
    out["specificity"] = nullptr;
    if (specificity) {
      auto c = cosine_similarity(embedder_.embed(pair.seeker.text), embedder_.embed(pair.response.text));
      if (c) out["specificity"] = *c;
    }
    return {200, out};
  });
}

HttpServer::HttpServer(RewriteService& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
  auto send = [](httplib::Response& res, const ServiceReply& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server_->set_payload_max_length(service_.config().max_request_bytes);
  server_->Post("/rewrite", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.rewrite(req.body));
  });
  server_->Post("/score", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.score(req.body));
  });
  server_->Get("/health", [this, send](const httplib::Request&, httplib::Response& res) { send(res, service_.health()); });
  server_->Get("/app", [](const httplib::Request&, httplib::Response& res) { res.set_redirect("/app/"); });
  server_->set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    const char* error = res.status == 404 ? "not_found" : res.status == 413 ? "request_too_large" : "bad_request";
    res.set_content(json{{"error", error}, {"message", httplib::status_message(res.status)}}.dump(),
                    "application/json");
  });
  const fs::path& dir = service_.config().static_dir;
  if (!dir.empty()) {
    if (!fs::is_directory(dir)) throw ConfigError("service", "static directory not found: " + dir.string());
    server_->set_mount_point("/app", dir.string());
  }
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::bind() {
  const auto& cfg = service_.config();
  if (cfg.port == 0) {
    port_ = server_->bind_to_any_port(cfg.host);
  } else {
    port_ = server_->bind_to_port(cfg.host, cfg.port) ? cfg.port : -1;
  }
  if (port_ <= 0) {
    throw ConfigError("service", "cannot bind " + cfg.host + ":" + std::to_string(cfg.port) + " (address in use?)");
  }
}

int HttpServer::start() {
  bind();
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  return port_;
}

void HttpServer::run() {
  bind();
  server_->listen_after_bind();
}

void HttpServer::stop() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace partnerlab

#include "partnerlab/corpus/ingest.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

#include "partnerlab/core/checkpoint.hpp"
#include "partnerlab/core/errors.hpp"
#include "partnerlab/core/text.hpp"

namespace partnerlab {

namespace {

using nlohmann::json;

std::string field_as_id(const json& j, const char* key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw std::invalid_argument(std::string("field '") + key + "' must be a string or integer");
}

int label_level(const json& labels, const char* key) {
  if (!labels.contains(key)) throw std::invalid_argument(std::string("labels missing '") + key + "'");
  const auto& v = labels.at(key);
  if (!v.is_number_integer()) throw std::invalid_argument(std::string("label '") + key + "' must be an integer");
  int level = v.get<int>();
  if (level < 0 || level > 2) throw std::invalid_argument(std::string("label '") + key + "' out of range 0-2");
  return level;
}

ConversationPair parse_line(const std::string& line, std::size_t line_no, const IngestOptions& options) {
  json j = json::parse(line);
  if (!j.is_object()) throw std::invalid_argument("line is not a JSON object");
  for (const char* key : {"seeker_text", "response_text"}) {
    if (!j.contains(key) || !j.at(key).is_string()) {
      throw std::invalid_argument(std::string("missing string field '") + key + "'");
    }
  }
  std::string seeker = j.at("seeker_text").get<std::string>();
  if (text::normalize_whitespace(seeker).empty()) throw std::invalid_argument("seeker_text is empty");
  std::string id = field_as_id(j, "id", std::to_string(line_no));
  std::string thread = field_as_id(j, "thread_id", "t" + std::to_string(line_no));
  ConversationPair p = make_pair(thread, id, seeker, j.at("response_text").get<std::string>(), options.max_post_tokens);
  if (j.contains("labels") && !j.at("labels").is_null()) {
    const auto& labels = j.at("labels");
    if (!labels.is_object()) throw std::invalid_argument("labels must be an object");
    p.empathy_label = EmpathyScore{label_level(labels, "er"), label_level(labels, "ip"), label_level(labels, "ex")};
  }
  if (j.contains("mh")) {
    if (!j.at("mh").is_boolean()) throw std::invalid_argument("mh must be a boolean");
    p.mental_health = j.at("mh").get<bool>();
  }
  return p;
}

}  // namespace

IngestResult ingest_jsonl_string(const std::string& content, const IngestOptions& options) {
  IngestResult result;
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      result.pairs.push_back(parse_line(line, line_no, options));
    } catch (const std::exception& e) {
      std::string msg = e.what();
      if (options.strict) throw DataError("ingest", "line " + std::to_string(line_no) + ": " + msg);
      result.errors.push_back({line_no, msg});
    }
  }
  return result;
}

IngestResult ingest_jsonl(const std::filesystem::path& path, const IngestOptions& options) {
  std::string content;
  try {
    content = read_text_file(path);
  } catch (const DataError&) {
    throw DataError("ingest", "cannot read corpus file " + path.string());
  }
  return ingest_jsonl_string(content, options);
}

std::string to_jsonl(const std::vector<ConversationPair>& pairs) {
  std::string out;
  for (const auto& p : pairs) {
    json j = {{"id", p.response.id},
              {"thread_id", p.thread_id},
              {"seeker_text", p.seeker.text},
              {"response_text", p.response.text}};
    if (p.empathy_label) {
      j["labels"] = {{"er", p.empathy_label->emotional_reaction},
                     {"ip", p.empathy_label->interpretation},
                     {"ex", p.empathy_label->exploration}};
    }
    if (p.mental_health) j["mh"] = *p.mental_health;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace partnerlab

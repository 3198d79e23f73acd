#include "partnerlab/core/checkpoint.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <vector>

#include "partnerlab/core/errors.hpp"
#include "partnerlab/core/hashing.hpp"

namespace fs = std::filesystem;

namespace partnerlab {

std::string directory_content_hash(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().filename() == "manifest.json" && entry.path().parent_path() == dir) continue;
    files.push_back(fs::relative(entry.path(), dir));
  }
  std::sort(files.begin(), files.end());
  std::string listing;
  for (const auto& rel : files) {
    listing += rel.generic_string() + " " + hashing::sha256_file(dir / rel) + "\n";
  }
  return hashing::sha256_hex(listing);
}

Manifest write_manifest(const fs::path& dir, const std::string& kind, const nlohmann::json& config,
                        const nlohmann::json& metrics) {
  Manifest m;
  m.kind = kind;
  m.config = config;
  m.config_hash = hashing::sha256_hex(config.dump());
  m.content_hash = directory_content_hash(dir);
  m.metrics = metrics;
  nlohmann::json j = {{"schema_version", m.schema_version}, {"kind", m.kind},
                      {"config", m.config},                 {"config_hash", m.config_hash},
                      {"content_hash", m.content_hash},     {"model_version", m.model_version()},
                      {"metrics", m.metrics}};
  write_text_file(dir / "manifest.json", j.dump(2) + "\n");
  return m;
}

Manifest read_manifest(const fs::path& dir, const std::string& expected_kind) {
  fs::path path = dir / "manifest.json";
  if (!fs::exists(path)) throw ModelError("checkpoint", "no manifest.json in " + dir.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ModelError("checkpoint", path.string() + ": " + e.what());
  }
  Manifest m;
  m.schema_version = j.value("schema_version", 0);
  m.kind = j.value("kind", "");
  m.config = j.value("config", nlohmann::json::object());
  m.config_hash = j.value("config_hash", "");
  m.content_hash = j.value("content_hash", "");
  m.metrics = j.value("metrics", nlohmann::json::object());
  if (m.schema_version != kCheckpointSchemaVersion) {
    throw ModelError("checkpoint", path.string() + ": unsupported schema version " + std::to_string(m.schema_version));
  }
  if (!expected_kind.empty() && m.kind != expected_kind) {
    throw ModelError("checkpoint", dir.string() + " holds a '" + m.kind + "', expected '" + expected_kind + "'");
  }
  return m;
}

void write_text_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("io", "cannot write " + path.string());
  out << content;
  if (!out) throw DataError("io", "failed writing " + path.string());
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("io", "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace partnerlab

#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

namespace partnerlab {

inline constexpr int kCheckpointSchemaVersion = 1;

// manifest.json of a checkpoint or output directory. content_hash covers
// every other file under the directory, so two directories with equal
// content_hash hold byte-identical payloads.
struct Manifest {
  int schema_version = kCheckpointSchemaVersion;
  std::string kind;
  nlohmann::json config = nlohmann::json::object();
  std::string config_hash;
  std::string content_hash;
  nlohmann::json metrics = nlohmann::json::object();

  // Short content version, git-style.
  std::string model_version() const { return content_hash.substr(0, 12); }
};

// Hashes the directory payload and writes manifest.json. The config hash is
// taken over the canonical dump of `config`.
Manifest write_manifest(const std::filesystem::path& dir, const std::string& kind, const nlohmann::json& config,
                        const nlohmann::json& metrics = nlohmann::json::object());

// Reads and validates manifest.json. Throws ModelError when missing, of the
// wrong kind (unless expected_kind is empty) or of another schema version.
Manifest read_manifest(const std::filesystem::path& dir, const std::string& expected_kind = "");

std::string directory_content_hash(const std::filesystem::path& dir);

// Writes text to a file, creating parent directories. Throws DataError.
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace partnerlab

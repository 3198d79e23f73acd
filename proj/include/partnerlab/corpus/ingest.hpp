#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "partnerlab/corpus/types.hpp"

namespace partnerlab {

struct IngestOptions {
  bool strict = false;  // first malformed line aborts with DataError
  int max_post_tokens = kDefaultMaxPostTokens;
};

struct LineError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct IngestResult {
  std::vector<ConversationPair> pairs;
  std::vector<LineError> errors;
};

// Reads a JSONL corpus: one object per line with string fields seeker_text
// and response_text, optional thread_id and id, optional labels {er, ip, ex}
// (integers 0-2) and optional boolean mh. Blank lines are skipped.
IngestResult ingest_jsonl(const std::filesystem::path& path, const IngestOptions& options = {});
IngestResult ingest_jsonl_string(const std::string& content, const IngestOptions& options = {});

// One JSON object per pair, in the format ingest_jsonl reads.
std::string to_jsonl(const std::vector<ConversationPair>& pairs);

}  // namespace partnerlab

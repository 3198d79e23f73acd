#include "partnerlab/policy/actions.hpp"

#include "partnerlab/core/errors.hpp"

namespace partnerlab {

PositionAction position_action(int index, int k) {
  if (k < 1) throw ConfigError("policy", "window size k must be >= 1, got " + std::to_string(k));
  if (index < 0 || index >= action_count(k)) {
    throw ConfigError("policy", "position index " + std::to_string(index) + " outside [0, " +
                                    std::to_string(action_count(k) - 1) + "]");
  }
  if (index <= k) return {index, PositionKind::kInsert, index};
  if (index <= 2 * k) return {index, PositionKind::kReplace, index - (k + 1)};
  return {index, PositionKind::kStop, 0};
}

PositionAction insert_action(int slot, int k) { return position_action(slot, k); }

PositionAction replace_action(int slot, int k) {
  if (slot < 0 || slot >= k) throw ConfigError("policy", "replace slot " + std::to_string(slot) + " out of range");
  return position_action(k + 1 + slot, k);
}

PositionAction stop_action(int k) { return position_action(2 * k + 1, k); }

std::vector<PositionAction> enumerate_actions(int k) {
  std::vector<PositionAction> out;
  for (int i = 0; i < action_count(k); ++i) out.push_back(position_action(i, k));
  return out;
}

const char* kind_name(PositionKind kind) {
  switch (kind) {
    case PositionKind::kInsert:
      return "insert";
    case PositionKind::kReplace:
      return "replace";
    case PositionKind::kStop:
      return "stop";
  }
  return "stop";
}

PositionKind parse_kind(const std::string& name) {
  if (name == "insert") return PositionKind::kInsert;
  if (name == "replace") return PositionKind::kReplace;
  if (name == "stop") return PositionKind::kStop;
  throw DataError("policy", "unknown position kind '" + name + "'");
}

std::vector<std::string> apply_edit(const std::vector<std::string>& sentences, std::size_t window_start,
                                    const EditAction& action) {
  const auto& pos = action.position;
  std::vector<std::string> out = sentences;
  if (pos.kind == PositionKind::kStop) return out;
  const std::size_t at = window_start + static_cast<std::size_t>(pos.slot);
  if (pos.slot < 0) throw DataError("policy", "negative slot");
  if (pos.kind == PositionKind::kInsert) {
    if (at > sentences.size()) {
      throw DataError("policy", "insert position " + std::to_string(at) + " beyond response of " +
                                    std::to_string(sentences.size()) + " sentences");
    }
    if (!action.candidate.empty()) out.insert(out.begin() + static_cast<std::ptrdiff_t>(at), action.candidate);
    return out;
  }
  if (at >= sentences.size()) {
    throw DataError("policy", "replace position " + std::to_string(at) + " beyond response of " +
                                  std::to_string(sentences.size()) + " sentences");
  }
  if (action.candidate.empty()) out.erase(out.begin() + static_cast<std::ptrdiff_t>(at));
  else out[at] = action.candidate;
  return out;
}

int sentence_delta(const EditAction& action) {
  switch (action.position.kind) {
    case PositionKind::kInsert:
      return action.candidate.empty() ? 0 : 1;
    case PositionKind::kReplace:
      return action.candidate.empty() ? -1 : 0;
    case PositionKind::kStop:
      return 0;
  }
  return 0;
}

std::vector<bool> valid_actions(int k, std::size_t window_len) {
  std::vector<bool> valid(static_cast<std::size_t>(action_count(k)), false);
  for (const auto& a : enumerate_actions(k)) {
    auto slot = static_cast<std::size_t>(a.slot);
    switch (a.kind) {
      case PositionKind::kInsert:
        valid[a.index] = slot <= window_len;
        break;
      case PositionKind::kReplace:
        valid[a.index] = slot < window_len;
        break;
      case PositionKind::kStop:
        valid[a.index] = true;
        break;
    }
  }
  return valid;
}

}  // namespace partnerlab

#pragma once

#include <string>
#include <vector>

namespace partnerlab {

enum class PositionKind { kInsert, kReplace, kStop };

// One of the 2k+2 position classes of a k-sentence window. Indices 0..k
// insert before window slot `index`, k+1..2k replace slot `index - (k+1)`,
// and 2k+1 stops the episode.
struct PositionAction {
  int index = 0;
  PositionKind kind = PositionKind::kStop;
  int slot = 0;  // 0 for stop

  bool operator==(const PositionAction&) const = default;
};

inline constexpr int action_count(int k) { return 2 * k + 2; }

// Throws ConfigError for k < 1 or an index outside [0, 2k+1].
PositionAction position_action(int index, int k);
PositionAction insert_action(int slot, int k);
PositionAction replace_action(int slot, int k);
PositionAction stop_action(int k);

std::vector<PositionAction> enumerate_actions(int k);

const char* kind_name(PositionKind kind);
PositionKind parse_kind(const std::string& name);

// A position choice plus the candidate sentence. The candidate is ignored
// for stop; replacing with an empty candidate deletes the slot and inserting
// an empty candidate changes nothing.
struct EditAction {
  PositionAction position;
  std::string candidate;

  bool operator==(const EditAction&) const = default;
};

// Applies an edit addressed relative to window start j. Insert places the
// candidate at global index j+slot, replace substitutes it (or removes the
// sentence when the candidate is empty). Throws DataError when the addressed
// index does not exist.
std::vector<std::string> apply_edit(const std::vector<std::string>& sentences, std::size_t window_start,
                                    const EditAction& action);

// Change in sentence count caused by an edit (+1, 0 or -1).
int sentence_delta(const EditAction& action);

// Which of the 2k+2 classes address an existing position for a window of
// `window_len` sentences (window_len <= k). Stop is always valid.
std::vector<bool> valid_actions(int k, std::size_t window_len);

}  // namespace partnerlab

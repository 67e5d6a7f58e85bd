#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace quotemix {

// One maximal contiguous run of differences between two word sequences.
// Pure insertions have an empty `original`, pure deletions an empty `remix`.
struct DiffSpan {
  std::size_t original_pos = 0;
  std::vector<std::string> original;
  std::size_t remix_pos = 0;
  std::vector<std::string> remix;

  friend bool operator==(const DiffSpan&, const DiffSpan&) = default;
};

enum class EditCountMode {
  span,  // each differing span is one modification
  word,  // each span costs max(removed, inserted) words
};

struct EditCount {
  std::size_t count = 0;
  std::vector<DiffSpan> spans;
  // Per remix word: true when aligned to an identical word of the original.
  std::vector<bool> remix_preserved;
};

// Aligns normalized word sequences on a longest common subsequence. Among all
// LCS alignments the one with the fewest differing spans is chosen; remaining
// ties prefer matching, then deleting, then inserting, scanning left to right.
EditCount word_edit_count(const std::vector<std::string>& original,
                          const std::vector<std::string>& remix,
                          EditCountMode mode = EditCountMode::span);

// Normalizes both strings with normalize_words first.
EditCount word_edit_count(std::string_view original, std::string_view remix,
                          EditCountMode mode = EditCountMode::span);

}  // namespace quotemix

#include "quotemix/edit_count.hpp"

#include <algorithm>

#include "quotemix/domain.hpp"

namespace quotemix {

namespace {

// (matches, blocks): more matches first, then fewer blocks.
struct Score {
  std::size_t matches = 0;
  std::size_t blocks = 0;

  bool better_than(const Score& o) const {
    return matches != o.matches ? matches > o.matches : blocks < o.blocks;
  }
};

enum class Step : unsigned char { none, match, del, ins };

}  // namespace

EditCount word_edit_count(const std::vector<std::string>& a, const std::vector<std::string>& b,
                          EditCountMode mode) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  const std::size_t width = m + 1;
  // table[gap][i * width + j]: best suffix alignment of a[i:], b[j:] entered
  // with (gap = 1) or without (gap = 0) an open differing span.
  std::vector<Score> score[2] = {std::vector<Score>((n + 1) * width), std::vector<Score>((n + 1) * width)};
  std::vector<Step> step[2] = {std::vector<Step>((n + 1) * width, Step::none),
                               std::vector<Step>((n + 1) * width, Step::none)};

  for (std::size_t i = n + 1; i-- > 0;) {
    for (std::size_t j = m + 1; j-- > 0;) {
      if (i == n && j == m) continue;
      for (int gap = 0; gap < 2; ++gap) {
        const std::size_t open = gap == 0 ? 1 : 0;
        Score best{};
        Step chosen = Step::none;
        auto consider = [&](Score s, Step st) {
          if (chosen == Step::none || s.better_than(best)) {
            best = s;
            chosen = st;
          }
        };
        if (i < n && j < m && a[i] == b[j]) {
          Score s = score[0][(i + 1) * width + j + 1];
          ++s.matches;
          consider(s, Step::match);
        }
        if (i < n) {
          Score s = score[1][(i + 1) * width + j];
          s.blocks += open;
          consider(s, Step::del);
        }
        if (j < m) {
          Score s = score[1][i * width + j + 1];
          s.blocks += open;
          consider(s, Step::ins);
        }
        score[gap][i * width + j] = best;
        step[gap][i * width + j] = chosen;
      }
    }
  }

  EditCount result;
  result.remix_preserved.assign(m, false);
  std::size_t i = 0, j = 0;
  int gap = 0;
  DiffSpan* open_span = nullptr;
  while (i < n || j < m) {
    const Step st = step[gap][i * width + j];
    if (st == Step::match) {
      result.remix_preserved[j] = true;
      ++i;
      ++j;
      gap = 0;
      open_span = nullptr;
      continue;
    }
    if (!open_span) {
      result.spans.push_back(DiffSpan{i, {}, j, {}});
      open_span = &result.spans.back();
    }
    if (st == Step::del) {
      open_span->original.push_back(a[i++]);
    } else {
      open_span->remix.push_back(b[j++]);
    }
    gap = 1;
  }

  if (mode == EditCountMode::span) {
    result.count = result.spans.size();
  } else {
    for (const auto& s : result.spans) result.count += std::max(s.original.size(), s.remix.size());
  }
  return result;
}

EditCount word_edit_count(std::string_view original, std::string_view remix, EditCountMode mode) {
  return word_edit_count(normalize_words(original), normalize_words(remix), mode);
}

}  // namespace quotemix

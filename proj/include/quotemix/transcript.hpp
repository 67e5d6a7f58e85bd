#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "quotemix/domain.hpp"

namespace quotemix {

struct WordSwap {
  std::string original;  // empty for a pure insertion
  std::string replacement;

  friend bool operator==(const WordSwap&, const WordSwap&) = default;
};

// One Step 3 proposal: a set of swaps applied together.
struct ReplacementProposal {
  std::vector<WordSwap> swaps;
  std::string reason;
  bool preferred = false;

  friend bool operator==(const ReplacementProposal&, const ReplacementProposal&) = default;
};

struct StepTranscript {
  std::vector<Quote> step1_quotes;
  Quote starred;
  QuoteSegmentation step2_segmentation;
  std::vector<ReplacementProposal> step3_replacements;
  std::string step4_slogan;
  bool sentinel_seen = false;

  // The preferred proposal, else the first; nullptr when Step 3 had none.
  const ReplacementProposal* chosen_replacement() const;

  friend bool operator==(const StepTranscript&, const StepTranscript&) = default;
};

enum class TranscriptErrorKind {
  missing_sentinel,
  missing_step,
  too_few_quotes,
  no_starred_quote,
  unparseable_segmentation,
  empty_final_slogan,
};

std::string_view to_string(TranscriptErrorKind kind);

class TranscriptError : public Error {
 public:
  TranscriptError(TranscriptErrorKind kind, const std::string& detail, std::string raw, int step = 0);

  TranscriptErrorKind kind() const { return kind_; }
  // 1-4 for missing_step, otherwise 0.
  int step() const { return step_; }
  const std::string& raw() const { return raw_; }
  const std::string& detail() const { return detail_; }

 private:
  TranscriptErrorKind kind_;
  std::string detail_;
  std::string raw_;
  int step_;
};

struct TranscriptOptions {
  std::size_t min_quotes = 3;
  QuoteBounds quote_bounds;
};

// Parses a full remix completion.
//
// Accepted shape (lenient about markdown decoration and quote styles):
//   Step 1 Quote Matching:
//   1. "Quote text." — Author | why it fits
//   2. ★ "Starred quote." — Author | why it fits      (★, ⭐, (*), [*] mark the star)
//   Step 2 Structure Breakdown: [New York] | never sleeps.
//   Editable: 1                                       (or inline [..] / (editable))
//   Step 3 Vocabulary Replacement:
//   - ★ New York -> DKNY | brand name replaces the city
//   Step 4 Remix Slogan: "DKNY never sleeps."
//   END_OF_REMIX
StepTranscript parse_transcript(std::string_view raw, const TranscriptOptions& options = {});

// Canonical serialization; parse_transcript(render_transcript(t)) == t.
std::string render_transcript(const StepTranscript& t);

}  // namespace quotemix

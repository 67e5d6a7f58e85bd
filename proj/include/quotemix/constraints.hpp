#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "quotemix/domain.hpp"
#include "quotemix/edit_count.hpp"
#include "quotemix/transcript.hpp"

namespace quotemix {

enum class RuleVerdict { pass, warn, fail };
enum class Severity { strict, warn };

std::string_view to_string(RuleVerdict v);
std::string_view to_string(Severity s);
Severity parse_severity(std::string_view text);

struct ValidationConfig {
  std::size_t max_edits = 2;
  std::size_t max_words = 20;
  EditCountMode edit_mode = EditCountMode::span;
  std::vector<std::string> banned_words{"i", "we", "me", "my", "our"};
  // Replacement spans whose length differs by more than this draw an advisory.
  std::size_t length_slack = 2;

  Severity edits = Severity::strict;
  Severity brand = Severity::strict;
  Severity first_person = Severity::strict;
  Severity punctuation = Severity::strict;
  Severity word_count = Severity::warn;
};

struct RuleOutcome {
  std::string rule;  // edits, brand, first_person, punctuation, word_count
  Severity severity = Severity::strict;
  RuleVerdict verdict = RuleVerdict::pass;
  std::string detail;
};

struct ConstraintReport {
  std::size_t edit_count = 0;
  std::vector<DiffSpan> spans;
  bool brand_present = false;
  std::vector<std::string> first_person_found;
  bool ends_with_punctuation = false;
  std::size_t word_count = 0;
  std::vector<RuleOutcome> rules;
  std::vector<std::string> advisories;
  // fail iff a strict rule failed; warn if any rule warned or an advisory was raised.
  RuleVerdict overall = RuleVerdict::pass;

  const RuleOutcome* rule(std::string_view name) const;
};

// Checks a final slogan against the quote it remixes.
//
// First-person words count only when they sit in material the remix added,
// i.e. remix words not aligned to an identical word of the source quote.
ConstraintReport validate_slogan(std::string_view source_quote, std::string_view slogan, const Brand& brand,
                                 const ValidationConfig& config = {});

// validate_slogan on the transcript's starred quote and Step 4 slogan, plus
// advisories about the chosen Step 3 replacements.
ConstraintReport validate_candidate(const StepTranscript& transcript, const Brand& brand,
                                    const ValidationConfig& config = {});

// Maps the chosen Step 3 swaps onto editable segments. Swaps that fall outside
// every editable segment are dropped and described in `advisories`.
std::vector<Replacement> map_replacements(const StepTranscript& transcript,
                                          std::vector<std::string>* advisories = nullptr);

}  // namespace quotemix

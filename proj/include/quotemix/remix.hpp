#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "quotemix/constraints.hpp"
#include "quotemix/domain.hpp"
#include "quotemix/gateway.hpp"
#include "quotemix/transcript.hpp"

namespace quotemix {

inline constexpr std::string_view kDefaultRefineRubric =
    "Discard slogans that are offensive, misleading, or unsafe for a general audience.";

struct RemixConfig {
  ValidationConfig validation;
  int retry_cap = 3;  // full pipeline attempts per run_remix call
  std::size_t min_quotes = 3;
  QuoteBounds quote_bounds;
  std::string generator_model = "gpt-4o-mini";
  double temperature = 0.9;
  int max_output_tokens = 1024;
  bool refine = false;
  std::string refine_model;  // empty: generator_model
  double refine_temperature = 0.0;
  std::string refine_rubric{kDefaultRefineRubric};
};

// Appended to every generation prompt so each attempt has its own cache entry.
std::string nonce_tail(std::uint64_t nonce);

struct DiscardRecord {
  std::uint64_t nonce = 0;
  std::string reason;  // parse error kind, "constraints", "refine-discard", "duplicate"
  std::string detail;
  std::string raw;
  std::string cache_key;
  std::optional<ConstraintReport> report;
};

struct RefineOutcome {
  enum class Verdict { keep, revise, discard, unparsed };
  Verdict verdict = Verdict::keep;
  std::string slogan;  // revised slogan for revise
  std::string reason;
  std::string raw;
};

std::string_view to_string(RefineOutcome::Verdict v);

// Lenient parse of the three-line polish answer. Unknown shapes yield `unparsed`.
RefineOutcome parse_refine_output(std::string_view raw);

struct RemixResult {
  SloganCandidate candidate;
  ConstraintReport report;
  StepTranscript transcript;
  std::vector<DiscardRecord> discards;
  int attempts = 0;
  std::uint64_t nonce = 0;          // nonce of the accepted attempt
  std::vector<std::string> cache_keys;  // generation (and refinement) requests
  std::optional<RefineOutcome> refinement;
};

class PipelineExhausted : public Error {
 public:
  PipelineExhausted(std::string message, std::vector<DiscardRecord> discards, int attempts);
  const std::vector<DiscardRecord>& discards() const { return discards_; }
  int attempts() const { return attempts_; }

 private:
  std::vector<DiscardRecord> discards_;
  int attempts_;
};

// Prompt -> completion -> parse -> validate (-> optional refinement), retried
// with nonces first_nonce, first_nonce + 1, ... up to retry_cap attempts.
// Gateway errors keep their kind; the message gains a "remix/<stage>" prefix.
RemixResult run_remix(const Brand& brand, const Persona& persona, Gateway& gateway, const RemixConfig& config,
                      std::uint64_t first_nonce = 0);

struct CellOutcome {
  Cell cell;
  std::vector<SloganCandidate> slogans;
  std::vector<std::vector<std::string>> cache_keys;  // parallel to slogans
  std::vector<std::uint64_t> nonces;                 // parallel to slogans
  std::vector<ConstraintReport> reports;             // parallel to slogans; remix cells only
  std::vector<DiscardRecord> discards;
  std::size_t attempts = 0;
  std::optional<std::string> shortfall;  // set when fewer than N were accepted

  SloganSet as_set() const { return SloganSet(cell, slogans); }
};

// Runs run_remix with fresh nonces until N distinct (by normalized words)
// slogans are accepted or attempt_budget generation attempts are spent.
CellOutcome generate_cell(const Brand& brand, const Persona& persona, std::size_t n, Gateway& gateway,
                          const RemixConfig& config, std::uint64_t nonce_base = 0,
                          std::size_t attempt_budget = 0 /* 0: 3 * n */);

struct BaselineConfig {
  std::string name = "baseline";
  std::string model = "gpt-4o-mini";
  double temperature = 0.9;
  int max_output_tokens = 128;
};

std::string build_baseline_prompt(const Brand& brand, const Persona& persona);

// First non-empty line of the completion without surrounding quotes or label.
std::string clean_baseline_output(std::string_view raw);

CellOutcome generate_baseline_cell(const Brand& brand, const Persona& persona, std::size_t n, Gateway& gateway,
                                   const BaselineConfig& config, std::uint64_t nonce_base = 0,
                                   std::size_t attempt_budget = 0 /* 0: 3 * n */);

}  // namespace quotemix

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quotemix/domain.hpp"
#include "quotemix/gateway.hpp"

namespace quotemix {

enum class JudgeDimension { fluency, faithfulness };
enum class PairChoice { A, B, C };
enum class PresentationOrder { ours_first, ours_second };
enum class PairOutcome { win, loss, tie };
enum class Pairing { index_aligned, all_pairs };

std::string_view to_string(JudgeDimension d);
std::string_view to_string(PairChoice c);
std::string_view to_string(PresentationOrder o);
std::string_view to_string(PairOutcome o);
std::string_view to_string(Pairing p);
JudgeDimension parse_dimension(std::string_view text);
PairChoice parse_pair_choice(std::string_view text);
PairOutcome parse_pair_outcome(std::string_view text);
// Accepts "index_aligned"/"index-aligned" and "all_pairs"/"all-pairs".
Pairing parse_pairing(std::string_view text);

class UnparseableVerdict : public Error {
 public:
  UnparseableVerdict(const std::string& message, std::string raw);
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

struct ParsedAnswer {
  char answer = 0;  // '0'/'1' or 'A'/'B'/'C'
  std::string reason;
};

// Strict two-line answer contract:
//   Answer: <x>
//   Reason: <text>
// Leading/trailing whitespace and letter case are free. The Reason line is
// optional, and may instead follow the answer inline as "Answer: x / Reason: ...".
// Anything else, including extra lines, throws UnparseableVerdict.
ParsedAnswer parse_answer(std::string_view raw, std::string_view allowed);

struct BinaryVerdict {
  int value = 0;
  std::string reason;
  std::string raw;
  JudgeDimension dimension = JudgeDimension::faithfulness;
  std::string cache_key;
};

struct PairVerdict {
  PairChoice choice = PairChoice::C;
  std::string reason;
  std::string raw;
  PresentationOrder presentation_order = PresentationOrder::ours_first;
  std::string cache_key;
};

// Both presentation orders of one ours/theirs comparison and their combination.
struct CombinedPairVerdict {
  PairOutcome outcome = PairOutcome::tie;
  PairVerdict ours_first;
  PairVerdict ours_second;
};

BinaryVerdict parse_binary_verdict(std::string_view raw, JudgeDimension dimension);
PairVerdict parse_pair_verdict(std::string_view raw, PresentationOrder order);

struct JudgeConfig {
  std::string model = "gpt-4o-mini";
  double temperature = 0.0;
  int max_output_tokens = 128;
};

std::string render_binary_prompt(const Brand& brand, const Persona& persona, std::string_view slogan,
                                 JudgeDimension dimension);
std::string render_pair_prompt(const Brand& brand, const Persona& persona, std::string_view slogan_a,
                               std::string_view slogan_b);

BinaryVerdict judge_binary(const SloganCandidate& slogan, JudgeDimension dimension, Gateway& gateway,
                           const JudgeConfig& config = {});

struct NoveltyScore {
  double mean = 0.0;  // 100 - percentage judged positive
  double std = 0.0;   // population std of the 0/100 indicators
  std::size_t n = 0;
};

// Throws InvalidArgument on an empty list or mixed dimensions.
NoveltyScore aggregate_novelty(std::span<const BinaryVerdict> verdicts);
// Same arithmetic on raw 0/1 values.
NoveltyScore aggregate_novelty_values(std::span<const int> values);

// Ours is slot A in the first order and slot B in the second. The same winner
// in both orders decides; disagreement or any C is a tie.
PairOutcome combine_orders(PairChoice ours_first, PairChoice ours_second);

// Judges ours vs theirs in both orders.
CombinedPairVerdict judge_pair(const Brand& brand, const Persona& persona, const SloganCandidate& ours,
                               const SloganCandidate& theirs, Gateway& gateway, const JudgeConfig& config = {});

struct HookScore {
  double value = 1.0;
  bool capped = false;  // the denominator was zero
};

inline constexpr double kHookCap = 1e6;

// (W + T/2) / (L + T/2). L = T = 0 yields kHookCap (or 1.0 for an empty tally), flagged capped.
HookScore hook_score(std::int64_t wins, std::int64_t losses, std::int64_t ties);

struct PairRecord {
  std::size_t ours_index = 0;
  std::size_t theirs_index = 0;
  CombinedPairVerdict verdict;
};

struct TournamentTally {
  std::int64_t wins = 0;
  std::int64_t losses = 0;
  std::int64_t ties = 0;
  std::vector<PairRecord> pairs;  // sorted by (ours_index, theirs_index)

  std::int64_t judged() const { return wins + losses + ties; }
  HookScore hook() const { return hook_score(wins, losses, ties); }
  void add(PairOutcome outcome);
};

// Index pairs for a pairing scheme. index_aligned throws InvalidArgument when sizes differ.
std::vector<std::pair<std::size_t, std::size_t>> tournament_pairs(std::size_t ours, std::size_t theirs,
                                                                  Pairing pairing);

TournamentTally run_tournament(const SloganSet& ours, const SloganSet& baseline, Pairing pairing, Gateway& gateway,
                               const JudgeConfig& config = {}, std::size_t parallelism = 1);

}  // namespace quotemix

#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "quotemix/domain.hpp"

namespace quotemix {

using Words = std::vector<std::string>;

class MetricError : public Error {
 public:
  using Error::Error;
};

// Multiset of n-grams; keys are the n words joined with a single space.
struct NGramProfile {
  std::size_t n = 1;
  std::map<std::string, std::size_t> counts;

  static NGramProfile of(const Words& words, std::size_t n);
  std::size_t total() const;
};

struct DiversityScores {
  double distinct2 = 0.0;
  double pairwise_bleu = 0.0;
  double self_bleu = 0.0;
  std::size_t n = 0;
};

// Additive smoothing constant for zero n-gram precisions: p_n = eps / total_n.
inline constexpr double kBleuSmoothingEpsilon = 0.1;
inline constexpr std::size_t kBleuMaxOrder = 4;

// Sentence BLEU with orders 1..min(4, |hyp|), uniform weights, counts clipped
// against the per-n-gram maximum over references, brevity penalty against the
// closest reference length (shorter wins ties). Empty references are ignored.
double sentence_bleu(const Words& hypothesis, std::span<const Words> references);
double sentence_bleu(const Words& hypothesis, const Words& reference);

// |union of n-gram types| / total n-gram tokens. Every sentence needs >= n words.
double distinct_n(std::span<const Words> sentences, std::size_t n);
double distinct2(std::span<const Words> sentences);
// Mean over unordered pairs of (BLEU(a,{b}) + BLEU(b,{a})) / 2.
double pairwise_bleu(std::span<const Words> sentences);
// Mean over i of BLEU(s_i, all others).
double self_bleu(std::span<const Words> sentences);

DiversityScores diversity(std::span<const Words> sentences);

double distinct2(const SloganSet& set);
double pairwise_bleu(const SloganSet& set);
double self_bleu(const SloganSet& set);
DiversityScores diversity(const SloganSet& set);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population (divide by n)
  std::size_t n = 0;
};

MeanStd aggregate_cells(std::span<const double> values);

}  // namespace quotemix

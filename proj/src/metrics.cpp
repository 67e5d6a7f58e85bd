#include "quotemix/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

namespace quotemix {

NGramProfile NGramProfile::of(const Words& words, std::size_t n) {
  if (n == 0) throw MetricError("n-gram order must be >= 1");
  NGramProfile p;
  p.n = n;
  if (words.size() < n) return p;
  for (std::size_t i = 0; i + n <= words.size(); ++i) {
    std::string key = words[i];
    for (std::size_t k = 1; k < n; ++k) {
      key += ' ';
      key += words[i + k];
    }
    ++p.counts[key];
  }
  return p;
}

std::size_t NGramProfile::total() const {
  std::size_t t = 0;
  for (const auto& [_, c] : counts) t += c;
  return t;
}

double sentence_bleu(const Words& hypothesis, std::span<const Words> references) {
  if (hypothesis.empty()) throw MetricError("BLEU hypothesis is empty");
  std::vector<const Words*> refs;
  for (const auto& r : references) {
    if (!r.empty()) refs.push_back(&r);
  }
  if (refs.empty()) throw MetricError("BLEU needs at least one non-empty reference");

  const std::size_t c = hypothesis.size();
  std::size_t r = refs.front()->size();
  for (const auto* ref : refs) {
    auto diff = [&](std::size_t len) { return len > c ? len - c : c - len; };
    if (diff(ref->size()) < diff(r) || (diff(ref->size()) == diff(r) && ref->size() < r)) {
      r = ref->size();
    }
  }

  const std::size_t max_order = std::min(kBleuMaxOrder, c);
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= max_order; ++n) {
    auto hyp = NGramProfile::of(hypothesis, n);
    std::map<std::string, std::size_t> max_ref;
    for (const auto* ref : refs) {
      for (const auto& [gram, count] : NGramProfile::of(*ref, n).counts) {
        auto& slot = max_ref[gram];
        slot = std::max(slot, count);
      }
    }
    std::size_t matched = 0;
    for (const auto& [gram, count] : hyp.counts) {
      auto it = max_ref.find(gram);
      if (it != max_ref.end()) matched += std::min(count, it->second);
    }
    const double total = static_cast<double>(c - n + 1);
    const double precision = matched > 0 ? static_cast<double>(matched) / total
                                         : kBleuSmoothingEpsilon / total;
    log_sum += std::log(precision);
  }
  const double brevity =
      c < r ? std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c)) : 1.0;
  return brevity * std::exp(log_sum / static_cast<double>(max_order));
}

double sentence_bleu(const Words& hypothesis, const Words& reference) {
  return sentence_bleu(hypothesis, std::span<const Words>(&reference, 1));
}

double distinct_n(std::span<const Words> sentences, std::size_t n) {
  if (sentences.empty()) throw MetricError("distinct-n of an empty set");
  std::set<std::string> types;
  std::size_t tokens = 0;
  for (const auto& s : sentences) {
    if (s.size() < n) {
      throw MetricError("sentence '" + join_words(s) + "' has fewer than " + std::to_string(n) +
                        " words");
    }
    auto profile = NGramProfile::of(s, n);
    tokens += profile.total();
    for (const auto& [gram, _] : profile.counts) types.insert(gram);
  }
  return static_cast<double>(types.size()) / static_cast<double>(tokens);
}

double distinct2(std::span<const Words> sentences) { return distinct_n(sentences, 2); }

double pairwise_bleu(std::span<const Words> sentences) {
  const std::size_t n = sentences.size();
  if (n < 2) throw MetricError("pairwise BLEU needs at least 2 sentences");
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      sum += (sentence_bleu(sentences[i], sentences[j]) + sentence_bleu(sentences[j], sentences[i])) / 2.0;
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

double self_bleu(std::span<const Words> sentences) {
  const std::size_t n = sentences.size();
  if (n < 2) throw MetricError("self-BLEU needs at least 2 sentences");
  double sum = 0.0;
  std::vector<Words> others;
  others.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    others.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) others.push_back(sentences[j]);
    }
    sum += sentence_bleu(sentences[i], others);
  }
  return sum / static_cast<double>(n);
}

DiversityScores diversity(std::span<const Words> sentences) {
  return DiversityScores{distinct2(sentences), pairwise_bleu(sentences), self_bleu(sentences),
                         sentences.size()};
}

double distinct2(const SloganSet& set) { return distinct2(set.tokenized()); }
double pairwise_bleu(const SloganSet& set) { return pairwise_bleu(set.tokenized()); }
double self_bleu(const SloganSet& set) { return self_bleu(set.tokenized()); }
DiversityScores diversity(const SloganSet& set) { return diversity(set.tokenized()); }

MeanStd aggregate_cells(std::span<const double> values) {
  if (values.empty()) throw MetricError("cannot aggregate an empty list");
  // Welford accumulation.
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t k = 0;
  for (double x : values) {
    ++k;
    const double delta = x - mean;
    mean += delta / static_cast<double>(k);
    m2 += delta * (x - mean);
  }
  return MeanStd{mean, std::sqrt(std::max(0.0, m2 / static_cast<double>(k))), k};
}

}  // namespace quotemix

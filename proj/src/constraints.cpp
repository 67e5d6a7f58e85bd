#include "quotemix/constraints.hpp"

#include <algorithm>
#include <cstdlib>
#include <optional>

namespace quotemix {

namespace {

bool contains_run(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > hay.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

RuleOutcome outcome(std::string rule, Severity sev, bool ok, std::string detail) {
  RuleVerdict v = RuleVerdict::pass;
  if (!ok) v = sev == Severity::strict ? RuleVerdict::fail : RuleVerdict::warn;
  return RuleOutcome{std::move(rule), sev, v, std::move(detail)};
}

void finish(ConstraintReport& r) {
  r.overall = r.advisories.empty() ? RuleVerdict::pass : RuleVerdict::warn;
  for (const auto& o : r.rules) {
    if (o.verdict == RuleVerdict::fail) {
      r.overall = RuleVerdict::fail;
      return;
    }
    if (o.verdict == RuleVerdict::warn) r.overall = RuleVerdict::warn;
  }
}

}  // namespace

std::string_view to_string(RuleVerdict v) {
  switch (v) {
    case RuleVerdict::pass: return "pass";
    case RuleVerdict::warn: return "warn";
    case RuleVerdict::fail: return "fail";
  }
  return "unknown";
}

std::string_view to_string(Severity s) { return s == Severity::strict ? "strict" : "warn"; }

Severity parse_severity(std::string_view text) {
  if (text == "strict") return Severity::strict;
  if (text == "warn") return Severity::warn;
  throw InvalidArgument("severity must be 'strict' or 'warn', got '" + std::string(text) + "'");
}

const RuleOutcome* ConstraintReport::rule(std::string_view name) const {
  for (const auto& r : rules) {
    if (r.rule == name) return &r;
  }
  return nullptr;
}

ConstraintReport validate_slogan(std::string_view source_quote, std::string_view slogan, const Brand& brand,
                                 const ValidationConfig& config) {
  ConstraintReport r;
  const auto quote_words = normalize_words(source_quote);
  const auto slogan_words = normalize_words(slogan);
  auto diff = word_edit_count(quote_words, slogan_words, config.edit_mode);
  r.edit_count = diff.count;
  r.spans = diff.spans;
  r.brand_present = mentions_brand(slogan, brand);
  r.ends_with_punctuation = ends_with_terminal_punctuation(slogan);
  r.word_count = slogan_words.size();
  for (std::size_t j = 0; j < slogan_words.size(); ++j) {
    if (diff.remix_preserved[j]) continue;
    if (std::find(config.banned_words.begin(), config.banned_words.end(), slogan_words[j]) !=
        config.banned_words.end()) {
      r.first_person_found.push_back(slogan_words[j]);
    }
  }

  r.rules.push_back(outcome("edits", config.edits, r.edit_count <= config.max_edits,
                            std::to_string(r.edit_count) + " of at most " + std::to_string(config.max_edits)));
  r.rules.push_back(outcome("brand", config.brand, r.brand_present,
                            r.brand_present ? "brand mentioned" : "no brand name or keyword"));
  std::string fp;
  for (const auto& w : r.first_person_found) fp += (fp.empty() ? "" : ", ") + w;
  r.rules.push_back(outcome("first_person", config.first_person, r.first_person_found.empty(),
                            fp.empty() ? "none added" : "added: " + fp));
  r.rules.push_back(outcome("punctuation", config.punctuation, r.ends_with_punctuation,
                            r.ends_with_punctuation ? "terminal mark present" : "no terminal . ! ? or …"));
  r.rules.push_back(outcome("word_count", config.word_count, r.word_count <= config.max_words,
                            std::to_string(r.word_count) + " of at most " + std::to_string(config.max_words)));

  for (const auto& s : diff.spans) {
    const auto a = s.original.size();
    const auto b = s.remix.size();
    if (a > 0 && b > 0 && (a > b ? a - b : b - a) > config.length_slack) {
      r.advisories.push_back("replacement '" + join_words(s.original) + "' -> '" + join_words(s.remix) +
                             "' changes length by more than " + std::to_string(config.length_slack) +
                             " words");
    }
  }
  finish(r);
  return r;
}

std::vector<Replacement> map_replacements(const StepTranscript& t, std::vector<std::string>* advisories) {
  std::vector<Replacement> out;
  const auto* chosen = t.chosen_replacement();
  if (!chosen) return out;
  const auto& segs = t.step2_segmentation.segments;
  auto first_editable = std::find_if(segs.begin(), segs.end(), [](const Segment& s) { return s.editable; });
  for (const auto& swap : chosen->swaps) {
    const auto needle = normalize_words(swap.original);
    std::optional<std::size_t> hit;
    if (needle.empty()) {
      if (first_editable != segs.end()) hit = static_cast<std::size_t>(first_editable - segs.begin());
    } else {
      for (std::size_t i = 0; i < segs.size(); ++i) {
        if (segs[i].editable && contains_run(normalize_words(segs[i].text), needle)) {
          hit = i;
          break;
        }
      }
    }
    if (!hit) {
      if (advisories) {
        advisories->push_back("replacement '" + swap.original + "' -> '" + swap.replacement +
                              "' is outside every editable segment");
      }
      continue;
    }
    out.push_back(Replacement{*hit, swap.original, swap.replacement, chosen->reason});
  }
  return out;
}

ConstraintReport validate_candidate(const StepTranscript& t, const Brand& brand, const ValidationConfig& config) {
  auto r = validate_slogan(t.starred.text(), t.step4_slogan, brand, config);
  map_replacements(t, &r.advisories);
  finish(r);
  return r;
}

}  // namespace quotemix

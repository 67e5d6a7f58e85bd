#include "quotemix/domain.hpp"

#include <algorithm>
#include <cctype>

namespace quotemix {

namespace {

constexpr std::array<std::string_view, 8> kDomainNames{
    "beauty", "baby", "appliance", "clothing", "furniture", "household", "nutrition", "electronics"};
constexpr std::array<std::string_view, 5> kPersonaNames{"Pride", "Anticipation", "Fear", "Joy",
                                                        "Trust"};

// Multi-byte punctuation that shows up around words in model output.
constexpr std::array<std::string_view, 10> kUtf8Punctuation{
    "“", "”", "‘", "’", "—", "–", "…", "«", "»",
    "★"};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

std::string trim_copy(std::string_view s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

std::string_view strip_word(std::string_view w) {
  bool changed = true;
  while (changed && !w.empty()) {
    changed = false;
    if (std::ispunct(static_cast<unsigned char>(w.front()))) {
      w.remove_prefix(1);
      changed = true;
      continue;
    }
    for (auto p : kUtf8Punctuation) {
      if (w.starts_with(p)) {
        w.remove_prefix(p.size());
        changed = true;
        break;
      }
    }
  }
  changed = true;
  while (changed && !w.empty()) {
    changed = false;
    if (std::ispunct(static_cast<unsigned char>(w.back()))) {
      w.remove_suffix(1);
      changed = true;
      continue;
    }
    for (auto p : kUtf8Punctuation) {
      if (w.ends_with(p)) {
        w.remove_suffix(p.size());
        changed = true;
        break;
      }
    }
  }
  return w;
}

bool contains_sequence(const std::vector<std::string>& haystack,
                       const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) !=
         haystack.end();
}

}  // namespace

std::string_view to_string(Domain d) { return kDomainNames[static_cast<std::size_t>(d)]; }

std::string_view to_string(PersonaLabel p) { return kPersonaNames[static_cast<std::size_t>(p)]; }

Domain parse_domain(std::string_view text) {
  for (std::size_t i = 0; i < kDomainNames.size(); ++i) {
    if (iequals(kDomainNames[i], text)) return kAllDomains[i];
  }
  throw InvalidArgument("unknown brand domain '" + std::string(text) + "'");
}

PersonaLabel parse_persona_label(std::string_view text) {
  for (std::size_t i = 0; i < kPersonaNames.size(); ++i) {
    if (iequals(kPersonaNames[i], text)) return kAllPersonas[i];
  }
  throw InvalidArgument("unknown persona '" + std::string(text) + "'");
}

Brand::Brand(std::string name, Domain domain, std::vector<std::string> keywords)
    : name_(trim_copy(name)), domain_(domain), keywords_(std::move(keywords)) {
  if (name_.empty()) throw InvalidArgument("brand name must not be empty");
  std::erase_if(keywords_, [](const std::string& k) { return normalize_words(k).empty(); });
}

Persona::Persona(PersonaLabel label, std::string guideline)
    : label_(label), guideline_(trim_copy(guideline)) {}

Quote::Quote(std::string text, std::string author, std::string rationale, const QuoteBounds& bounds)
    : text_(trim_copy(text)), author_(trim_copy(author)), rationale_(trim_copy(rationale)) {
  if (text_.empty()) throw InvalidArgument("quote text must not be empty");
  if (author_.empty()) throw InvalidArgument("quote author must not be empty");
  word_count_ = normalize_words(text_).size();
  if (word_count_ < bounds.hard_min || word_count_ > bounds.hard_max) {
    throw InvalidArgument("quote '" + text_ + "' has " + std::to_string(word_count_) +
                          " words, outside [" + std::to_string(bounds.hard_min) + ", " +
                          std::to_string(bounds.hard_max) + "]");
  }
  within_soft_bounds_ = word_count_ >= bounds.soft_min && word_count_ <= bounds.soft_max;
}

std::string QuoteSegmentation::joined() const {
  std::string out;
  for (const auto& s : segments) {
    if (!out.empty()) out += ' ';
    out += s.text;
  }
  return out;
}

std::string_view to_string(SegmentationIssue issue) {
  switch (issue) {
    case SegmentationIssue::reconstruction_mismatch: return "reconstruction mismatch";
    case SegmentationIssue::no_editable_segment: return "no editable segment";
    case SegmentationIssue::no_fixed_segment: return "no fixed segment";
  }
  return "unknown";
}

bool SegmentationCheck::has(SegmentationIssue issue) const {
  return std::find(issues.begin(), issues.end(), issue) != issues.end();
}

SegmentationCheck validate_segmentation(const QuoteSegmentation& seg) {
  SegmentationCheck check;
  if (normalize_whitespace(seg.joined()) != normalize_whitespace(seg.source.text())) {
    check.issues.push_back(SegmentationIssue::reconstruction_mismatch);
  }
  const bool any_editable =
      std::any_of(seg.segments.begin(), seg.segments.end(), [](const Segment& s) { return s.editable; });
  const bool any_fixed =
      std::any_of(seg.segments.begin(), seg.segments.end(), [](const Segment& s) { return !s.editable; });
  if (!any_editable) check.issues.push_back(SegmentationIssue::no_editable_segment);
  if (!any_fixed) check.issues.push_back(SegmentationIssue::no_fixed_segment);
  return check;
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

std::vector<std::string> normalize_words(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (start == i) break;
    auto word = strip_word(text.substr(start, i - start));
    if (word.empty()) continue;
    std::string lowered(word);
    for (auto& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    words.push_back(std::move(lowered));
  }
  return words;
}

std::string join_words(const std::vector<std::string>& words, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += sep;
    out += words[i];
  }
  return out;
}

std::vector<std::string> RemixTrace::invariant_violations() const {
  std::vector<std::string> out;
  if (matched_quotes.size() < 3) out.push_back("fewer than 3 matched quotes");
  if (std::find(matched_quotes.begin(), matched_quotes.end(), starred_quote) == matched_quotes.end()) {
    out.push_back("starred quote is not among matched quotes");
  }
  for (const auto& r : replacements) {
    if (r.segment_index >= segmentation.segments.size() ||
        !segmentation.segments[r.segment_index].editable) {
      out.push_back("replacement '" + r.original + "' does not point to an editable segment");
    }
  }
  if (raw_transcript.find(kRemixSentinel) == std::string::npos) {
    out.push_back("raw transcript lacks END_OF_REMIX");
  }
  return out;
}

SloganCandidate::SloganCandidate(std::string text, Brand brand, Persona persona, SourceMethod method,
                                 std::optional<RemixTrace> trace)
    : text_(trim_copy(text)),
      brand_(std::move(brand)),
      persona_(std::move(persona)),
      method_(std::move(method)),
      trace_(std::move(trace)) {
  if (text_.empty()) throw InvalidArgument("slogan text must not be empty");
}

std::vector<std::string> SloganCandidate::invariant_violations() const {
  std::vector<std::string> out;
  if (method_.kind != SourceMethod::Kind::remix) return out;
  if (!ends_with_terminal_punctuation(text_)) out.push_back("missing terminal punctuation");
  if (!mentions_brand(text_, brand_)) out.push_back("brand name or keyword absent");
  return out;
}

bool ends_with_terminal_punctuation(std::string_view text) {
  auto t = trim_copy(text);
  std::string_view v = t;
  // Closing quotes/brackets may follow the punctuation mark.
  while (!v.empty()) {
    if (v.back() == '"' || v.back() == '\'' || v.back() == ')') {
      v.remove_suffix(1);
    } else if (v.ends_with("”") || v.ends_with("’")) {
      v.remove_suffix(3);
    } else {
      break;
    }
  }
  if (v.empty()) return false;
  char last = v.back();
  return last == '.' || last == '!' || last == '?' || v.ends_with("…");
}

bool mentions_brand(std::string_view text, const Brand& brand) {
  auto words = normalize_words(text);
  if (contains_sequence(words, normalize_words(brand.name()))) return true;
  return std::any_of(brand.keywords().begin(), brand.keywords().end(),
                     [&](const std::string& k) { return contains_sequence(words, normalize_words(k)); });
}

SloganSet::SloganSet(Cell cell, std::vector<SloganCandidate> slogans)
    : cell_(std::move(cell)), slogans_(std::move(slogans)) {
  for (const auto& s : slogans_) {
    if (!(s.brand() == cell_.brand) || s.persona().label() != cell_.persona.label()) {
      throw InvalidArgument("slogan '" + s.text() + "' does not belong to cell " + cell_.brand.name() +
                            "/" + std::string(cell_.persona.name()));
    }
  }
}

std::vector<std::vector<std::string>> SloganSet::tokenized() const {
  std::vector<std::vector<std::string>> out;
  out.reserve(slogans_.size());
  for (const auto& s : slogans_) out.push_back(normalize_words(s.text()));
  return out;
}

}  // namespace quotemix

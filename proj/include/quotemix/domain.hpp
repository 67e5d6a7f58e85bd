#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace quotemix {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

enum class Domain { beauty, baby, appliance, clothing, furniture, household, nutrition, electronics };

inline constexpr std::array<Domain, 8> kAllDomains{
    Domain::beauty,    Domain::baby,      Domain::appliance, Domain::clothing,
    Domain::furniture, Domain::household, Domain::nutrition, Domain::electronics};

enum class PersonaLabel { Pride, Anticipation, Fear, Joy, Trust };

inline constexpr std::array<PersonaLabel, 5> kAllPersonas{
    PersonaLabel::Pride, PersonaLabel::Anticipation, PersonaLabel::Fear, PersonaLabel::Joy,
    PersonaLabel::Trust};

std::string_view to_string(Domain d);
std::string_view to_string(PersonaLabel p);
// Case-insensitive; throws InvalidArgument for anything outside the fixed label sets.
Domain parse_domain(std::string_view text);
PersonaLabel parse_persona_label(std::string_view text);

class Brand {
 public:
  Brand(std::string name, Domain domain, std::vector<std::string> keywords = {});

  const std::string& name() const { return name_; }
  Domain domain() const { return domain_; }
  const std::vector<std::string>& keywords() const { return keywords_; }

  friend bool operator==(const Brand&, const Brand&) = default;

 private:
  std::string name_;
  Domain domain_;
  std::vector<std::string> keywords_;
};

// An empty guideline is representable so that prompt rendering can report it.
class Persona {
 public:
  explicit Persona(PersonaLabel label, std::string guideline = {});

  PersonaLabel label() const { return label_; }
  std::string_view name() const { return to_string(label_); }
  const std::string& guideline() const { return guideline_; }

  friend bool operator==(const Persona&, const Persona&) = default;

 private:
  PersonaLabel label_;
  std::string guideline_;
};

// Word-count bounds for quotes: outside the soft range is a warning, outside
// the hard range is rejected.
struct QuoteBounds {
  std::size_t soft_min = 5;
  std::size_t soft_max = 10;
  std::size_t hard_min = 2;
  std::size_t hard_max = 25;
};

class Quote {
 public:
  Quote(std::string text, std::string author, std::string rationale = {},
        const QuoteBounds& bounds = {});

  const std::string& text() const { return text_; }
  const std::string& author() const { return author_; }
  const std::string& rationale() const { return rationale_; }
  std::size_t word_count() const { return word_count_; }
  bool within_soft_bounds() const { return within_soft_bounds_; }

  friend bool operator==(const Quote&, const Quote&) = default;

 private:
  std::string text_;
  std::string author_;
  std::string rationale_;
  std::size_t word_count_ = 0;
  bool within_soft_bounds_ = true;
};

struct Segment {
  std::string text;
  bool editable = false;

  friend bool operator==(const Segment&, const Segment&) = default;
};

struct QuoteSegmentation {
  std::vector<Segment> segments;
  Quote source;

  // Segment texts joined on single spaces.
  std::string joined() const;

  friend bool operator==(const QuoteSegmentation&, const QuoteSegmentation&) = default;
};

enum class SegmentationIssue { reconstruction_mismatch, no_editable_segment, no_fixed_segment };

std::string_view to_string(SegmentationIssue issue);

struct SegmentationCheck {
  std::vector<SegmentationIssue> issues;

  bool ok() const { return issues.empty(); }
  bool has(SegmentationIssue issue) const;
};

SegmentationCheck validate_segmentation(const QuoteSegmentation& seg);

// Collapses whitespace runs to one space and trims both ends.
std::string normalize_whitespace(std::string_view text);

// Shared tokenizer for metrics and edit counting: lowercase (ASCII), strip
// leading/trailing punctuation from each whitespace-separated word, drop
// words that become empty.
std::vector<std::string> normalize_words(std::string_view text);

std::string join_words(const std::vector<std::string>& words, std::string_view sep = " ");

struct Replacement {
  std::size_t segment_index = 0;
  std::string original;
  std::string replacement;
  std::string reason;

  friend bool operator==(const Replacement&, const Replacement&) = default;
};

inline constexpr std::string_view kRemixSentinel = "END_OF_REMIX";

struct RemixTrace {
  std::vector<Quote> matched_quotes;
  Quote starred_quote;
  QuoteSegmentation segmentation;
  std::vector<Replacement> replacements;
  std::string final_slogan;
  std::string raw_transcript;

  // Empty when the trace satisfies its invariants.
  std::vector<std::string> invariant_violations() const;
};

struct SourceMethod {
  enum class Kind { remix, baseline };
  Kind kind = Kind::remix;
  std::string name;  // baseline name; "ours" style label for remix

  static SourceMethod remix(std::string label = "ours") { return {Kind::remix, std::move(label)}; }
  static SourceMethod baseline(std::string name) { return {Kind::baseline, std::move(name)}; }

  friend bool operator==(const SourceMethod&, const SourceMethod&) = default;
};

class SloganCandidate {
 public:
  SloganCandidate(std::string text, Brand brand, Persona persona, SourceMethod method,
                  std::optional<RemixTrace> trace = std::nullopt);

  const std::string& text() const { return text_; }
  const Brand& brand() const { return brand_; }
  const Persona& persona() const { return persona_; }
  const SourceMethod& source_method() const { return method_; }
  const std::optional<RemixTrace>& trace() const { return trace_; }

  // Remix-only invariants (terminal punctuation, brand mention). Empty when satisfied.
  std::vector<std::string> invariant_violations() const;

 private:
  std::string text_;
  Brand brand_;
  Persona persona_;
  SourceMethod method_;
  std::optional<RemixTrace> trace_;
};

bool ends_with_terminal_punctuation(std::string_view text);

// True when the normalized words of `text` contain the brand name or one of its
// keywords as a contiguous word sequence.
bool mentions_brand(std::string_view text, const Brand& brand);

struct Cell {
  Brand brand;
  Persona persona;

  friend bool operator==(const Cell&, const Cell&) = default;
};

class SloganSet {
 public:
  SloganSet(Cell cell, std::vector<SloganCandidate> slogans);

  const Cell& cell() const { return cell_; }
  const std::vector<SloganCandidate>& slogans() const { return slogans_; }
  std::size_t size() const { return slogans_.size(); }

  std::vector<std::vector<std::string>> tokenized() const;

 private:
  Cell cell_;
  std::vector<SloganCandidate> slogans_;
};

}  // namespace quotemix

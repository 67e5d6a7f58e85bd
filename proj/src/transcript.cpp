#include "quotemix/transcript.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>

namespace quotemix {

namespace {

constexpr std::array<std::string_view, 5> kStarMarkers{"★", "⭐", "(*)", "[*]", "☆"};
constexpr std::array<std::string_view, 3> kArrows{"->", "→", "=>"};

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool istarts_with(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && lower(s.substr(0, prefix.size())) == lower(prefix);
}

bool iends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && lower(s.substr(s.size() - suffix.size())) == lower(suffix);
}

void erase_all(std::string& s, std::string_view what) {
  for (auto pos = s.find(what); pos != std::string::npos; pos = s.find(what, pos)) s.erase(pos, what.size());
}

// Drops markdown emphasis and code ticks.
std::string strip_markdown(std::string_view line) {
  std::string s(line);
  erase_all(s, "**");
  erase_all(s, "__");
  erase_all(s, "`");
  return s;
}

// Drops leading bullets, numbering and heading marks.
std::string strip_list_marker(std::string_view line) {
  std::string s = trim(line);
  bool changed = true;
  while (changed && !s.empty()) {
    changed = false;
    if (s.starts_with("#") || s.starts_with(">") || s.starts_with("- ") || s.starts_with("* ") ||
        s.starts_with("+ ")) {
      s = trim(std::string_view(s).substr(1));
      changed = true;
    } else if (s.starts_with("•")) {
      s = trim(std::string_view(s).substr(std::string_view("•").size()));
      changed = true;
    } else if (std::isdigit(static_cast<unsigned char>(s[0]))) {
      std::size_t k = 0;
      while (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) ++k;
      if (k < s.size() && (s[k] == '.' || s[k] == ')') && (k + 1 == s.size() || s[k + 1] == ' ')) {
        s = trim(std::string_view(s).substr(k + 1));
        changed = true;
      }
    }
  }
  return s;
}

bool has_star_marker(std::string_view line) {
  for (auto m : kStarMarkers) {
    if (line.find(m) != std::string_view::npos) return true;
  }
  if (line.find("*\"") != std::string_view::npos || line.find("\"*") != std::string_view::npos) return true;
  auto l = lower(line);
  if (l.find("(star)") != std::string::npos || l.find("[star]") != std::string::npos ||
      l.find("(starred)") != std::string::npos || l.find("(best)") != std::string::npos) {
    return true;
  }
  auto bare = strip_list_marker(strip_markdown(line));
  return istarts_with(bare, "star:") || istarts_with(bare, "starred:") || istarts_with(bare, "best:") ||
         istarts_with(bare, "selected:") || (bare.starts_with("*") && !bare.starts_with("* "));
}

std::string strip_star_markers(std::string_view text) {
  std::string s(text);
  for (auto m : kStarMarkers) erase_all(s, m);
  for (auto label : {"(star)", "[star]", "(starred)", "(best)"}) {
    for (auto pos = lower(s).find(label); pos != std::string::npos; pos = lower(s).find(label)) {
      s.erase(pos, std::string_view(label).size());
    }
  }
  return trim(s);
}

struct QuotedSpan {
  std::string text;
  std::string before;
  std::string after;
};

// First quoted string on the line. With `to_last`, the span runs to the last
// closing quote instead of the first.
std::optional<QuotedSpan> find_quoted(std::string_view line, bool to_last = false) {
  auto straight = line.find('"');
  auto curly = line.find("“");
  std::size_t open = std::min(straight, curly);
  if (open == std::string_view::npos) return std::nullopt;
  const std::size_t open_len = (open == curly) ? std::string_view("“").size() : 1;
  const std::size_t body = open + open_len;
  std::size_t close = std::string_view::npos;
  std::size_t close_len = 1;
  auto consider = [&](std::size_t pos, std::size_t len) {
    if (pos == std::string_view::npos) return;
    if (close == std::string_view::npos || (to_last ? pos > close : pos < close)) {
      close = pos;
      close_len = len;
    }
  };
  if (to_last) {
    consider(line.rfind('"') >= body ? line.rfind('"') : std::string_view::npos, 1);
    auto rc = line.rfind("”");
    consider(rc != std::string_view::npos && rc >= body ? rc : std::string_view::npos,
             std::string_view("”").size());
  } else {
    consider(line.find('"', body), 1);
    consider(line.find("”", body), std::string_view("”").size());
  }
  if (close == std::string_view::npos) return std::nullopt;
  return QuotedSpan{trim(line.substr(body, close - body)), std::string(line.substr(0, open)),
                    std::string(line.substr(close + close_len))};
}

std::string strip_leading_separators(std::string s) {
  bool changed = true;
  while (changed) {
    changed = false;
    s = trim(s);
    for (std::string_view sep : {"—", "–", "-", "~", ",", ":", "|", ";"}) {
      if (s.starts_with(sep)) {
        s.erase(0, sep.size());
        changed = true;
      }
    }
  }
  return s;
}

std::pair<std::string, std::string> split_author_rationale(std::string_view after) {
  std::string s = strip_leading_separators(strip_star_markers(after));
  if (istarts_with(s, "by ")) s = trim(std::string_view(s).substr(3));
  std::string author, rest;
  if (s.starts_with("(")) {
    auto close = s.find(')');
    author = trim(std::string_view(s).substr(1, close == std::string::npos ? std::string::npos : close - 1));
    rest = close == std::string::npos ? "" : s.substr(close + 1);
  } else {
    std::size_t cut = std::string::npos;
    std::size_t cut_len = 0;
    for (std::string_view sep : {"|", " — ", " – ", " - ", ": ", "; ", " ("}) {
      auto pos = s.find(sep);
      if (pos != std::string::npos && pos < cut) {
        cut = pos;
        cut_len = sep == " (" ? 1 : sep.size();
      }
    }
    author = trim(std::string_view(s).substr(0, cut));
    rest = cut == std::string::npos ? "" : s.substr(cut + cut_len);
  }
  return {strip_star_markers(author), strip_leading_separators(rest)};
}

std::string unquote(std::string s) {
  s = trim(s);
  for (std::string_view q : {"\"", "“", "”", "'", "‘", "’"}) {
    if (s.starts_with(q)) s.erase(0, q.size());
    if (s.ends_with(q)) s.erase(s.size() - q.size());
  }
  return trim(s);
}

struct Section {
  int step = 0;
  std::vector<std::string> lines;
};

// Returns the step number when the line is a "Step k ..." header, and the
// text after the header's colon.
std::optional<std::pair<int, std::string>> parse_header(std::string_view raw_line) {
  std::string s = strip_list_marker(strip_markdown(raw_line));
  if (!istarts_with(s, "step")) return std::nullopt;
  std::size_t k = 4;
  while (k < s.size() && s[k] == ' ') ++k;
  if (k >= s.size() || !std::isdigit(static_cast<unsigned char>(s[k]))) return std::nullopt;
  const int step = s[k] - '0';
  if (k + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[k + 1]))) return std::nullopt;
  if (step < 1 || step > 4) return std::nullopt;
  auto colon = s.find(':', k);
  std::string rest = colon == std::string::npos ? "" : trim(std::string_view(s).substr(colon + 1));
  return std::make_pair(step, rest);
}

std::vector<std::string> split(std::string_view s, std::string_view sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(std::string(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + sep.size();
  }
  return out;
}

[[noreturn]] void fail(TranscriptErrorKind kind, const std::string& detail, std::string_view raw, int step = 0) {
  throw TranscriptError(kind, detail, std::string(raw), step);
}

std::vector<Quote> parse_quotes(const Section& sec, const TranscriptOptions& opt, std::optional<std::size_t>& starred,
                                std::string_view raw) {
  std::vector<Quote> quotes;
  std::vector<std::vector<std::string>> keys;
  for (const auto& line : sec.lines) {
    auto q = find_quoted(line);
    if (!q) continue;
    const bool star = has_star_marker(line);
    auto text = strip_star_markers(q->text);
    auto [author, rationale] = split_author_rationale(q->after);
    auto key = normalize_words(text);
    auto existing = std::find(keys.begin(), keys.end(), key);
    if (existing != keys.end()) {
      if (star) starred = static_cast<std::size_t>(existing - keys.begin());
      continue;
    }
    try {
      quotes.emplace_back(text, author, rationale, opt.quote_bounds);
    } catch (const InvalidArgument&) {
      continue;  // no author or implausible length: not a usable candidate
    }
    keys.push_back(std::move(key));
    if (star) starred = quotes.size() - 1;
  }
  if (quotes.size() < opt.min_quotes) {
    fail(TranscriptErrorKind::too_few_quotes,
         "Step 1 lists " + std::to_string(quotes.size()) + " usable quotes with authors, need " +
             std::to_string(opt.min_quotes),
         raw);
  }
  return quotes;
}

std::vector<std::size_t> match_segment_items(std::string_view value, const std::vector<Segment>& segs) {
  auto match_one = [&](std::string item) -> std::optional<std::size_t> {
    item = unquote(item);
    if (!item.empty() && item.find_first_not_of("0123456789#") == std::string::npos) {
      erase_all(item, "#");
      if (item.empty()) return std::nullopt;
      auto idx = std::stoul(item);
      if (idx >= 1 && idx <= segs.size()) return idx - 1;
      return std::nullopt;
    }
    auto words = normalize_words(item);
    if (words.empty()) return std::nullopt;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      if (normalize_words(segs[i].text) == words) return i;
    }
    return std::nullopt;
  };
  std::string v = trim(value);
  if (auto whole = match_one(v)) return {*whole};
  for (std::string_view sep : {";", ","}) {
    std::vector<std::size_t> hits;
    bool all = true;
    for (const auto& item : split(v, sep)) {
      if (trim(item).empty()) continue;
      if (auto idx = match_one(item)) {
        hits.push_back(*idx);
      } else {
        all = false;
      }
    }
    if (all && !hits.empty()) return hits;
  }
  return {};
}

QuoteSegmentation parse_segmentation(const Section& sec, const Quote& starred, std::string_view raw) {
  std::optional<std::string> seg_line;
  for (const auto& line : sec.lines) {
    if (line.find('|') == std::string::npos) continue;
    std::string s = strip_list_marker(strip_markdown(line));
    for (std::string_view label : {"segmentation:", "structure:", "breakdown:", "quote:", "segments:"}) {
      if (istarts_with(s, label)) s = trim(std::string_view(s).substr(label.size()));
    }
    seg_line = unquote(s);
    break;
  }
  if (!seg_line) fail(TranscriptErrorKind::unparseable_segmentation, "Step 2 has no '|'-delimited line", raw);

  std::vector<Segment> segs;
  bool annotated = false;
  for (auto part : split(*seg_line, "|")) {
    std::string t = trim(part);
    if (t.empty()) continue;
    std::optional<bool> editable;
    for (auto [marker, value] : {std::pair{"(editable)", true}, std::pair{"[editable]", true},
                                 std::pair{"(fixed)", false}, std::pair{"[fixed]", false}}) {
      if (iends_with(t, marker)) {
        t = trim(std::string_view(t).substr(0, t.size() - std::string_view(marker).size()));
        editable = value;
      }
    }
    if (!editable && t.size() >= 2 &&
        ((t.front() == '[' && t.back() == ']') || (t.front() == '{' && t.back() == '}'))) {
      t = trim(std::string_view(t).substr(1, t.size() - 2));
      editable = true;
    }
    if (editable) annotated = true;
    segs.push_back(Segment{t, editable.value_or(false)});
  }

  for (const auto& line : sec.lines) {
    std::string s = strip_list_marker(strip_markdown(line));
    auto colon = s.find(':');
    if (colon == std::string::npos) continue;
    auto label = lower(trim(std::string_view(s).substr(0, colon)));
    const bool editable_label = label.starts_with("editable");
    const bool fixed_label = label.starts_with("fixed");
    if (!editable_label && !fixed_label) continue;
    auto hits = match_segment_items(std::string_view(s).substr(colon + 1), segs);
    if (hits.empty()) continue;
    if (editable_label) {
      for (auto h : hits) segs[h].editable = true;
    } else if (!annotated) {
      for (auto& sg : segs) sg.editable = true;
      for (auto h : hits) segs[h].editable = false;
    }
    annotated = true;
  }
  if (!annotated) {
    fail(TranscriptErrorKind::unparseable_segmentation, "Step 2 does not mark which parts are editable", raw);
  }

  QuoteSegmentation seg{std::move(segs), starred};
  auto check = validate_segmentation(seg);
  if (!check.ok()) {
    std::string issues;
    for (auto i : check.issues) {
      if (!issues.empty()) issues += ", ";
      issues += to_string(i);
    }
    fail(TranscriptErrorKind::unparseable_segmentation, "Step 2 segmentation invalid: " + issues, raw);
  }
  return seg;
}

std::vector<ReplacementProposal> parse_replacements(const Section& sec) {
  std::vector<ReplacementProposal> out;
  for (const auto& line : sec.lines) {
    if (std::none_of(kArrows.begin(), kArrows.end(),
                     [&](std::string_view a) { return line.find(a) != std::string::npos; })) {
      continue;
    }
    ReplacementProposal prop;
    prop.preferred = has_star_marker(line);
    std::string s = strip_list_marker(strip_markdown(line));
    if (s.starts_with("*") && !s.starts_with("* ")) s.erase(0, 1);
    s = strip_star_markers(s);
    if (istarts_with(s, "set")) {
      auto colon = s.find(':');
      if (colon != std::string::npos && colon < 8) s = trim(std::string_view(s).substr(colon + 1));
    }
    auto bar = s.find('|');
    if (bar != std::string::npos) {
      prop.reason = trim(std::string_view(s).substr(bar + 1));
      s = s.substr(0, bar);
    }
    for (const auto& item : split(s, ";")) {
      std::size_t pos = std::string::npos, len = 0;
      for (auto a : kArrows) {
        auto p = item.find(a);
        if (p != std::string::npos && p < pos) {
          pos = p;
          len = a.size();
        }
      }
      if (pos == std::string::npos) continue;
      auto original = unquote(item.substr(0, pos));
      auto replacement = unquote(item.substr(pos + len));
      auto lo = lower(original);
      if (lo == "(insert)" || lo == "(none)" || lo == "∅") original.clear();
      if (lower(replacement) == "(delete)") replacement.clear();
      prop.swaps.push_back(WordSwap{original, replacement});
    }
    if (!prop.swaps.empty()) out.push_back(std::move(prop));
  }
  return out;
}

std::string parse_final_slogan(const Section& sec, std::string_view raw) {
  for (const auto& line : sec.lines) {
    auto q = find_quoted(line, /*to_last=*/true);
    if (!q) continue;
    if (q->text.empty()) break;
    return q->text;
  }
  fail(TranscriptErrorKind::empty_final_slogan, "Step 4 has no non-empty quoted slogan", raw);
}

}  // namespace

const ReplacementProposal* StepTranscript::chosen_replacement() const {
  for (const auto& p : step3_replacements) {
    if (p.preferred) return &p;
  }
  return step3_replacements.empty() ? nullptr : &step3_replacements.front();
}

std::string_view to_string(TranscriptErrorKind kind) {
  switch (kind) {
    case TranscriptErrorKind::missing_sentinel: return "missing-sentinel";
    case TranscriptErrorKind::missing_step: return "missing-step";
    case TranscriptErrorKind::too_few_quotes: return "fewer-than-3-quotes";
    case TranscriptErrorKind::no_starred_quote: return "no-starred-quote";
    case TranscriptErrorKind::unparseable_segmentation: return "unparseable-segmentation";
    case TranscriptErrorKind::empty_final_slogan: return "empty-final-slogan";
  }
  return "unknown";
}

TranscriptError::TranscriptError(TranscriptErrorKind kind, const std::string& detail, std::string raw, int step)
    : Error(std::string(to_string(kind)) + (step ? "(" + std::to_string(step) + ")" : "") + ": " + detail),
      kind_(kind),
      detail_(detail),
      raw_(std::move(raw)),
      step_(step) {}

StepTranscript parse_transcript(std::string_view raw, const TranscriptOptions& options) {
  auto sentinel = raw.find(kRemixSentinel);
  if (sentinel == std::string_view::npos) {
    auto escaped = raw.find("END\\_OF\\_REMIX");
    if (escaped == std::string_view::npos) {
      fail(TranscriptErrorKind::missing_sentinel, "transcript does not contain END_OF_REMIX", raw);
    }
    sentinel = escaped;
  }
  const auto body = raw.substr(0, sentinel);

  std::vector<Section> sections;
  int expected = 1;
  for (const auto& line : split(body, "\n")) {
    auto header = parse_header(line);
    if (header && header->first == expected) {
      sections.push_back(Section{expected, {}});
      if (!header->second.empty()) sections.back().lines.push_back(header->second);
      ++expected;
      continue;
    }
    if (!sections.empty()) sections.back().lines.push_back(trim(line));
  }
  if (expected <= 4) {
    fail(TranscriptErrorKind::missing_step, "Step " + std::to_string(expected) + " header not found", raw,
         expected);
  }

  std::optional<std::size_t> starred;
  auto quotes = parse_quotes(sections[0], options, starred, raw);
  if (!starred) fail(TranscriptErrorKind::no_starred_quote, "no Step 1 quote is marked with a star", raw);
  Quote star = quotes[*starred];
  auto segmentation = parse_segmentation(sections[1], star, raw);
  auto replacements = parse_replacements(sections[2]);
  auto slogan = parse_final_slogan(sections[3], raw);
  return StepTranscript{std::move(quotes), std::move(star), std::move(segmentation), std::move(replacements),
                        std::move(slogan), true};
}

std::string render_transcript(const StepTranscript& t) {
  std::string out = "Step 1 Quote Matching:\n";
  for (std::size_t i = 0; i < t.step1_quotes.size(); ++i) {
    const auto& q = t.step1_quotes[i];
    out += std::to_string(i + 1) + ". ";
    if (q == t.starred) out += "★ ";
    out += "\"" + q.text() + "\" — " + q.author();
    if (!q.rationale().empty()) out += " | " + q.rationale();
    out += "\n";
  }
  out += "Step 2 Structure Breakdown: ";
  std::string editable;
  const auto& segs = t.step2_segmentation.segments;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (i) out += " | ";
    out += segs[i].text;
    if (segs[i].editable) {
      if (!editable.empty()) editable += "; ";
      editable += std::to_string(i + 1);
    }
  }
  out += "\nEditable: " + editable + "\n";
  out += "Step 3 Vocabulary Replacement:\n";
  for (const auto& p : t.step3_replacements) {
    out += "- ";
    if (p.preferred) out += "★ ";
    for (std::size_t i = 0; i < p.swaps.size(); ++i) {
      if (i) out += "; ";
      out += (p.swaps[i].original.empty() ? std::string("(insert)") : p.swaps[i].original) + " -> " +
             (p.swaps[i].replacement.empty() ? std::string("(delete)") : p.swaps[i].replacement);
    }
    if (!p.reason.empty()) out += " | " + p.reason;
    out += "\n";
  }
  out += "Step 4 Remix Slogan: \"" + t.step4_slogan + "\"\n";
  out += std::string(kRemixSentinel) + "\n";
  return out;
}

}  // namespace quotemix

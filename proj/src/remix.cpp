#include "quotemix/remix.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "quotemix/prompts.hpp"

namespace quotemix {

namespace {

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

std::vector<std::string> lines_of(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    out.push_back(trim(text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start)));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return out;
}

std::string strip_quotes(std::string s) {
  s = trim(s);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::string_view q : {"\"", "“", "”", "'", "‘", "’"}) {
      if (s.size() >= 2 * q.size() && s.starts_with(q)) {
        s.erase(0, q.size());
        changed = true;
      }
      if (s.size() >= q.size() && s.ends_with(q)) {
        s.erase(s.size() - q.size());
        changed = true;
      }
    }
    s = trim(s);
  }
  return s;
}

std::string strip_emphasis(std::string s) {
  for (std::string_view mark : {"**", "__", "`"}) {
    for (auto pos = s.find(mark); pos != std::string::npos; pos = s.find(mark)) s.erase(pos, mark.size());
  }
  return trim(s);
}

ChatResponse complete_stage(Gateway& gateway, const ChatRequest& req, std::string_view stage) {
  try {
    return gateway.complete(req);
  } catch (const GatewayError& e) {
    throw GatewayError(e.kind(), "remix/" + std::string(stage) + ": " + e.what(), e.attempts(), e.last_kind());
  }
}

std::string failing_rules(const ConstraintReport& r) {
  std::string out;
  for (const auto& rule : r.rules) {
    if (rule.verdict != RuleVerdict::fail) continue;
    if (!out.empty()) out += "; ";
    out += rule.rule + ": " + rule.detail;
  }
  return out;
}

}  // namespace

std::string nonce_tail(std::uint64_t nonce) { return "\n\n[sample " + std::to_string(nonce) + "]"; }

std::string_view to_string(RefineOutcome::Verdict v) {
  switch (v) {
    case RefineOutcome::Verdict::keep: return "keep";
    case RefineOutcome::Verdict::revise: return "revise";
    case RefineOutcome::Verdict::discard: return "discard";
    case RefineOutcome::Verdict::unparsed: return "unparsed";
  }
  return "unknown";
}

RefineOutcome parse_refine_output(std::string_view raw) {
  RefineOutcome out;
  out.raw = std::string(raw);
  std::optional<RefineOutcome::Verdict> verdict;
  for (const auto& line : lines_of(raw)) {
    auto s = strip_emphasis(line);
    auto colon = s.find(':');
    if (colon == std::string::npos) continue;
    auto label = lower(trim(std::string_view(s).substr(0, colon)));
    auto value = trim(std::string_view(s).substr(colon + 1));
    if (label == "verdict" && !verdict) {
      auto v = lower(value);
      if (v.starts_with("keep")) verdict = RefineOutcome::Verdict::keep;
      else if (v.starts_with("revise")) verdict = RefineOutcome::Verdict::revise;
      else if (v.starts_with("discard")) verdict = RefineOutcome::Verdict::discard;
    } else if (label == "slogan" && out.slogan.empty()) {
      out.slogan = strip_quotes(value);
    } else if (label == "reason" && out.reason.empty()) {
      out.reason = value;
    }
  }
  if (!verdict || (*verdict == RefineOutcome::Verdict::revise && out.slogan.empty())) {
    out.verdict = RefineOutcome::Verdict::unparsed;
  } else {
    out.verdict = *verdict;
  }
  return out;
}

PipelineExhausted::PipelineExhausted(std::string message, std::vector<DiscardRecord> discards, int attempts)
    : Error(std::move(message)), discards_(std::move(discards)), attempts_(attempts) {}

RemixResult run_remix(const Brand& brand, const Persona& persona, Gateway& gateway, const RemixConfig& config,
                      std::uint64_t first_nonce) {
  if (config.retry_cap < 1) throw InvalidArgument("retry_cap must be at least 1");
  const auto prompt = build_remix_prompt(brand, persona);
  const TranscriptOptions parse_options{config.min_quotes, config.quote_bounds};
  std::vector<DiscardRecord> discards;
  std::vector<std::string> keys;

  for (int attempt = 1; attempt <= config.retry_cap; ++attempt) {
    const std::uint64_t nonce = first_nonce + static_cast<std::uint64_t>(attempt - 1);
    ChatRequest req;
    req.user_text = prompt.rendered + nonce_tail(nonce);
    req.temperature = config.temperature;
    req.max_output_tokens = config.max_output_tokens;
    req.model_id = config.generator_model;
    auto resp = complete_stage(gateway, req, "generate");
    keys.push_back(resp.cache_key);

    std::optional<StepTranscript> parsed;
    try {
      parsed = parse_transcript(resp.text, parse_options);
    } catch (const TranscriptError& e) {
      discards.push_back(DiscardRecord{nonce, std::string(to_string(e.kind())), e.detail(), resp.text,
                                       resp.cache_key, std::nullopt});
      continue;
    }
    StepTranscript t = std::move(*parsed);
    auto report = validate_candidate(t, brand, config.validation);
    if (report.overall == RuleVerdict::fail) {
      discards.push_back(
          DiscardRecord{nonce, "constraints", failing_rules(report), resp.text, resp.cache_key, report});
      continue;
    }

    std::optional<RefineOutcome> refinement;
    if (config.refine) {
      ChatRequest rreq;
      rreq.user_text = render_template(prompt_template("refine").text,
                                       {{"Brand", brand.name()},
                                        {"Persona", std::string(persona.name())},
                                        {"Quote", t.starred.text()},
                                        {"Slogan", t.step4_slogan},
                                        {"Rubric", config.refine_rubric}});
      rreq.temperature = config.refine_temperature;
      rreq.max_output_tokens = 256;
      rreq.model_id = config.refine_model.empty() ? config.generator_model : config.refine_model;
      auto rresp = complete_stage(gateway, rreq, "refine");
      keys.push_back(rresp.cache_key);
      refinement = parse_refine_output(rresp.text);
      switch (refinement->verdict) {
        case RefineOutcome::Verdict::keep:
          break;
        case RefineOutcome::Verdict::discard:
          discards.push_back(DiscardRecord{nonce, "refine-discard", refinement->reason, resp.text,
                                           resp.cache_key, report});
          continue;
        case RefineOutcome::Verdict::revise: {
          auto revised = t;
          revised.step4_slogan = refinement->slogan;
          auto revised_report = validate_candidate(revised, brand, config.validation);
          if (revised_report.overall == RuleVerdict::fail) {
            report.advisories.push_back("revision \"" + refinement->slogan +
                                        "\" rejected: " + failing_rules(revised_report));
          } else {
            t = std::move(revised);
            report = std::move(revised_report);
          }
          break;
        }
        case RefineOutcome::Verdict::unparsed:
          report.advisories.push_back("refinement answer not understood; slogan kept");
          break;
      }
      if (!report.advisories.empty() && report.overall == RuleVerdict::pass) report.overall = RuleVerdict::warn;
    }

    RemixTrace trace{t.step1_quotes, t.starred, t.step2_segmentation, map_replacements(t),
                     t.step4_slogan, resp.text};
    SloganCandidate candidate(t.step4_slogan, brand, persona, SourceMethod::remix(), std::move(trace));
    return RemixResult{std::move(candidate), std::move(report), std::move(t), std::move(discards),
                       attempt, nonce, std::move(keys), std::move(refinement)};
  }
  const int spent = config.retry_cap;
  throw PipelineExhausted("remix for " + brand.name() + "/" + std::string(persona.name()) + " failed " +
                              std::to_string(spent) + " attempt(s)",
                          std::move(discards), spent);
}

CellOutcome generate_cell(const Brand& brand, const Persona& persona, std::size_t n, Gateway& gateway,
                          const RemixConfig& config, std::uint64_t nonce_base, std::size_t attempt_budget) {
  if (n < 1) throw InvalidArgument("N must be at least 1");
  const std::size_t budget = attempt_budget ? attempt_budget : 3 * n;
  CellOutcome out{Cell{brand, persona}, {}, {}, {}, {}, {}, 0, std::nullopt};
  std::set<std::vector<std::string>> seen;
  std::uint64_t nonce = nonce_base;
  while (out.slogans.size() < n && out.attempts < budget) {
    auto cfg = config;
    cfg.retry_cap = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(config.retry_cap),
                                                           budget - out.attempts));
    try {
      auto r = run_remix(brand, persona, gateway, cfg, nonce);
      out.attempts += static_cast<std::size_t>(r.attempts);
      nonce += static_cast<std::uint64_t>(r.attempts);
      out.discards.insert(out.discards.end(), r.discards.begin(), r.discards.end());
      if (!seen.insert(normalize_words(r.candidate.text())).second) {
        out.discards.push_back(DiscardRecord{r.nonce, "duplicate", r.candidate.text(), r.candidate.trace()->raw_transcript,
                                             r.cache_keys.front(), r.report});
        continue;
      }
      out.slogans.push_back(std::move(r.candidate));
      out.cache_keys.push_back(std::move(r.cache_keys));
      out.nonces.push_back(r.nonce);
      out.reports.push_back(std::move(r.report));
    } catch (const PipelineExhausted& e) {
      out.attempts += static_cast<std::size_t>(e.attempts());
      nonce += static_cast<std::uint64_t>(e.attempts());
      out.discards.insert(out.discards.end(), e.discards().begin(), e.discards().end());
    }
  }
  if (out.slogans.size() < n) {
    out.shortfall = "accepted " + std::to_string(out.slogans.size()) + " of " + std::to_string(n) +
                    " slogans after " + std::to_string(out.attempts) + " attempts";
  }
  return out;
}

std::string build_baseline_prompt(const Brand& brand, const Persona& persona) {
  return render_template(prompt_template("baseline").text,
                         {{"Brand", brand.name()}, {"Persona", std::string(persona.name())}});
}

std::string clean_baseline_output(std::string_view raw) {
  for (const auto& line : lines_of(raw)) {
    auto s = strip_emphasis(line);
    if (s.empty()) continue;
    if (lower(s).starts_with("slogan:")) s = trim(std::string_view(s).substr(7));
    return strip_quotes(s);
  }
  return {};
}

CellOutcome generate_baseline_cell(const Brand& brand, const Persona& persona, std::size_t n, Gateway& gateway,
                                   const BaselineConfig& config, std::uint64_t nonce_base,
                                   std::size_t attempt_budget) {
  if (n < 1) throw InvalidArgument("N must be at least 1");
  const std::size_t budget = attempt_budget ? attempt_budget : 3 * n;
  const auto prompt = build_baseline_prompt(brand, persona);
  CellOutcome out{Cell{brand, persona}, {}, {}, {}, {}, {}, 0, std::nullopt};
  std::set<std::vector<std::string>> seen;
  for (std::uint64_t nonce = nonce_base; out.slogans.size() < n && out.attempts < budget; ++nonce) {
    ++out.attempts;
    ChatRequest req;
    req.user_text = prompt + nonce_tail(nonce);
    req.temperature = config.temperature;
    req.max_output_tokens = config.max_output_tokens;
    req.model_id = config.model;
    ChatResponse resp;
    try {
      resp = gateway.complete(req);
    } catch (const GatewayError& e) {
      throw GatewayError(e.kind(), "baseline/generate: " + std::string(e.what()), e.attempts(), e.last_kind());
    }
    auto text = clean_baseline_output(resp.text);
    if (text.empty()) {
      out.discards.push_back(DiscardRecord{nonce, "empty-output", "", resp.text, resp.cache_key, std::nullopt});
      continue;
    }
    if (!seen.insert(normalize_words(text)).second) {
      out.discards.push_back(DiscardRecord{nonce, "duplicate", text, resp.text, resp.cache_key, std::nullopt});
      continue;
    }
    out.slogans.emplace_back(text, brand, persona, SourceMethod::baseline(config.name));
    out.cache_keys.push_back({resp.cache_key});
    out.nonces.push_back(nonce);
  }
  if (out.slogans.size() < n) {
    out.shortfall = "accepted " + std::to_string(out.slogans.size()) + " of " + std::to_string(n) +
                    " slogans after " + std::to_string(out.attempts) + " attempts";
  }
  return out;
}

}  // namespace quotemix

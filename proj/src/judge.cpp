#include "quotemix/judge.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <mutex>
#include <regex>
#include <thread>

#include "quotemix/metrics.hpp"
#include "quotemix/prompts.hpp"

namespace quotemix {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n\v\f");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n\v\f");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

ChatResponse judge_call(Gateway& gateway, const JudgeConfig& config, std::string prompt, std::string_view stage) {
  ChatRequest req;
  req.user_text = std::move(prompt);
  req.temperature = config.temperature;
  req.max_output_tokens = config.max_output_tokens;
  req.model_id = config.model;
  try {
    return gateway.complete(req);
  } catch (const GatewayError& e) {
    throw GatewayError(e.kind(), "judge/" + std::string(stage) + ": " + e.what(), e.attempts(), e.last_kind());
  }
}

}  // namespace

std::string_view to_string(JudgeDimension d) { return d == JudgeDimension::fluency ? "fluency" : "faithfulness"; }

std::string_view to_string(PairChoice c) {
  switch (c) {
    case PairChoice::A: return "A";
    case PairChoice::B: return "B";
    case PairChoice::C: return "C";
  }
  return "?";
}

std::string_view to_string(PresentationOrder o) {
  return o == PresentationOrder::ours_first ? "ours_first" : "ours_second";
}

std::string_view to_string(PairOutcome o) {
  switch (o) {
    case PairOutcome::win: return "win";
    case PairOutcome::loss: return "loss";
    case PairOutcome::tie: return "tie";
  }
  return "?";
}

std::string_view to_string(Pairing p) { return p == Pairing::index_aligned ? "index_aligned" : "all_pairs"; }

JudgeDimension parse_dimension(std::string_view text) {
  auto l = lower(text);
  if (l == "fluency") return JudgeDimension::fluency;
  if (l == "faithfulness") return JudgeDimension::faithfulness;
  throw InvalidArgument("unknown judge dimension '" + std::string(text) + "'");
}

PairChoice parse_pair_choice(std::string_view text) {
  auto l = lower(text);
  if (l == "a") return PairChoice::A;
  if (l == "b") return PairChoice::B;
  if (l == "c") return PairChoice::C;
  throw InvalidArgument("unknown pair choice '" + std::string(text) + "'");
}

PairOutcome parse_pair_outcome(std::string_view text) {
  auto l = lower(text);
  if (l == "win") return PairOutcome::win;
  if (l == "loss") return PairOutcome::loss;
  if (l == "tie") return PairOutcome::tie;
  throw InvalidArgument("unknown pair outcome '" + std::string(text) + "'");
}

Pairing parse_pairing(std::string_view text) {
  auto l = lower(text);
  std::replace(l.begin(), l.end(), '-', '_');
  if (l == "index_aligned") return Pairing::index_aligned;
  if (l == "all_pairs") return Pairing::all_pairs;
  throw InvalidArgument("pairing must be index-aligned or all-pairs, got '" + std::string(text) + "'");
}

UnparseableVerdict::UnparseableVerdict(const std::string& message, std::string raw)
    : Error("unparseable verdict: " + message), raw_(std::move(raw)) {}

ParsedAnswer parse_answer(std::string_view raw, std::string_view allowed) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= raw.size()) {
    auto nl = raw.find('\n', start);
    auto line = trim(raw.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
    if (!line.empty()) lines.push_back(std::move(line));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  if (lines.empty()) throw UnparseableVerdict("empty answer", std::string(raw));
  if (lines.size() > 2) throw UnparseableVerdict("more than two lines", std::string(raw));

  const std::regex answer_re("^answer\\s*:\\s*([" + std::string(allowed) + "])\\s*(?:/\\s*reason\\s*:\\s*(.*))?$",
                             std::regex::icase);
  static const std::regex reason_re("^reason\\s*:\\s*(.*)$", std::regex::icase);
  std::smatch m;
  if (!std::regex_match(lines[0], m, answer_re)) {
    throw UnparseableVerdict("first line is not 'Answer: [" + std::string(allowed) + "]'", std::string(raw));
  }
  ParsedAnswer out;
  out.answer = static_cast<char>(std::toupper(static_cast<unsigned char>(m[1].str()[0])));
  if (m[2].matched) out.reason = trim(m[2].str());
  if (lines.size() == 2) {
    std::smatch r;
    if (m[2].matched || !std::regex_match(lines[1], r, reason_re)) {
      throw UnparseableVerdict("second line is not 'Reason: ...'", std::string(raw));
    }
    out.reason = trim(r[1].str());
  }
  return out;
}

BinaryVerdict parse_binary_verdict(std::string_view raw, JudgeDimension dimension) {
  auto a = parse_answer(raw, "01");
  return BinaryVerdict{a.answer == '1' ? 1 : 0, a.reason, std::string(raw), dimension, {}};
}

PairVerdict parse_pair_verdict(std::string_view raw, PresentationOrder order) {
  auto a = parse_answer(raw, "ABCabc");
  return PairVerdict{parse_pair_choice(std::string(1, a.answer)), a.reason, std::string(raw), order, {}};
}

std::string render_binary_prompt(const Brand& brand, const Persona& persona, std::string_view slogan,
                                 JudgeDimension dimension) {
  const auto& tmpl = prompt_template(to_string(dimension));
  return render_template(tmpl.text, {{"Brand", brand.name()},
                                     {"Persona", std::string(persona.name())},
                                     {"Slogan", std::string(slogan)}});
}

std::string render_pair_prompt(const Brand& brand, const Persona& persona, std::string_view slogan_a,
                               std::string_view slogan_b) {
  return render_template(prompt_template("hook").text, {{"Brand", brand.name()},
                                                        {"Persona", std::string(persona.name())},
                                                        {"Slogan A", std::string(slogan_a)},
                                                        {"Slogan B", std::string(slogan_b)}});
}

BinaryVerdict judge_binary(const SloganCandidate& slogan, JudgeDimension dimension, Gateway& gateway,
                           const JudgeConfig& config) {
  auto resp = judge_call(gateway, config,
                         render_binary_prompt(slogan.brand(), slogan.persona(), slogan.text(), dimension),
                         to_string(dimension));
  auto v = parse_binary_verdict(resp.text, dimension);
  v.cache_key = resp.cache_key;
  return v;
}

NoveltyScore aggregate_novelty_values(std::span<const int> values) {
  if (values.empty()) throw InvalidArgument("novelty needs at least one verdict");
  std::vector<double> scaled;
  scaled.reserve(values.size());
  for (int v : values) {
    if (v != 0 && v != 1) throw InvalidArgument("verdict values must be 0 or 1");
    scaled.push_back(100.0 * v);
  }
  auto agg = aggregate_cells(scaled);
  return NoveltyScore{100.0 - agg.mean, agg.std, agg.n};
}

NoveltyScore aggregate_novelty(std::span<const BinaryVerdict> verdicts) {
  if (verdicts.empty()) throw InvalidArgument("novelty needs at least one verdict");
  std::vector<int> values;
  values.reserve(verdicts.size());
  for (const auto& v : verdicts) {
    if (v.dimension != verdicts.front().dimension) throw InvalidArgument("verdicts mix judge dimensions");
    values.push_back(v.value);
  }
  return aggregate_novelty_values(values);
}

PairOutcome combine_orders(PairChoice ours_first, PairChoice ours_second) {
  if (ours_first == PairChoice::A && ours_second == PairChoice::B) return PairOutcome::win;
  if (ours_first == PairChoice::B && ours_second == PairChoice::A) return PairOutcome::loss;
  return PairOutcome::tie;
}

CombinedPairVerdict judge_pair(const Brand& brand, const Persona& persona, const SloganCandidate& ours,
                               const SloganCandidate& theirs, Gateway& gateway, const JudgeConfig& config) {
  if (!(ours.brand() == brand) || !(theirs.brand() == brand) || ours.persona().label() != persona.label() ||
      theirs.persona().label() != persona.label()) {
    throw InvalidArgument("pair slogans must belong to the judged brand and persona");
  }
  auto first = judge_call(gateway, config, render_pair_prompt(brand, persona, ours.text(), theirs.text()), "hook");
  auto second =
      judge_call(gateway, config, render_pair_prompt(brand, persona, theirs.text(), ours.text()), "hook");
  CombinedPairVerdict out;
  out.ours_first = parse_pair_verdict(first.text, PresentationOrder::ours_first);
  out.ours_first.cache_key = first.cache_key;
  out.ours_second = parse_pair_verdict(second.text, PresentationOrder::ours_second);
  out.ours_second.cache_key = second.cache_key;
  out.outcome = combine_orders(out.ours_first.choice, out.ours_second.choice);
  return out;
}

HookScore hook_score(std::int64_t wins, std::int64_t losses, std::int64_t ties) {
  if (wins < 0 || losses < 0 || ties < 0) throw InvalidArgument("tally counts must be non-negative");
  const double num = static_cast<double>(wins) + static_cast<double>(ties) / 2.0;
  const double den = static_cast<double>(losses) + static_cast<double>(ties) / 2.0;
  if (den == 0.0) return HookScore{num == 0.0 ? 1.0 : kHookCap, true};
  return HookScore{num / den, false};
}

void TournamentTally::add(PairOutcome outcome) {
  switch (outcome) {
    case PairOutcome::win: ++wins; break;
    case PairOutcome::loss: ++losses; break;
    case PairOutcome::tie: ++ties; break;
  }
}

std::vector<std::pair<std::size_t, std::size_t>> tournament_pairs(std::size_t ours, std::size_t theirs,
                                                                  Pairing pairing) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (pairing == Pairing::index_aligned) {
    if (ours != theirs) {
      throw InvalidArgument("index-aligned pairing needs equal set sizes, got " + std::to_string(ours) + " and " +
                            std::to_string(theirs));
    }
    for (std::size_t i = 0; i < ours; ++i) out.emplace_back(i, i);
  } else {
    for (std::size_t i = 0; i < ours; ++i) {
      for (std::size_t j = 0; j < theirs; ++j) out.emplace_back(i, j);
    }
  }
  return out;
}

TournamentTally run_tournament(const SloganSet& ours, const SloganSet& baseline, Pairing pairing, Gateway& gateway,
                               const JudgeConfig& config, std::size_t parallelism) {
  if (!(ours.cell() == baseline.cell())) throw InvalidArgument("tournament sets must share a cell");
  const auto pairs = tournament_pairs(ours.size(), baseline.size(), pairing);
  const auto& brand = ours.cell().brand;
  const auto& persona = ours.cell().persona;

  std::vector<std::optional<CombinedPairVerdict>> results(pairs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t k = next++; k < pairs.size(); k = next++) {
      try {
        results[k] = judge_pair(brand, persona, ours.slogans()[pairs[k].first],
                                baseline.slogans()[pairs[k].second], gateway, config);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = pairs.size();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(parallelism, pairs.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  TournamentTally tally;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    tally.add(results[k]->outcome);
    tally.pairs.push_back(PairRecord{pairs[k].first, pairs[k].second, std::move(*results[k])});
  }
  return tally;
}

}  // namespace quotemix

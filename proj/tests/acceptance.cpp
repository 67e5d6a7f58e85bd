// Acceptance gate: one PASS/FAIL line per headline criterion. Exit status is
// non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "quotemix/cli.hpp"
#include "quotemix/constraints.hpp"
#include "quotemix/edit_count.hpp"
#include "quotemix/harness.hpp"
#include "quotemix/judge.hpp"
#include "quotemix/metrics.hpp"
#include "quotemix/mock_backend.hpp"
#include "quotemix/transcript.hpp"
#include "support.hpp"

using namespace quotemix;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::vector<Words> random_set(std::mt19937& rng) {
  static const char* vocab[] = {"the", "a", "home", "is", "where", "heart", "never", "sleeps", "stay", "bold"};
  std::uniform_int_distribution<std::size_t> n_dist(2, 6), len_dist(2, 8), w_dist(0, 9);
  std::vector<Words> set(n_dist(rng));
  for (auto& s : set) {
    for (std::size_t i = 0, len = len_dist(rng); i < len; ++i) s.push_back(vocab[w_dist(rng)]);
  }
  return set;
}

Outcome metric_oracles() {
  Outcome o;
  std::mt19937 rng(1001);
  const auto t0 = Clock::now();
  double worst = 0.0;
  int exact = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto set = random_set(rng);
    const double pairs[3][2] = {{distinct2(set), oracle::distinct2(set)},
                                {pairwise_bleu(set), oracle::pairwise_bleu(set)},
                                {self_bleu(set), oracle::self_bleu(set)}};
    for (const auto& p : pairs) {
      worst = std::max(worst, std::abs(p[0] - p[1]));
      exact += p[0] == p[1] ? 1 : 0;
    }
  }
  const double elapsed = seconds_since(t0);
  o.require(worst <= 1e-12, "max deviation " + fmt(worst) + " > 1e-12");
  o.require(elapsed < 10.0, "runtime " + fmt(elapsed) + " s >= 10 s");
  o.detail = o.pass ? "200 sets, " + std::to_string(exact) + "/600 bit-identical, max |diff| " + fmt(worst) +
                          ", " + fmt(elapsed, 3) + " s"
                    : o.detail;
  return o;
}

Outcome closed_forms() {
  Outcome o;
  for (std::size_t n = 2; n <= 10; ++n) {
    std::vector<Words> set(n, Words{"just", "do", "it", "today"});
    const double d2 = distinct2(set);
    const double sb = self_bleu(set);
    o.require(std::abs(d2 - 1.0 / static_cast<double>(n)) <= 1e-12, "distinct2(N=" + std::to_string(n) + ")=" + fmt(d2));
    o.require(std::abs(sb - 1.0) <= 1e-9, "self_bleu(N=" + std::to_string(n) + ")=" + fmt(sb));
  }
  std::mt19937 rng(2002);
  std::uniform_int_distribution<int> len(1, 12), word(0, 30);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    Words x;
    for (int k = 0, l = len(rng); k < l; ++k) x.push_back("w" + std::to_string(word(rng)));
    worst = std::max(worst, std::abs(sentence_bleu(x, x) - 1.0));
  }
  o.require(worst <= 1e-12, "sentence_bleu(x,[x]) off by " + fmt(worst));
  if (o.pass) o.detail = "N=2..10 identical sets and 100 self-references, max |bleu-1| " + fmt(worst);
  return o;
}

Outcome hook_arithmetic() {
  Outcome o;
  const double h = hook_score(10, 5, 5).value;
  o.require(std::abs(h - 1.6667) <= 1e-4, "hook(10,5,5)=" + fmt(h));
  double worst = 0.0;
  for (int w = 1; w <= 10; ++w) {
    for (int l = 1; l <= 10; ++l) {
      for (int t = 0; t <= 4; ++t) {
        worst = std::max(worst, std::abs(hook_score(w, l, t).value * hook_score(l, w, t).value - 1.0));
      }
    }
  }
  o.require(worst <= 1e-9, "reciprocity off by " + fmt(worst));
  if (o.pass) o.detail = "hook(10,5,5)=" + fmt(h, 5) + ", 500-point reciprocity max |err| " + fmt(worst);
  return o;
}

Outcome novelty_signature() {
  Outcome o;
  std::vector<int> verdicts(10000, 0);
  std::fill(verdicts.begin(), verdicts.begin() + 3345, 1);
  const auto s = aggregate_novelty_values(verdicts);
  o.require(std::abs(s.std - 47.18) <= 0.01, "std " + fmt(s.std));
  o.require(std::abs((100.0 - s.mean) - 33.45) <= 1e-9, "positive share " + fmt(100.0 - s.mean));
  if (o.pass) o.detail = "mean-0.3345 verdicts: std " + fmt(s.std, 6) + " on the 0-100 scale";
  return o;
}

Outcome edit_counting() {
  Outcome o;
  const auto dkny = word_edit_count("New York never sleeps", "DKNY never sleeps").count;
  const auto apple = word_edit_count("Stay hungry, stay foolish", "Stay bold, stay innovative").count;
  o.require(dkny == 1, "DKNY pair counted " + std::to_string(dkny));
  o.require(apple == 2, "Apple pair counted " + std::to_string(apple));
  std::mt19937 rng(3003);
  std::uniform_int_distribution<int> len(0, 10);
  int disagreements = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int vocab = 6 + trial % 3;
    std::uniform_int_distribution<int> w(0, vocab - 1);
    std::vector<std::string> a(len(rng)), b(len(rng));
    for (auto& x : a) x = "w" + std::to_string(w(rng));
    for (auto& x : b) x = "w" + std::to_string(w(rng));
    if (word_edit_count(a, b).count != oracle::span_count(a, b)) ++disagreements;
  }
  o.require(disagreements == 0, std::to_string(disagreements) + "/1000 disagreements with the span oracle");
  if (o.pass) o.detail = "anchors 1 and 2, 1000/1000 random pairs agree with the span oracle";
  return o;
}

Outcome parser_contract() {
  Outcome o;
  int parsed = 0;
  for (const char* name :
       {"ok_dkny.txt", "ok_orgain.txt", "ok_ge.txt", "ok_apple_curly.txt", "ok_whirlpool_insert.txt"}) {
    try {
      parse_transcript(qmtest::slurp(qmtest::fixture(std::string("transcripts/") + name)));
      ++parsed;
    } catch (const std::exception& e) {
      o.require(false, std::string(name) + ": " + e.what());
    }
  }
  const std::pair<const char*, std::string> verdicts[] = {{"faithful_aveeno.txt", "01"}, {"inline_reason.txt", "01"},
                                                          {"spaced_case.txt", "01"},     {"pair_a.txt", "ABC"},
                                                          {"pair_c.txt", "ABC"},         {"pair_b_lower.txt", "ABC"}};
  for (const auto& [name, allowed] : verdicts) {
    try {
      parse_answer(qmtest::slurp(qmtest::fixture(std::string("verdicts/") + name)), allowed);
      ++parsed;
    } catch (const std::exception& e) {
      o.require(false, std::string(name) + ": " + e.what());
    }
  }
  const std::pair<const char*, TranscriptErrorKind> bad[] = {
      {"bad_missing_sentinel.txt", TranscriptErrorKind::missing_sentinel},
      {"bad_missing_step.txt", TranscriptErrorKind::missing_step},
      {"bad_too_few_quotes.txt", TranscriptErrorKind::too_few_quotes},
      {"bad_no_star.txt", TranscriptErrorKind::no_starred_quote},
      {"bad_segmentation.txt", TranscriptErrorKind::unparseable_segmentation},
      {"bad_empty_slogan.txt", TranscriptErrorKind::empty_final_slogan}};
  int classified = 0;
  for (const auto& [name, kind] : bad) {
    try {
      parse_transcript(qmtest::slurp(qmtest::fixture(std::string("transcripts/") + name)));
      o.require(false, std::string(name) + " parsed");
    } catch (const TranscriptError& e) {
      if (e.kind() == kind) {
        ++classified;
      } else {
        o.require(false, std::string(name) + " raised " + std::string(to_string(e.kind())));
      }
    }
  }
  std::mt19937 rng(4004);
  auto pad = [&] { return std::string(rng() % 4, rng() % 2 ? ' ' : '\t'); };
  auto mixcase = [&](std::string s) {
    for (auto& c : s) c = static_cast<char>(rng() % 2 ? std::toupper(c) : std::tolower(c));
    return s;
  };
  int fuzz_ok = 0;
  for (int i = 0; i < 1000; ++i) {
    const bool pair = i % 2;
    const std::string allowed = pair ? "ABC" : "01";
    const char want = allowed[rng() % allowed.size()];
    std::string raw = pad() + mixcase("answer") + pad() + ":" + pad() +
                      std::string(1, pair ? (rng() % 2 ? want : static_cast<char>(std::tolower(want))) : want) +
                      pad();
    if (rng() % 2) raw += "\n" + pad() + mixcase("reason") + pad() + ":" + pad() + "short take" + pad();
    try {
      fuzz_ok += parse_answer(raw, allowed).answer == want ? 1 : 0;
    } catch (const UnparseableVerdict&) {
    }
  }
  o.require(fuzz_ok == 1000, std::to_string(1000 - fuzz_ok) + " fuzzed Answer lines rejected");
  if (o.pass) {
    o.detail = std::to_string(parsed) + " well-formed fixtures parse, " + std::to_string(classified) +
               "/6 malformations classified, 1000/1000 fuzzed Answer lines";
  }
  return o;
}

int cli(std::vector<std::string> args, std::string* out = nullptr) {
  args.insert(args.begin(), "quotemix");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out) *out = o.str() + e.str();
  return code;
}

std::map<std::string, std::string> report_files(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = qmtest::slurp(e.path());
  return files;
}

// Writes a four-brand roster and a fast config under `root`.
fs::path workspace(const fs::path& root) {
  fs::create_directories(root);
  std::ofstream(root / "roster.json") << roster_to_json(qmtest::small_roster()).dump(2);
  nlohmann::json cfg = {{"roster", "roster.json"},
                        {"n", 3},
                        {"parallelism", 4},
                        {"gateway", {{"rate_limit_per_second", 0}}},
                        {"runs_dir", "runs"}};
  std::ofstream(root / "config.json") << cfg.dump(2);
  return root / "config.json";
}

Outcome end_to_end() {
  Outcome o;
  qmtest::TempDir dir;
  const auto mock = "mock:" + qmtest::fixture("mock").string();
  const auto t0 = Clock::now();

  std::map<std::string, std::string> first_reports;
  for (const char* ws : {"a", "b"}) {
    const auto cfg = workspace(dir.path() / ws);
    const std::vector<std::string> base{"--config", cfg.string(), "--run-id", "e2e", "--backend", mock};
    std::string log;
    auto with = [&](std::string sub) {
      auto v = base;
      v.push_back(std::move(sub));
      return v;
    };
    const int gen = cli(with("generate"), &log);
    o.require(gen == kExitOk, std::string(ws) + ": generate exited " + std::to_string(gen) + ": " + log);
    const int ev = cli(with("evaluate"), &log);
    o.require(ev == kExitOk, std::string(ws) + ": evaluate exited " + std::to_string(ev) + ": " + log);
    if (!o.pass) return o;

    const auto paths = RunPaths::of(dir.path() / ws / "runs", "e2e");
    const auto report = evaluate_run(paths, EvaluateOptions{});
    for (const auto& m : report.methods) {
      const auto& row = report.overall.at(m);
      o.require(row.cells == 20, m + ": " + std::to_string(row.cells) + " cells");
      o.require(row.distinct2 && row.pairwise_bleu && row.self_bleu && row.disfluency && row.unfaithfulness,
                m + ": a column is missing");
    }
    o.require(report.hook_present && !report.hook.empty(), "hook rows missing");

    auto files = report_files(paths.report_dir());
    o.require(files.size() == 4, std::to_string(files.size()) + " report files");
    o.require(files["table3.tsv"].find("absent") == std::string::npos, "table has absent cells");

    // Repeat invocation on the same run.
    const int again = cli(with("evaluate"), &log);
    o.require(again == kExitOk, "repeat evaluate exited " + std::to_string(again));
    o.require(report_files(paths.report_dir()) == files, std::string(ws) + ": repeat evaluate changed report files");
    if (first_reports.empty()) {
      first_reports = files;
    } else {
      o.require(files == first_reports, "independent runs produced different report files");
    }
  }
  const double elapsed = seconds_since(t0);

  // Interrupted-then-resumed generation against an uninterrupted one.
  auto roster = qmtest::small_roster();
  auto counted = [&](const fs::path& runs, const std::string& id, std::function<bool()> stop) {
    ExperimentConfig cfg;
    cfg.n = 3;
    cfg.parallelism = 4;
    cfg.runs_dir = runs;
    GatewayOptions go;
    go.cache_dir = RunPaths::of(runs, id).cache();
    Gateway gw(mock_script(load_mock_script(qmtest::fixture("mock/mock.json"))), go,
               std::make_shared<SimulatedClock>());
    RunOptions ro;
    ro.should_stop = std::move(stop);
    auto summary = run_grid(roster, cfg, id, gw, ro);
    return std::pair{gw.stats(), summary};
  };
  const auto runs = dir.path() / "resume";
  const auto [whole, whole_summary] = counted(runs, "whole", nullptr);
  int polls = 0;
  std::mutex mu;
  const auto [part1, s1] = counted(runs, "split", [&] {
    std::lock_guard lock(mu);
    return ++polls > 17;
  });
  const auto [part2, s2] = counted(runs, "split", nullptr);
  o.require(s1.interrupted && s1.executed < 40, "first leg was not interrupted");
  o.require(whole_summary.manifest.complete() && s2.manifest.complete(), "a run did not complete");
  o.require(part1.requests + part2.requests == whole.requests,
            "gateway calls " + std::to_string(part1.requests + part2.requests) + " vs " +
                std::to_string(whole.requests));
  o.require(part1.backend_calls + part2.backend_calls == whole.backend_calls, "backend calls differ");

  o.require(elapsed < 30.0, "two full runs took " + fmt(elapsed, 3) + " s");
  if (o.pass) {
    o.detail = "4 brands x 5 personas x 2 methods x N=3 in " + fmt(elapsed / 2, 3) +
               " s per run, reports byte-identical, resumed run " + std::to_string(s1.executed) + "+" +
               std::to_string(s2.executed) + " cells = " + std::to_string(part1.requests + part2.requests) +
               " gateway calls (uninterrupted " + std::to_string(whole.requests) + ")";
  }
  return o;
}

Outcome constraint_validation() {
  Outcome o;
  const Brand apple("Apple", Domain::electronics);
  ValidationConfig cfg;
  cfg.max_edits = 2;
  const auto seeded =
      validate_slogan("Stay hungry, stay foolish, stay young.", "Stay bold, stay innovative, stay Apple.", apple, cfg);
  o.require(seeded.edit_count == 3, "seeded candidate has " + std::to_string(seeded.edit_count) + " spans");
  o.require(seeded.overall == RuleVerdict::fail, "three-span candidate did not fail");
  const Brand ge("GE", Domain::appliance);
  const auto ge_report = validate_slogan("The only thing we have to fear is fear itself.",
                                         "The only thing we have to fear is missing GE.", ge, cfg);
  o.require(ge_report.overall == RuleVerdict::pass, "GE slogan verdict " + std::string(to_string(ge_report.overall)));
  if (o.pass) o.detail = "3-span candidate fails at max_edits=2; GE slogan passes with 'we' in the fixed segment";
  return o;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"metric-oracles", metric_oracles},     {"closed-forms", closed_forms},
      {"hook-arithmetic", hook_arithmetic},   {"novelty-signature", novelty_signature},
      {"edit-counting", edit_counting},       {"parser-contract", parser_contract},
      {"end-to-end-mock-run", end_to_end},    {"constraint-validation", constraint_validation},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    failed += o.pass ? 0 : 1;
  }
  std::cout << (failed == 0 ? "acceptance: all criteria pass" : "acceptance: " + std::to_string(failed) + " failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}

#include "quotemix/cli.hpp"

#include <atomic>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include <CLI11.hpp>

#include "quotemix/config.hpp"
#include "quotemix/harness.hpp"
#include "quotemix/mock_backend.hpp"
#include "quotemix/openai_backend.hpp"
#include "quotemix/prompts.hpp"
#include "quotemix/remix.hpp"
#include "quotemix/roster.hpp"

namespace quotemix {

namespace fs = std::filesystem;

namespace {

std::atomic<bool> g_stop{false};

constexpr const char* kDefaultConfig = "config/default.json";
constexpr const char* kMockScriptName = "mock.json";

struct Args {
  std::string config_path;
  std::string run_id;
  std::string backend = "live";
  std::string runs_dir;
  std::optional<std::uint64_t> seed_nonce_base;
  std::optional<std::size_t> n;
  std::optional<std::string> generator_model;
  std::optional<std::string> judge_model;
  std::optional<double> temperature;
  std::optional<std::size_t> max_edits;
  std::optional<std::string> pairing;
  std::optional<std::size_t> parallelism;
  bool metrics_only = false;
  bool allow_partial = false;
  bool pooled_distinct = false;
  bool novelty_per_cell = false;
  std::string brand;
  std::string persona;
  bool show_prompt = false;
};

// Failure the user can fix by changing arguments or files.
class UsageError : public Error {
 public:
  using Error::Error;
};

ExperimentConfig load_effective_config(const Args& a) {
  ExperimentConfig c;
  if (!a.config_path.empty()) {
    c = load_config(a.config_path);
  } else if (fs::exists(kDefaultConfig)) {
    c = load_config(kDefaultConfig);
  }
  if (!a.runs_dir.empty()) c.runs_dir = a.runs_dir;
  if (a.seed_nonce_base) c.seed_nonce_base = *a.seed_nonce_base;
  if (a.n) {
    if (*a.n < 1) throw ConfigError("--n must be at least 1");
    c.n = *a.n;
  }
  if (a.generator_model) {
    for (auto& m : c.methods) {
      if (m.kind == SourceMethod::Kind::remix) m.model = *a.generator_model;
    }
  }
  if (a.judge_model) c.judge.model = *a.judge_model;
  if (a.temperature) {
    if (*a.temperature < 0.0 || *a.temperature > 2.0) throw ConfigError("--temperature must be in [0, 2]");
    c.generation_temperature = *a.temperature;
  }
  if (a.max_edits) c.remix.validation.max_edits = *a.max_edits;
  if (a.pairing) {
    try {
      c.pairing = parse_pairing(*a.pairing);
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
  }
  if (a.parallelism) {
    if (*a.parallelism < 1) throw ConfigError("--parallelism must be at least 1");
    c.parallelism = *a.parallelism;
  }
  return c;
}

std::shared_ptr<ChatBackend> make_backend(const std::string& selector) {
  if (selector == "live") return std::make_shared<OpenAiBackend>(EndpointConfig::from_env());
  if (selector.rfind("mock:", 0) == 0) {
    fs::path p = selector.substr(5);
    if (fs::is_directory(p)) p /= kMockScriptName;
    try {
      return mock_script(load_mock_script(p));
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("mock backend: ") + e.what());
    }
  }
  throw ConfigError("--backend must be 'live' or 'mock:<fixture path>', got '" + selector + "'");
}

std::unique_ptr<Gateway> make_gateway(const std::string& selector, const ExperimentConfig& c,
                                      std::optional<fs::path> cache_dir) {
  auto options = c.gateway_options();
  if (c.cache) options.cache_dir = std::move(cache_dir);
  return std::make_unique<Gateway>(make_backend(selector), options);
}

void require_run_id(const Args& a) {
  if (a.run_id.empty()) throw ConfigError("--run-id is required");
  if (!valid_run_id(a.run_id)) {
    throw ConfigError("--run-id '" + a.run_id + "' must use only letters, digits, '.', '_' and '-'");
  }
}

void print_report_table(std::ostream& out, const ConstraintReport& r) {
  out << "rule\tseverity\tverdict\tdetail\n";
  for (const auto& rule : r.rules) {
    out << rule.rule << '\t' << to_string(rule.severity) << '\t' << to_string(rule.verdict) << '\t' << rule.detail
        << '\n';
  }
  for (const auto& a : r.advisories) out << "advisory\t-\twarn\t" << a << '\n';
  out << "overall\t-\t" << to_string(r.overall) << "\tedit_count=" << r.edit_count << '\n';
}

int cmd_generate(const Args& a, std::ostream& out) {
  require_run_id(a);
  const auto config = load_effective_config(a);
  const auto roster = load_roster(config.roster_path);
  const auto paths = RunPaths::of(config.runs_dir, a.run_id);
  auto gateway = make_gateway(a.backend, config, paths.cache());
  RunOptions options;
  options.should_stop = [] { return g_stop.load(); };
  options.progress = [&out](const std::string& line) { out << line << '\n' << std::flush; };
  const auto summary = run_grid(roster, config, a.run_id, *gateway, options);
  const auto& m = summary.manifest;
  out << "run " << a.run_id << ": skipped " << summary.skipped << " done cell(s), executed " << summary.executed
      << "; done " << m.count(CellStatus::done) << ", partial " << m.count(CellStatus::partial) << ", failed "
      << m.count(CellStatus::failed) << ", pending " << m.count(CellStatus::pending) << '\n';
  const auto stats = gateway->stats();
  out << "gateway: " << stats.requests << " request(s), " << stats.backend_calls << " backend call(s), "
      << stats.cache_hits << " cache hit(s)\n";
  out << "run directory: " << paths.root.string() << '\n';
  return (summary.interrupted || !m.complete()) ? kExitPartial : kExitOk;
}

EvaluateOptions evaluate_options(const Args& a, const ExperimentConfig& c) {
  EvaluateOptions o;
  o.metrics_only = a.metrics_only;
  o.allow_partial = a.allow_partial;
  o.pooled_distinct = a.pooled_distinct;
  o.novelty_per_cell = a.novelty_per_cell;
  o.pairing = c.pairing;
  return o;
}

void print_summary(std::ostream& out, const MetricsReport& report, const std::vector<fs::path>& files) {
  for (const auto& f : files) out << "wrote " << f.string() << '\n';
  if (!report.novelty_present) out << "novelty: absent (metrics only)\n";
  if (!report.hook_present) out << "hook: absent\n";
  for (const auto& n : report.notes) out << "note: " << n << '\n';
}

RunPaths existing_run(const Args& a, const ExperimentConfig& c) {
  require_run_id(a);
  auto paths = RunPaths::of(c.runs_dir, a.run_id);
  if (!fs::exists(paths.manifest())) {
    throw ConfigError("run directory " + paths.root.string() + " does not exist or has no manifest");
  }
  return paths;
}

// The frozen run config, with this invocation's evaluation overrides.
ExperimentConfig evaluation_config(const Args& a, const RunPaths& paths) {
  auto frozen = load_run_inputs(paths).config;
  if (a.judge_model) frozen.judge.model = *a.judge_model;
  if (a.pairing) frozen.pairing = parse_pairing(*a.pairing);
  if (a.parallelism) frozen.parallelism = *a.parallelism;
  return frozen;
}

int cmd_evaluate(const Args& a, std::ostream& out) {
  const auto outer = load_effective_config(a);
  const auto paths = existing_run(a, outer);
  const auto config = evaluation_config(a, paths);
  const auto manifest = load_manifest(paths);
  if (!a.allow_partial && !manifest.complete()) {
    throw RunIncomplete("run '" + a.run_id + "' is incomplete; rerun generate or pass --allow-partial");
  }
  if (!a.metrics_only) {
    auto gateway = make_gateway(a.backend, config, paths.cache());
    JudgeOptions jo;
    jo.pairing = config.pairing;
    jo.judge = config.judge;
    jo.parallelism = config.parallelism;
    jo.progress = [&out](const std::string& line) { out << line << '\n' << std::flush; };
    auto s = judge_run(paths, *gateway, jo);
    out << "judged " << s.binary_verdicts << " binary verdict(s) and " << s.pair_verdicts << " pair(s)\n";
  }
  const auto report = evaluate_run(paths, evaluate_options(a, config));
  print_summary(out, report, emit_report(report, paths.report_dir()));
  return kExitOk;
}

int cmd_report(const Args& a, std::ostream& out) {
  const auto outer = load_effective_config(a);
  const auto paths = existing_run(a, outer);
  const auto config = evaluation_config(a, paths);
  auto options = evaluate_options(a, config);
  if (!fs::exists(paths.binary_verdicts())) options.metrics_only = true;
  const auto report = evaluate_run(paths, options);
  print_summary(out, report, emit_report(report, paths.report_dir()));
  return kExitOk;
}

int cmd_remix_one(const Args& a, std::ostream& out) {
  const auto config = load_effective_config(a);
  const auto roster = load_roster(config.roster_path);
  auto brand = roster.find_brand(a.brand);
  if (!brand) throw ConfigError("brand '" + a.brand + "' is not in the roster");
  auto persona = roster.find_persona(a.persona);
  if (!persona) throw ConfigError("persona '" + a.persona + "' is not in the roster");

  if (a.show_prompt) {
    auto prompt = build_remix_prompt(*brand, *persona);
    out << prompt.rendered << '\n';
    return kExitOk;
  }
  auto gateway = make_gateway(a.backend, config, std::nullopt);
  const auto remix_config = config.remix_for(config.primary_method());
  try {
    auto r = run_remix(*brand, *persona, *gateway, remix_config, config.seed_nonce_base);
    out << render_transcript(r.transcript);
    for (const auto& d : r.discards) out << "discarded attempt " << d.nonce << ": " << d.reason << " " << d.detail << '\n';
    if (r.refinement) {
      out << "refinement: " << to_string(r.refinement->verdict) << " " << r.refinement->reason << '\n';
    }
    out << "\nFinal slogan: \"" << r.candidate.text() << "\"\n\n";
    print_report_table(out, r.report);
    return kExitOk;
  } catch (const PipelineExhausted& e) {
    out << e.what() << '\n';
    for (const auto& d : e.discards()) {
      out << "discarded attempt " << d.nonce << ": " << d.reason << " " << d.detail << '\n';
    }
    for (auto it = e.discards().rbegin(); it != e.discards().rend(); ++it) {
      if (it->report) {
        out << '\n';
        print_report_table(out, *it->report);
        break;
      }
    }
    return kExitPartial;
  }
}

}  // namespace

void request_stop() { g_stop = true; }

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  g_stop = false;
  Args a;
  CLI::App app{"Quote-remix slogan generation and evaluation", "quotemix"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", a.config_path, std::string("Experiment config JSON (default ") + kDefaultConfig + ")");
  app.add_option("--run-id", a.run_id, "Run identifier; letters, digits, '.', '_', '-'");
  app.add_option("--backend", a.backend, "live, or mock:<fixture file or directory>")->capture_default_str();
  app.add_option("--runs-dir", a.runs_dir, "Directory holding run directories (overrides config runs_dir)");
  app.add_option("--seed-nonce-base", a.seed_nonce_base, "First attempt nonce of every cell");
  app.add_option("--n", a.n, "Slogans per cell");
  app.add_option("--generator-model", a.generator_model, "Model id for remix methods");
  app.add_option("--judge-model", a.judge_model, "Model id for judging");
  app.add_option("--temperature", a.temperature, "Generation temperature");
  app.add_option("--max-edits", a.max_edits, "Maximum modifications of the source quote");
  app.add_option("--pairing", a.pairing, "Tournament pairing: index-aligned or all-pairs");
  app.add_option("--parallelism", a.parallelism, "Concurrent cells or judgments");

  auto* generate = app.add_subcommand("generate", "Generate slogans for every cell and method");
  auto* evaluate = app.add_subcommand("evaluate", "Judge a run, compute metrics and write the report");
  evaluate->add_flag("--metrics-only", a.metrics_only, "Skip judging; diversity metrics only");
  evaluate->add_flag("--allow-partial", a.allow_partial, "Evaluate done cells of an incomplete run");
  evaluate->add_flag("--pooled-distinct", a.pooled_distinct, "Distinct-2 over all slogans of a method at once");
  evaluate->add_flag("--novelty-per-cell", a.novelty_per_cell, "Novelty std across cells instead of slogans");
  auto* report = app.add_subcommand("report", "Recompute the report from persisted records only");
  report->add_flag("--allow-partial", a.allow_partial, "Report done cells of an incomplete run");
  report->add_flag("--pooled-distinct", a.pooled_distinct, "Distinct-2 over all slogans of a method at once");
  report->add_flag("--novelty-per-cell", a.novelty_per_cell, "Novelty std across cells instead of slogans");
  auto* remix_one = app.add_subcommand("remix-one", "Run the remix pipeline once and print its trace");
  remix_one->add_option("--brand", a.brand, "Brand name from the roster")->required();
  remix_one->add_option("--persona", a.persona, "Persona label")->required();
  remix_one->add_flag("--show-prompt", a.show_prompt, "Print the rendered prompt and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << "run with --help for usage\n";
    return kExitConfig;
  }

  try {
    if (generate->parsed()) return cmd_generate(a, out);
    if (evaluate->parsed()) return cmd_evaluate(a, out);
    if (report->parsed()) return cmd_report(a, out);
    if (remix_one->parsed()) return cmd_remix_one(a, out);
  } catch (const GatewayError& e) {
    if (e.is_auth()) {
      err << "authentication failed: " << e.what() << '\n'
          << "set " << kEnvApiKey << " (and optionally " << kEnvBaseUrl << ", " << kEnvOrgId
          << ") or use --backend mock:<fixture>\n";
      return kExitAuth;
    }
    err << "gateway error: " << e.what() << '\n';
    return kExitPartial;
  } catch (const ConfigMismatch& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const MissingGuideline& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const OutputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace quotemix

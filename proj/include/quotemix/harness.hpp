#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "quotemix/config.hpp"
#include "quotemix/gateway.hpp"
#include "quotemix/judge.hpp"
#include "quotemix/metrics.hpp"
#include "quotemix/roster.hpp"

namespace quotemix {

inline constexpr int kRecordSchemaVersion = 1;

enum class CellStatus { pending, done, failed, partial };

std::string_view to_string(CellStatus s);
CellStatus parse_cell_status(std::string_view text);

// Letters, digits, '.', '_' and '-'; not empty, not starting with '.'.
bool valid_run_id(std::string_view run_id);

// "<brand>__<persona>" with characters outside [A-Za-z0-9._-] replaced by '_'.
std::string cell_stem(const Brand& brand, const Persona& persona);

// Layout of one run directory:
//   manifest.json            the only file holding timestamps
//   config.json, roster.json frozen inputs
//   slogans/<method>/<brand>__<persona>.jsonl
//   cache/<sha256>.json      gateway response cache
//   verdicts/binary.jsonl, verdicts/pairs.jsonl
//   report/                  emitted tables and series
struct RunPaths {
  std::filesystem::path root;

  static RunPaths of(const std::filesystem::path& runs_dir, std::string_view run_id);
  std::filesystem::path manifest() const { return root / "manifest.json"; }
  std::filesystem::path config() const { return root / "config.json"; }
  std::filesystem::path roster() const { return root / "roster.json"; }
  std::filesystem::path cache() const { return root / "cache"; }
  std::filesystem::path slogans(std::string_view method) const { return root / "slogans" / std::string(method); }
  std::filesystem::path cell_file(std::string_view method, const Brand& b, const Persona& p) const;
  std::filesystem::path binary_verdicts() const { return root / "verdicts" / "binary.jsonl"; }
  std::filesystem::path pair_verdicts() const { return root / "verdicts" / "pairs.jsonl"; }
  std::filesystem::path report_dir() const { return root / "report"; }
};

struct RunManifest {
  std::string run_id;
  std::string config_digest;
  std::string roster_digest;
  std::map<std::string, std::string> template_versions;
  std::string started_at;
  std::string finished_at;  // empty while unfinished
  // method -> cell stem -> status
  std::map<std::string, std::map<std::string, CellStatus>> cell_status;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
  std::size_t count(CellStatus status) const;
  std::size_t count(std::string_view method, CellStatus status) const;
  bool complete() const;  // every cell done
};

RunManifest load_manifest(const RunPaths& paths);

class ConfigMismatch : public Error {
 public:
  using Error::Error;
};

class RunIncomplete : public Error {
 public:
  using Error::Error;
};

class InsufficientCells : public Error {
 public:
  using Error::Error;
};

class MissingVerdicts : public Error {
 public:
  explicit MissingVerdicts(std::vector<std::string> gaps);
  const std::vector<std::string>& gaps() const { return gaps_; }

 private:
  std::vector<std::string> gaps_;
};

class OutputError : public Error {
 public:
  using Error::Error;
};

// Writes `content` to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

struct RunOptions {
  // Polled before each cell starts; returning true stops the run cleanly.
  std::function<bool()> should_stop;
  std::function<void(const std::string&)> progress;
};

struct RunSummary {
  RunManifest manifest;
  std::size_t executed = 0;  // cells run in this invocation
  std::size_t skipped = 0;   // cells already done on entry
  bool interrupted = false;
};

// Generates every (method, cell). Restarting an existing run_id skips done
// cells; a different generation config or roster throws ConfigMismatch.
// Cell failures are recorded; authentication failures abort the run.
RunSummary run_grid(const Roster& roster, const ExperimentConfig& config, const std::string& run_id,
                    Gateway& gateway, const RunOptions& options = {});

// A persisted slogan record.
struct SloganRecord {
  std::string method;
  std::string brand;
  PersonaLabel persona = PersonaLabel::Pride;
  std::size_t index = 0;
  std::string text;
  std::vector<std::string> cache_keys;
};

std::vector<SloganRecord> load_cell_slogans(const RunPaths& paths, std::string_view method, const Brand& brand,
                                            const Persona& persona);

// The frozen roster and config of a run directory.
struct RunInputs {
  Roster roster;
  ExperimentConfig config;
};

RunInputs load_run_inputs(const RunPaths& paths);

struct JudgeOptions {
  Pairing pairing = Pairing::index_aligned;
  JudgeConfig judge;
  std::size_t parallelism = 1;
  std::function<void(const std::string&)> progress;
};

struct JudgeSummary {
  std::size_t binary_verdicts = 0;
  std::size_t pair_verdicts = 0;
};

// Judges every slogan of every done cell (fluency and faithfulness) and runs
// the primary method's tournament against each baseline on cells done for
// both. Rewrites both verdict files, sorted.
JudgeSummary judge_run(const RunPaths& paths, Gateway& gateway, const JudgeOptions& options);

struct EvaluateOptions {
  bool metrics_only = false;
  bool allow_partial = false;
  bool pooled_distinct = false;
  bool novelty_per_cell = false;
  Pairing pairing = Pairing::index_aligned;
};

struct CellMetrics {
  std::string method;
  std::string brand;
  Domain domain = Domain::beauty;
  PersonaLabel persona = PersonaLabel::Pride;
  std::size_t n = 0;
  std::optional<DiversityScores> diversity;  // absent when undefined for the set
  std::optional<double> disfluency;          // 100 - % fluent in this cell
  std::optional<double> unfaithfulness;
};

struct MetricRow {
  std::size_t cells = 0;
  std::optional<MeanStd> distinct2;
  std::optional<MeanStd> pairwise_bleu;
  std::optional<MeanStd> self_bleu;
  std::optional<MeanStd> disfluency;
  std::optional<MeanStd> unfaithfulness;
};

struct HookRow {
  std::string baseline;
  std::optional<Domain> domain;  // nullopt: all domains
  std::int64_t wins = 0;
  std::int64_t losses = 0;
  std::int64_t ties = 0;
  std::size_t cells = 0;
  HookScore score;
};

struct MetricsReport {
  std::string run_id;
  std::vector<std::string> methods;  // config order
  std::vector<CellMetrics> per_cell;
  std::map<std::string, MetricRow> overall;
  std::map<std::string, std::map<Domain, MetricRow>> per_domain;
  std::vector<HookRow> hook;
  std::vector<std::string> baselines;
  bool novelty_present = false;
  bool hook_present = false;
  bool pooled_distinct = false;
  bool novelty_per_cell = false;
  std::vector<std::string> notes;

  nlohmann::json to_json() const;
};

// Pure function of the persisted run. Uses done cells only.
MetricsReport evaluate_run(const RunPaths& paths, const EvaluateOptions& options);

// Writes table3.tsv, diversity_by_domain.tsv, hook_radar.tsv and report.json
// into `out_dir`. Returns the written paths.
std::vector<std::filesystem::path> emit_report(const MetricsReport& report, const std::filesystem::path& out_dir);

}  // namespace quotemix

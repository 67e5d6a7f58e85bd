#include "quotemix/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "quotemix/hash.hpp"
#include "quotemix/prompts.hpp"
#include "quotemix/remix.hpp"

namespace quotemix {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error("corrupt JSON in " + path.string() + ": " + e.what());
  }
}

std::vector<json> read_jsonl(const fs::path& path) {
  std::vector<json> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(json::parse(line));
  }
  return out;
}

std::string jsonl(const std::vector<json>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

json report_json(const ConstraintReport& r) {
  json spans = json::array();
  for (const auto& s : r.spans) spans.push_back({{"original", s.original}, {"remix", s.remix}});
  json rules = json::array();
  for (const auto& o : r.rules) {
    rules.push_back({{"rule", o.rule},
                     {"severity", to_string(o.severity)},
                     {"verdict", to_string(o.verdict)},
                     {"detail", o.detail}});
  }
  return {{"edit_count", r.edit_count},
          {"spans", spans},
          {"brand_present", r.brand_present},
          {"first_person_found", r.first_person_found},
          {"ends_with_punctuation", r.ends_with_punctuation},
          {"word_count", r.word_count},
          {"rules", rules},
          {"advisories", r.advisories},
          {"overall", to_string(r.overall)}};
}

json quote_json(const Quote& q) {
  return {{"text", q.text()}, {"author", q.author()}, {"rationale", q.rationale()}};
}

json trace_json(const RemixTrace& t) {
  json quotes = json::array();
  for (const auto& q : t.matched_quotes) quotes.push_back(quote_json(q));
  json segs = json::array();
  for (const auto& s : t.segmentation.segments) segs.push_back({{"text", s.text}, {"editable", s.editable}});
  json reps = json::array();
  for (const auto& r : t.replacements) {
    reps.push_back({{"segment_index", r.segment_index},
                    {"original", r.original},
                    {"replacement", r.replacement},
                    {"reason", r.reason}});
  }
  return {{"matched_quotes", quotes},
          {"starred_quote", quote_json(t.starred_quote)},
          {"segmentation", segs},
          {"replacements", reps},
          {"final_slogan", t.final_slogan},
          {"raw_transcript", t.raw_transcript}};
}

json base_record(std::string_view type, std::string_view method, const Cell& cell) {
  return {{"schema_version", kRecordSchemaVersion},
          {"record", type},
          {"method", method},
          {"brand", cell.brand.name()},
          {"persona", cell.persona.name()}};
}

std::string cell_records(std::string_view method, const CellOutcome& out) {
  std::vector<json> records;
  for (std::size_t i = 0; i < out.slogans.size(); ++i) {
    auto r = base_record("slogan", method, out.cell);
    r["index"] = i;
    r["text"] = out.slogans[i].text();
    r["nonce"] = out.nonces[i];
    r["cache_keys"] = out.cache_keys[i];
    if (const auto& t = out.slogans[i].trace()) r["trace"] = trace_json(*t);
    if (i < out.reports.size()) r["report"] = report_json(out.reports[i]);
    records.push_back(std::move(r));
  }
  for (const auto& d : out.discards) {
    auto r = base_record("discard", method, out.cell);
    r["nonce"] = d.nonce;
    r["reason"] = d.reason;
    r["detail"] = d.detail;
    r["raw"] = d.raw;
    r["cache_key"] = d.cache_key;
    if (d.report) r["report"] = report_json(*d.report);
    records.push_back(std::move(r));
  }
  auto summary = base_record("cell", method, out.cell);
  summary["accepted"] = out.slogans.size();
  summary["attempts"] = out.attempts;
  summary["shortfall"] = out.shortfall ? json(*out.shortfall) : json(nullptr);
  records.push_back(std::move(summary));
  return jsonl(records);
}

std::string failure_records(std::string_view method, const Cell& cell, std::string_view error) {
  auto r = base_record("cell", method, cell);
  r["accepted"] = 0;
  r["error"] = error;
  return jsonl({r});
}

std::string freeze_config(const ExperimentConfig& config) {
  auto j = config.to_json();
  j["roster"] = "roster.json";
  j.erase("runs_dir");
  return j.dump(2) + "\n";
}

std::string stem_of(const std::string& brand, PersonaLabel persona) {
  std::string s = brand + "__" + std::string(to_string(persona));
  for (auto& c : s) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-';
    if (!ok) c = '_';
  }
  return s;
}

template <typename Fn>
void parallel_for(std::size_t count, std::size_t parallelism, Fn fn) {
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr failure;
  std::mutex mu;
  auto worker = [&] {
    while (!abort) {
      const std::size_t k = next++;
      if (k >= count) return;
      try {
        fn(k);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        abort = true;
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(parallelism, count));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::string_view to_string(CellStatus s) {
  switch (s) {
    case CellStatus::pending: return "pending";
    case CellStatus::done: return "done";
    case CellStatus::failed: return "failed";
    case CellStatus::partial: return "partial";
  }
  return "unknown";
}

CellStatus parse_cell_status(std::string_view text) {
  for (auto s : {CellStatus::pending, CellStatus::done, CellStatus::failed, CellStatus::partial}) {
    if (to_string(s) == text) return s;
  }
  throw InvalidArgument("unknown cell status '" + std::string(text) + "'");
}

bool valid_run_id(std::string_view id) {
  if (id.empty() || id.size() > 128 || id.front() == '.') return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-';
  });
}

std::string cell_stem(const Brand& brand, const Persona& persona) { return stem_of(brand.name(), persona.label()); }

RunPaths RunPaths::of(const fs::path& runs_dir, std::string_view run_id) {
  if (!valid_run_id(run_id)) throw InvalidArgument("run id '" + std::string(run_id) + "' is not filesystem-safe");
  return RunPaths{runs_dir / std::string(run_id)};
}

fs::path RunPaths::cell_file(std::string_view method, const Brand& b, const Persona& p) const {
  return slogans(method) / (cell_stem(b, p) + ".jsonl");
}

json RunManifest::to_json() const {
  json status = json::object();
  for (const auto& [method, cells] : cell_status) {
    json m = json::object();
    for (const auto& [stem, st] : cells) m[stem] = to_string(st);
    status[method] = m;
  }
  return {{"schema_version", kRecordSchemaVersion},
          {"run_id", run_id},
          {"config_digest", config_digest},
          {"roster_digest", roster_digest},
          {"template_versions", template_versions},
          {"started_at", started_at},
          {"finished_at", finished_at.empty() ? json(nullptr) : json(finished_at)},
          {"cell_status", status}};
}

RunManifest RunManifest::from_json(const json& j) {
  RunManifest m;
  m.run_id = j.at("run_id").get<std::string>();
  m.config_digest = j.at("config_digest").get<std::string>();
  m.roster_digest = j.at("roster_digest").get<std::string>();
  m.template_versions = j.at("template_versions").get<std::map<std::string, std::string>>();
  m.started_at = j.value("started_at", "");
  if (j.contains("finished_at") && j.at("finished_at").is_string()) m.finished_at = j.at("finished_at");
  for (const auto& [method, cells] : j.at("cell_status").items()) {
    for (const auto& [stem, st] : cells.items()) m.cell_status[method][stem] = parse_cell_status(st.get<std::string>());
  }
  return m;
}

std::size_t RunManifest::count(CellStatus status) const {
  std::size_t n = 0;
  for (const auto& [method, _] : cell_status) n += count(method, status);
  return n;
}

std::size_t RunManifest::count(std::string_view method, CellStatus status) const {
  auto it = cell_status.find(std::string(method));
  if (it == cell_status.end()) return 0;
  return static_cast<std::size_t>(std::count_if(it->second.begin(), it->second.end(),
                                                [&](const auto& kv) { return kv.second == status; }));
}

bool RunManifest::complete() const {
  for (const auto& [method, cells] : cell_status) {
    for (const auto& [stem, st] : cells) {
      if (st != CellStatus::done) return false;
    }
  }
  return true;
}

RunManifest load_manifest(const RunPaths& paths) {
  if (!fs::exists(paths.manifest())) throw Error("no run at " + paths.root.string() + " (manifest.json missing)");
  return RunManifest::from_json(read_json(paths.manifest()));
}

MissingVerdicts::MissingVerdicts(std::vector<std::string> gaps)
    : Error([&] {
        std::string msg = "missing verdicts for " + std::to_string(gaps.size()) + " item(s)";
        for (std::size_t i = 0; i < gaps.size() && i < 10; ++i) msg += (i ? ", " : ": ") + gaps[i];
        return msg;
      }()),
      gaps_(std::move(gaps)) {}

void write_file_atomic(const fs::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw OutputError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  static std::atomic<std::uint64_t> counter{0};
  auto tmp = path;
  tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) + "." +
         std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw OutputError("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw OutputError("short write to " + path.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw OutputError("cannot move " + tmp.string() + " into place: " + ec.message());
  }
}

RunSummary run_grid(const Roster& roster, const ExperimentConfig& config, const std::string& run_id,
                    Gateway& gateway, const RunOptions& options) {
  const auto paths = RunPaths::of(config.runs_dir, run_id);
  const auto config_digest = sha256_hex(config.generation_json().dump());
  const auto roster_json = roster_to_json(roster);
  const auto roster_digest = sha256_hex(roster_json.dump());
  const auto cells = roster.cells();

  RunSummary summary;
  RunManifest& manifest = summary.manifest;
  if (fs::exists(paths.manifest())) {
    manifest = load_manifest(paths);
    if (manifest.config_digest != config_digest) {
      throw ConfigMismatch("run '" + run_id + "' was started with a different generation config (digest " +
                           manifest.config_digest.substr(0, 12) + " vs " + config_digest.substr(0, 12) + ")");
    }
    if (manifest.roster_digest != roster_digest) {
      throw ConfigMismatch("run '" + run_id + "' was started with a different roster");
    }
    manifest.finished_at.clear();
  } else {
    manifest.run_id = run_id;
    manifest.config_digest = config_digest;
    manifest.roster_digest = roster_digest;
    manifest.template_versions = template_versions();
    manifest.started_at = utc_now();
    write_file_atomic(paths.config(), freeze_config(config));
    write_file_atomic(paths.roster(), roster_json.dump(2) + "\n");
  }
  for (const auto& m : config.methods) {
    auto& status = manifest.cell_status[m.name];
    for (const auto& c : cells) status.try_emplace(cell_stem(c.brand, c.persona), CellStatus::pending);
  }
  write_file_atomic(paths.manifest(), manifest.to_json().dump(2) + "\n");

  struct Task {
    const MethodSpec* method;
    const Cell* cell;
  };
  std::vector<Task> tasks;
  for (const auto& m : config.methods) {
    for (const auto& c : cells) {
      if (manifest.cell_status[m.name][cell_stem(c.brand, c.persona)] == CellStatus::done) {
        ++summary.skipped;
      } else {
        tasks.push_back(Task{&m, &c});
      }
    }
  }

  std::mutex manifest_mu;
  std::atomic<bool> stopped{false};
  std::atomic<std::size_t> executed{0};
  const std::size_t budget = config.cell_attempt_factor * config.n;

  parallel_for(tasks.size(), config.parallelism, [&](std::size_t k) {
    if (stopped || (options.should_stop && options.should_stop())) {
      stopped = true;
      return;
    }
    const auto& task = tasks[k];
    const auto& method = *task.method;
    const auto& cell = *task.cell;
    const auto stem = cell_stem(cell.brand, cell.persona);
    const auto file = paths.cell_file(method.name, cell.brand, cell.persona);
    CellStatus status = CellStatus::done;
    std::string line;
    try {
      CellOutcome out = method.kind == SourceMethod::Kind::remix
                            ? generate_cell(cell.brand, cell.persona, config.n, gateway, config.remix_for(method),
                                            config.seed_nonce_base, budget)
                            : generate_baseline_cell(cell.brand, cell.persona, config.n, gateway,
                                                     config.baseline_for(method), config.seed_nonce_base, budget);
      write_file_atomic(file, cell_records(method.name, out));
      if (out.shortfall) status = out.slogans.empty() ? CellStatus::failed : CellStatus::partial;
      line = "[" + method.name + "] " + stem + ": " + std::string(to_string(status)) + " (" +
             std::to_string(out.slogans.size()) + "/" + std::to_string(config.n) + ")";
    } catch (const GatewayError& e) {
      if (e.is_auth()) throw;
      write_file_atomic(file, failure_records(method.name, cell, e.what()));
      status = CellStatus::failed;
      line = "[" + method.name + "] " + stem + ": failed (" + e.what() + ")";
    } catch (const MissingGuideline& e) {
      write_file_atomic(file, failure_records(method.name, cell, e.what()));
      status = CellStatus::failed;
      line = "[" + method.name + "] " + stem + ": failed (" + e.what() + ")";
    }
    ++executed;
    std::lock_guard lock(manifest_mu);
    manifest.cell_status[method.name][stem] = status;
    write_file_atomic(paths.manifest(), manifest.to_json().dump(2) + "\n");
    if (options.progress) options.progress(line);
  });

  summary.executed = executed;
  summary.interrupted = stopped;
  if (!summary.interrupted) {
    manifest.finished_at = utc_now();
    write_file_atomic(paths.manifest(), manifest.to_json().dump(2) + "\n");
  }
  return summary;
}

std::vector<SloganRecord> load_cell_slogans(const RunPaths& paths, std::string_view method, const Brand& brand,
                                            const Persona& persona) {
  std::vector<SloganRecord> out;
  for (const auto& r : read_jsonl(paths.cell_file(method, brand, persona))) {
    if (r.at("record") != "slogan") continue;
    SloganRecord s;
    s.method = r.at("method");
    s.brand = r.at("brand");
    s.persona = parse_persona_label(r.at("persona").get<std::string>());
    s.index = r.at("index");
    s.text = r.at("text");
    s.cache_keys = r.at("cache_keys").get<std::vector<std::string>>();
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
  return out;
}

RunInputs load_run_inputs(const RunPaths& paths) {
  if (!fs::exists(paths.config()) || !fs::exists(paths.roster())) {
    throw Error("run directory " + paths.root.string() + " lacks config.json or roster.json");
  }
  auto roster = roster_from_json(read_json(paths.roster()));
  auto config = config_from_json(read_json(paths.config()), paths.root);
  return RunInputs{std::move(roster), std::move(config)};
}

namespace {

struct LoadedCell {
  const MethodSpec* method;
  const Cell* cell;
  std::vector<SloganCandidate> slogans;
};

std::vector<LoadedCell> load_done_cells(const RunPaths& paths, const RunInputs& inputs, const RunManifest& manifest,
                                        const std::vector<Cell>& cells) {
  std::vector<LoadedCell> out;
  for (const auto& m : inputs.config.methods) {
    const auto status_it = manifest.cell_status.find(m.name);
    for (const auto& c : cells) {
      if (status_it == manifest.cell_status.end()) continue;
      auto st = status_it->second.find(cell_stem(c.brand, c.persona));
      if (st == status_it->second.end() || st->second != CellStatus::done) continue;
      LoadedCell lc{&m, &c, {}};
      const auto method = m.kind == SourceMethod::Kind::remix ? SourceMethod::remix(m.name)
                                                              : SourceMethod::baseline(m.name);
      for (const auto& r : load_cell_slogans(paths, m.name, c.brand, c.persona)) {
        lc.slogans.emplace_back(r.text, c.brand, c.persona, method);
      }
      out.push_back(std::move(lc));
    }
  }
  return out;
}

std::string binary_id(std::string_view method, const Cell& c, std::size_t index, JudgeDimension d) {
  return std::string(method) + "/" + cell_stem(c.brand, c.persona) + "/" + std::to_string(index) + "/" +
         std::string(to_string(d));
}

std::string pair_id(std::string_view baseline, const Cell& c, std::size_t i, std::size_t j) {
  return std::string(baseline) + "/" + cell_stem(c.brand, c.persona) + "/" + std::to_string(i) + "-" +
         std::to_string(j);
}

json pair_verdict_json(const PairVerdict& v) {
  return {{"choice", to_string(v.choice)}, {"reason", v.reason}, {"raw", v.raw}, {"cache_key", v.cache_key}};
}

}  // namespace

JudgeSummary judge_run(const RunPaths& paths, Gateway& gateway, const JudgeOptions& options) {
  const auto manifest = load_manifest(paths);
  const auto inputs = load_run_inputs(paths);
  const auto cells = inputs.roster.cells();
  const auto loaded = load_done_cells(paths, inputs, manifest, cells);

  struct BinaryTask {
    const LoadedCell* cell;
    std::size_t index;
    JudgeDimension dimension;
  };
  std::vector<BinaryTask> binary_tasks;
  for (const auto& lc : loaded) {
    for (std::size_t i = 0; i < lc.slogans.size(); ++i) {
      for (auto d : {JudgeDimension::fluency, JudgeDimension::faithfulness}) binary_tasks.push_back({&lc, i, d});
    }
  }
  std::vector<json> binary(binary_tasks.size());
  parallel_for(binary_tasks.size(), options.parallelism, [&](std::size_t k) {
    const auto& t = binary_tasks[k];
    const auto& slogan = t.cell->slogans[t.index];
    auto v = judge_binary(slogan, t.dimension, gateway, options.judge);
    binary[k] = {{"schema_version", kRecordSchemaVersion},
                 {"id", binary_id(t.cell->method->name, *t.cell->cell, t.index, t.dimension)},
                 {"method", t.cell->method->name},
                 {"brand", t.cell->cell->brand.name()},
                 {"persona", t.cell->cell->persona.name()},
                 {"index", t.index},
                 {"dimension", to_string(t.dimension)},
                 {"slogan", slogan.text()},
                 {"value", v.value},
                 {"reason", v.reason},
                 {"raw", v.raw},
                 {"cache_key", v.cache_key}};
    if (options.progress && (k + 1) % 50 == 0) {
      options.progress("judged " + std::to_string(k + 1) + "/" + std::to_string(binary_tasks.size()) +
                       " binary verdicts");
    }
  });

  struct PairTask {
    const LoadedCell* ours;
    const LoadedCell* theirs;
    std::size_t i, j;
  };
  std::vector<PairTask> pair_tasks;
  std::vector<json> pairs;
  const MethodSpec* primary = nullptr;
  for (const auto& m : inputs.config.methods) {
    if (m.kind == SourceMethod::Kind::remix) {
      primary = &m;
      break;
    }
  }
  if (primary) {
    for (const auto& ours : loaded) {
      if (ours.method != primary) continue;
      for (const auto& theirs : loaded) {
        if (theirs.method == primary || !(theirs.cell == ours.cell)) continue;
        std::vector<std::pair<std::size_t, std::size_t>> idx;
        try {
          idx = tournament_pairs(ours.slogans.size(), theirs.slogans.size(), options.pairing);
        } catch (const InvalidArgument&) {
          continue;  // reported as missing verdicts by evaluate_run
        }
        for (auto [i, j] : idx) pair_tasks.push_back({&ours, &theirs, i, j});
      }
    }
  }
  pairs.resize(pair_tasks.size());
  parallel_for(pair_tasks.size(), options.parallelism, [&](std::size_t k) {
    const auto& t = pair_tasks[k];
    const auto& cell = *t.ours->cell;
    auto v = judge_pair(cell.brand, cell.persona, t.ours->slogans[t.i], t.theirs->slogans[t.j], gateway,
                        options.judge);
    pairs[k] = {{"schema_version", kRecordSchemaVersion},
                {"id", pair_id(t.theirs->method->name, cell, t.i, t.j)},
                {"ours_method", t.ours->method->name},
                {"baseline", t.theirs->method->name},
                {"brand", cell.brand.name()},
                {"persona", cell.persona.name()},
                {"pairing", to_string(options.pairing)},
                {"ours_index", t.i},
                {"theirs_index", t.j},
                {"ours_slogan", t.ours->slogans[t.i].text()},
                {"theirs_slogan", t.theirs->slogans[t.j].text()},
                {"outcome", to_string(v.outcome)},
                {"ours_first", pair_verdict_json(v.ours_first)},
                {"ours_second", pair_verdict_json(v.ours_second)}};
  });

  auto by_id = [](const json& a, const json& b) { return a.at("id").get<std::string>() < b.at("id").get<std::string>(); };
  std::sort(binary.begin(), binary.end(), by_id);
  std::sort(pairs.begin(), pairs.end(), by_id);
  write_file_atomic(paths.binary_verdicts(), jsonl(binary));
  write_file_atomic(paths.pair_verdicts(), jsonl(pairs));
  return JudgeSummary{binary.size(), pairs.size()};
}

namespace {

std::optional<MeanStd> aggregate_optional(const std::vector<double>& values) {
  if (values.empty()) return std::nullopt;
  return aggregate_cells(values);
}

json mean_std_json(const std::optional<MeanStd>& m) {
  if (!m) return nullptr;
  return {{"mean", m->mean}, {"std", m->std}, {"n", m->n}};
}

json row_json(const MetricRow& r) {
  return {{"cells", r.cells},
          {"distinct2", mean_std_json(r.distinct2)},
          {"pairwise_bleu", mean_std_json(r.pairwise_bleu)},
          {"self_bleu", mean_std_json(r.self_bleu)},
          {"disfluency", mean_std_json(r.disfluency)},
          {"unfaithfulness", mean_std_json(r.unfaithfulness)}};
}

// Per-slogan indicators of one method restricted to a cell filter.
struct Indicators {
  std::vector<int> fluency;
  std::vector<int> faithfulness;
};

}  // namespace

json MetricsReport::to_json() const {
  json cells = json::array();
  for (const auto& c : per_cell) {
    json d = nullptr;
    if (c.diversity) {
      d = {{"distinct2", c.diversity->distinct2},
           {"pairwise_bleu", c.diversity->pairwise_bleu},
           {"self_bleu", c.diversity->self_bleu}};
    }
    cells.push_back({{"method", c.method},
                     {"brand", c.brand},
                     {"domain", quotemix::to_string(c.domain)},
                     {"persona", quotemix::to_string(c.persona)},
                     {"n", c.n},
                     {"diversity", d},
                     {"disfluency", c.disfluency ? json(*c.disfluency) : json(nullptr)},
                     {"unfaithfulness", c.unfaithfulness ? json(*c.unfaithfulness) : json(nullptr)}});
  }
  json overall_json = json::object();
  for (const auto& [m, r] : overall) overall_json[m] = row_json(r);
  json domain_json = json::object();
  for (const auto& [m, rows] : per_domain) {
    json jm = json::object();
    for (const auto& [d, r] : rows) jm[std::string(quotemix::to_string(d))] = row_json(r);
    domain_json[m] = jm;
  }
  json hook_json = json::array();
  for (const auto& h : hook) {
    hook_json.push_back({{"baseline", h.baseline},
                         {"domain", h.domain ? json(quotemix::to_string(*h.domain)) : json("all")},
                         {"wins", h.wins},
                         {"losses", h.losses},
                         {"ties", h.ties},
                         {"cells", h.cells},
                         {"hook_score", h.score.value},
                         {"capped", h.score.capped}});
  }
  return {{"schema_version", kRecordSchemaVersion},
          {"run_id", run_id},
          {"methods", methods},
          {"baselines", baselines},
          {"novelty_present", novelty_present},
          {"hook_present", hook_present},
          {"pooled_distinct", pooled_distinct},
          {"novelty_per_cell", novelty_per_cell},
          {"overall", overall_json},
          {"per_domain", domain_json},
          {"hook", hook_json},
          {"per_cell", cells},
          {"notes", notes}};
}

MetricsReport evaluate_run(const RunPaths& paths, const EvaluateOptions& options) {
  const auto manifest = load_manifest(paths);
  const auto inputs = load_run_inputs(paths);
  if (!options.allow_partial && !manifest.complete()) {
    throw RunIncomplete("run '" + manifest.run_id + "' has " +
                        std::to_string(manifest.count(CellStatus::pending) + manifest.count(CellStatus::failed) +
                                       manifest.count(CellStatus::partial)) +
                        " cell(s) not done; finish it or pass --allow-partial");
  }
  const auto cells = inputs.roster.cells();
  const auto loaded = load_done_cells(paths, inputs, manifest, cells);

  MetricsReport report;
  report.run_id = manifest.run_id;
  report.pooled_distinct = options.pooled_distinct;
  report.novelty_per_cell = options.novelty_per_cell;
  report.novelty_present = !options.metrics_only;
  for (const auto& m : inputs.config.methods) {
    report.methods.push_back(m.name);
    if (manifest.count(m.name, CellStatus::done) == 0) {
      throw InsufficientCells("method '" + m.name + "' has no done cells");
    }
  }

  // Binary verdict lookup: id -> value.
  std::map<std::string, int> binary;
  std::map<std::string, PairOutcome> pair_outcomes;
  std::vector<std::string> gaps;
  if (!options.metrics_only) {
    for (const auto& r : read_jsonl(paths.binary_verdicts())) binary[r.at("id")] = r.at("value").get<int>();
    for (const auto& r : read_jsonl(paths.pair_verdicts())) {
      if (r.at("pairing") != to_string(options.pairing)) continue;
      pair_outcomes[r.at("id")] = parse_pair_outcome(r.at("outcome").get<std::string>());
    }
  }

  std::map<std::string, std::map<std::optional<Domain>, Indicators>> indicators;
  for (const auto& lc : loaded) {
    CellMetrics cm;
    cm.method = lc.method->name;
    cm.brand = lc.cell->brand.name();
    cm.domain = lc.cell->brand.domain();
    cm.persona = lc.cell->persona.label();
    cm.n = lc.slogans.size();
    std::vector<Words> words;
    for (const auto& s : lc.slogans) words.push_back(normalize_words(s.text()));
    try {
      cm.diversity = diversity(words);
    } catch (const MetricError& e) {
      report.notes.push_back(cm.method + "/" + cell_stem(lc.cell->brand, lc.cell->persona) +
                             ": diversity undefined (" + e.what() + ")");
    }
    if (!options.metrics_only) {
      Indicators local;
      for (std::size_t i = 0; i < lc.slogans.size(); ++i) {
        for (auto d : {JudgeDimension::fluency, JudgeDimension::faithfulness}) {
          const auto id = binary_id(cm.method, *lc.cell, i, d);
          auto it = binary.find(id);
          if (it == binary.end()) {
            gaps.push_back(id);
            continue;
          }
          (d == JudgeDimension::fluency ? local.fluency : local.faithfulness).push_back(it->second);
        }
      }
      if (!local.fluency.empty()) cm.disfluency = aggregate_novelty_values(local.fluency).mean;
      if (!local.faithfulness.empty()) cm.unfaithfulness = aggregate_novelty_values(local.faithfulness).mean;
      for (const std::optional<Domain> key : {std::optional<Domain>{}, std::optional<Domain>{cm.domain}}) {
        auto& agg = indicators[cm.method][key];
        agg.fluency.insert(agg.fluency.end(), local.fluency.begin(), local.fluency.end());
        agg.faithfulness.insert(agg.faithfulness.end(), local.faithfulness.begin(), local.faithfulness.end());
      }
    }
    report.per_cell.push_back(std::move(cm));
  }

  auto build_row = [&](const std::string& method, std::optional<Domain> domain) {
    MetricRow row;
    std::vector<double> d2, pb, sb, dis, unf;
    std::vector<Words> pooled;
    for (std::size_t k = 0; k < report.per_cell.size(); ++k) {
      const auto& c = report.per_cell[k];
      if (c.method != method || (domain && c.domain != *domain)) continue;
      ++row.cells;
      if (c.diversity) {
        d2.push_back(c.diversity->distinct2);
        pb.push_back(c.diversity->pairwise_bleu);
        sb.push_back(c.diversity->self_bleu);
      }
      if (c.disfluency) dis.push_back(*c.disfluency);
      if (c.unfaithfulness) unf.push_back(*c.unfaithfulness);
      for (const auto& s : loaded[k].slogans) pooled.push_back(normalize_words(s.text()));
    }
    if (row.cells == 0) return row;
    row.distinct2 = aggregate_optional(d2);
    if (options.pooled_distinct) {
      try {
        row.distinct2 = MeanStd{distinct2(pooled), 0.0, pooled.size()};
      } catch (const MetricError&) {
        row.distinct2.reset();
      }
    }
    row.pairwise_bleu = aggregate_optional(pb);
    row.self_bleu = aggregate_optional(sb);
    if (!options.metrics_only) {
      if (options.novelty_per_cell) {
        row.disfluency = aggregate_optional(dis);
        row.unfaithfulness = aggregate_optional(unf);
      } else {
        const auto& ind = indicators[method][domain];
        if (!ind.fluency.empty()) {
          auto s = aggregate_novelty_values(ind.fluency);
          row.disfluency = MeanStd{s.mean, s.std, s.n};
        }
        if (!ind.faithfulness.empty()) {
          auto s = aggregate_novelty_values(ind.faithfulness);
          row.unfaithfulness = MeanStd{s.mean, s.std, s.n};
        }
      }
    }
    return row;
  };

  for (const auto& m : report.methods) {
    report.overall[m] = build_row(m, std::nullopt);
    for (auto d : kAllDomains) {
      auto row = build_row(m, d);
      if (row.cells > 0) report.per_domain[m][d] = row;
    }
  }

  const MethodSpec* primary = nullptr;
  for (const auto& m : inputs.config.methods) {
    if (m.kind == SourceMethod::Kind::remix) {
      primary = &m;
      break;
    }
  }
  if (primary) {
    for (const auto& m : inputs.config.methods) {
      if (&m != primary) report.baselines.push_back(m.name);
    }
  }
  if (!options.metrics_only && primary) {
    report.hook_present = !report.baselines.empty();
    for (const auto& baseline : report.baselines) {
      std::map<std::optional<Domain>, HookRow> rows;
      for (const auto& ours : loaded) {
        if (ours.method != primary) continue;
        const LoadedCell* theirs = nullptr;
        for (const auto& lc : loaded) {
          if (lc.method->name == baseline && lc.cell == ours.cell) theirs = &lc;
        }
        if (!theirs) continue;
        std::vector<std::pair<std::size_t, std::size_t>> idx;
        try {
          idx = tournament_pairs(ours.slogans.size(), theirs->slogans.size(), options.pairing);
        } catch (const InvalidArgument& e) {
          gaps.push_back(baseline + "/" + cell_stem(ours.cell->brand, ours.cell->persona) + " (" + e.what() + ")");
          continue;
        }
        TournamentTally tally;
        for (auto [i, j] : idx) {
          const auto id = pair_id(baseline, *ours.cell, i, j);
          auto it = pair_outcomes.find(id);
          if (it == pair_outcomes.end()) {
            gaps.push_back(id);
            continue;
          }
          tally.add(it->second);
        }
        for (const std::optional<Domain> key :
             {std::optional<Domain>{}, std::optional<Domain>{ours.cell->brand.domain()}}) {
          auto& row = rows[key];
          row.baseline = baseline;
          row.domain = key;
          row.wins += tally.wins;
          row.losses += tally.losses;
          row.ties += tally.ties;
          ++row.cells;
        }
      }
      for (auto& [key, row] : rows) {
        row.score = hook_score(row.wins, row.losses, row.ties);
        if (row.score.capped) {
          report.notes.push_back("hook score for " + baseline + "/" +
                                 (key ? std::string(quotemix::to_string(*key)) : std::string("all")) +
                                 " has a zero denominator and is capped");
        }
        report.hook.push_back(row);
      }
    }
  }
  if (!gaps.empty()) throw MissingVerdicts(std::move(gaps));
  return report;
}

}  // namespace quotemix

#include "quotemix/config.hpp"

#include <fstream>
#include <set>

namespace quotemix {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, std::string_view where, std::initializer_list<std::string_view> known) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown config key '" + std::string(where) + (where.empty() ? "" : ".") + key + "'");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

std::string_view kind_name(SourceMethod::Kind k) { return k == SourceMethod::Kind::remix ? "remix" : "baseline"; }

SourceMethod::Kind parse_kind(const std::string& s) {
  if (s == "remix") return SourceMethod::Kind::remix;
  if (s == "baseline") return SourceMethod::Kind::baseline;
  throw ConfigError("method kind must be 'remix' or 'baseline', got '" + s + "'");
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::filesystem::path& p) {
  if (p.is_absolute() || base.empty()) return p;
  return (base / p).lexically_normal();
}

}  // namespace

json ExperimentConfig::to_json() const {
  json methods_json = json::array();
  for (const auto& m : methods) {
    methods_json.push_back({{"name", m.name}, {"kind", kind_name(m.kind)}, {"model", m.model}});
  }
  const auto& v = remix.validation;
  return json{
      {"roster", roster_path.generic_string()},
      {"n", n},
      {"methods", methods_json},
      {"generation", {{"temperature", generation_temperature}, {"max_output_tokens", generation_max_tokens}}},
      {"judging",
       {{"model", judge.model},
        {"temperature", judge.temperature},
        {"max_output_tokens", judge.max_output_tokens},
        {"pairing", to_string(pairing)}}},
      {"remix",
       {{"max_edits", v.max_edits},
        {"max_words", v.max_words},
        {"edit_mode", v.edit_mode == EditCountMode::span ? "span" : "word"},
        {"banned_words", v.banned_words},
        {"length_slack", v.length_slack},
        {"severity",
         {{"edits", to_string(v.edits)},
          {"brand", to_string(v.brand)},
          {"first_person", to_string(v.first_person)},
          {"punctuation", to_string(v.punctuation)},
          {"word_count", to_string(v.word_count)}}},
        {"retry_cap", remix.retry_cap},
        {"min_quotes", remix.min_quotes},
        {"quote_bounds",
         {{"soft_min", remix.quote_bounds.soft_min},
          {"soft_max", remix.quote_bounds.soft_max},
          {"hard_min", remix.quote_bounds.hard_min},
          {"hard_max", remix.quote_bounds.hard_max}}},
        {"refine", remix.refine},
        {"refine_model", remix.refine_model},
        {"refine_rubric", remix.refine_rubric}}},
      {"cell_attempt_factor", cell_attempt_factor},
      {"parallelism", parallelism},
      {"gateway",
       {{"max_attempts", retry.max_attempts},
        {"base_delay_ms", retry.base_delay_ms},
        {"max_delay_ms", retry.max_delay_ms},
        {"multiplier", retry.multiplier},
        {"jitter", retry.jitter},
        {"jitter_seed", retry.jitter_seed},
        {"rate_limit_per_second", rate_limit_per_second},
        {"cache", cache}}},
      {"seed_nonce_base", seed_nonce_base},
      {"runs_dir", runs_dir.generic_string()},
  };
}

json ExperimentConfig::generation_json() const {
  auto j = to_json();
  json out;
  for (const char* key : {"n", "methods", "generation", "remix", "cell_attempt_factor", "seed_nonce_base"}) {
    out[key] = j[key];
  }
  return out;
}

RemixConfig ExperimentConfig::remix_for(const MethodSpec& method) const {
  RemixConfig r = remix;
  r.generator_model = method.model;
  r.temperature = generation_temperature;
  r.max_output_tokens = generation_max_tokens;
  return r;
}

BaselineConfig ExperimentConfig::baseline_for(const MethodSpec& method) const {
  BaselineConfig b;
  b.name = method.name;
  b.model = method.model;
  b.temperature = generation_temperature;
  return b;
}

GatewayOptions ExperimentConfig::gateway_options() const {
  GatewayOptions o;
  o.retry = retry;
  o.rate_limit_per_second = rate_limit_per_second;
  return o;
}

const MethodSpec* ExperimentConfig::find_method(std::string_view name) const {
  for (const auto& m : methods) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

const MethodSpec& ExperimentConfig::primary_method() const {
  for (const auto& m : methods) {
    if (m.kind == SourceMethod::Kind::remix) return m;
  }
  throw ConfigError("config lists no remix method");
}

namespace {

void check_ranges(const ExperimentConfig& c) {
  auto temperature_ok = [](double t) { return t >= 0.0 && t <= 2.0; };
  if (!temperature_ok(c.generation_temperature)) throw ConfigError("generation.temperature must lie in [0, 2]");
  if (!temperature_ok(c.judge.temperature)) throw ConfigError("judging.temperature must lie in [0, 2]");
  if (!temperature_ok(c.remix.refine_temperature)) throw ConfigError("remix refine temperature must lie in [0, 2]");
  if (c.generation_max_tokens < 1) throw ConfigError("generation.max_output_tokens must be positive");
  if (c.judge.max_output_tokens < 1) throw ConfigError("judging.max_output_tokens must be positive");
  const auto& q = c.remix.quote_bounds;
  if (!(q.hard_min <= q.soft_min && q.soft_min <= q.soft_max && q.soft_max <= q.hard_max)) {
    throw ConfigError("remix.quote_bounds must satisfy hard_min <= soft_min <= soft_max <= hard_max");
  }
  if (c.retry.max_attempts < 1) throw ConfigError("gateway.max_attempts must be at least 1");
  if (c.retry.base_delay_ms < 0 || c.retry.max_delay_ms < c.retry.base_delay_ms) {
    throw ConfigError("gateway delays must satisfy 0 <= base_delay_ms <= max_delay_ms");
  }
  if (c.retry.multiplier < 1.0) throw ConfigError("gateway.multiplier must be at least 1");
  if (c.retry.jitter < 0.0 || c.retry.jitter >= 1.0) throw ConfigError("gateway.jitter must lie in [0, 1)");
  if (c.rate_limit_per_second < 0.0) throw ConfigError("gateway.rate_limit_per_second must be non-negative");
}

}  // namespace

ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  reject_unknown(j, "", {"roster", "n", "methods", "generation", "judging", "remix", "cell_attempt_factor",
                         "parallelism", "gateway", "seed_nonce_base", "runs_dir"});
  ExperimentConfig c;
  std::string roster = c.roster_path.string();
  read(j, "roster", roster);
  c.roster_path = resolve(base_dir, roster);
  read(j, "n", c.n);
  if (c.n < 1) throw ConfigError("n must be at least 1");

  if (j.contains("methods")) {
    c.methods.clear();
    std::set<std::string> names;
    for (const auto& m : j.at("methods")) {
      reject_unknown(m, "methods[]", {"name", "kind", "model"});
      MethodSpec spec;
      read(m, "name", spec.name);
      std::string kind = "remix";
      read(m, "kind", kind);
      spec.kind = parse_kind(kind);
      spec.model = "gpt-4o-mini";
      read(m, "model", spec.model);
      if (spec.name.empty()) throw ConfigError("every method needs a name");
      if (spec.name.find_first_of("/\\ ") != std::string::npos) {
        throw ConfigError("method name '" + spec.name + "' must not contain spaces or slashes");
      }
      if (!names.insert(spec.name).second) throw ConfigError("duplicate method name '" + spec.name + "'");
      c.methods.push_back(std::move(spec));
    }
  }
  if (c.methods.empty()) throw ConfigError("config needs at least one method");

  if (j.contains("generation")) {
    const auto& g = j.at("generation");
    reject_unknown(g, "generation", {"temperature", "max_output_tokens"});
    read(g, "temperature", c.generation_temperature);
    read(g, "max_output_tokens", c.generation_max_tokens);
  }
  if (j.contains("judging")) {
    const auto& g = j.at("judging");
    reject_unknown(g, "judging", {"model", "temperature", "max_output_tokens", "pairing"});
    read(g, "model", c.judge.model);
    read(g, "temperature", c.judge.temperature);
    read(g, "max_output_tokens", c.judge.max_output_tokens);
    if (g.contains("pairing")) {
      try {
        c.pairing = parse_pairing(g.at("pairing").get<std::string>());
      } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
      }
    }
  }
  if (j.contains("remix")) {
    const auto& r = j.at("remix");
    reject_unknown(r, "remix", {"max_edits", "max_words", "edit_mode", "banned_words", "length_slack", "severity",
                                "retry_cap", "min_quotes", "quote_bounds", "refine", "refine_model",
                                "refine_rubric"});
    auto& v = c.remix.validation;
    read(r, "max_edits", v.max_edits);
    read(r, "max_words", v.max_words);
    if (r.contains("edit_mode")) {
      auto mode = r.at("edit_mode").get<std::string>();
      if (mode == "span") v.edit_mode = EditCountMode::span;
      else if (mode == "word") v.edit_mode = EditCountMode::word;
      else throw ConfigError("remix.edit_mode must be 'span' or 'word'");
    }
    read(r, "banned_words", v.banned_words);
    for (auto& w : v.banned_words) {
      auto norm = normalize_words(w);
      if (norm.size() != 1) throw ConfigError("banned word '" + w + "' must be a single word");
      w = norm.front();
    }
    read(r, "length_slack", v.length_slack);
    if (r.contains("severity")) {
      const auto& s = r.at("severity");
      reject_unknown(s, "remix.severity", {"edits", "brand", "first_person", "punctuation", "word_count"});
      try {
        for (auto [key, field] : {std::pair{"edits", &v.edits}, std::pair{"brand", &v.brand},
                                  std::pair{"first_person", &v.first_person},
                                  std::pair{"punctuation", &v.punctuation}, std::pair{"word_count", &v.word_count}}) {
          if (s.contains(key)) *field = parse_severity(s.at(key).get<std::string>());
        }
      } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
      }
    }
    read(r, "retry_cap", c.remix.retry_cap);
    if (c.remix.retry_cap < 1) throw ConfigError("remix.retry_cap must be at least 1");
    read(r, "min_quotes", c.remix.min_quotes);
    if (r.contains("quote_bounds")) {
      const auto& q = r.at("quote_bounds");
      reject_unknown(q, "remix.quote_bounds", {"soft_min", "soft_max", "hard_min", "hard_max"});
      read(q, "soft_min", c.remix.quote_bounds.soft_min);
      read(q, "soft_max", c.remix.quote_bounds.soft_max);
      read(q, "hard_min", c.remix.quote_bounds.hard_min);
      read(q, "hard_max", c.remix.quote_bounds.hard_max);
    }
    read(r, "refine", c.remix.refine);
    read(r, "refine_model", c.remix.refine_model);
    read(r, "refine_rubric", c.remix.refine_rubric);
  }
  read(j, "cell_attempt_factor", c.cell_attempt_factor);
  if (c.cell_attempt_factor < 1) throw ConfigError("cell_attempt_factor must be at least 1");
  read(j, "parallelism", c.parallelism);
  if (c.parallelism < 1) throw ConfigError("parallelism must be at least 1");
  if (j.contains("gateway")) {
    const auto& g = j.at("gateway");
    reject_unknown(g, "gateway", {"max_attempts", "base_delay_ms", "max_delay_ms", "multiplier", "jitter",
                                  "jitter_seed", "rate_limit_per_second", "cache"});
    read(g, "max_attempts", c.retry.max_attempts);
    read(g, "base_delay_ms", c.retry.base_delay_ms);
    read(g, "max_delay_ms", c.retry.max_delay_ms);
    read(g, "multiplier", c.retry.multiplier);
    read(g, "jitter", c.retry.jitter);
    read(g, "jitter_seed", c.retry.jitter_seed);
    read(g, "rate_limit_per_second", c.rate_limit_per_second);
    read(g, "cache", c.cache);
  }
  read(j, "seed_nonce_base", c.seed_nonce_base);
  std::string runs = c.runs_dir.string();
  read(j, "runs_dir", runs);
  c.runs_dir = resolve(base_dir, runs);
  check_ranges(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

}  // namespace quotemix

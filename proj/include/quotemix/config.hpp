#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "quotemix/domain.hpp"
#include "quotemix/gateway.hpp"
#include "quotemix/judge.hpp"
#include "quotemix/remix.hpp"

namespace quotemix {

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct MethodSpec {
  std::string name;
  SourceMethod::Kind kind = SourceMethod::Kind::remix;
  std::string model;

  friend bool operator==(const MethodSpec&, const MethodSpec&) = default;
};

// Experiment configuration file (JSON). Every key is optional:
//   {
//     "roster": "roster.json",            relative to the config file
//     "n": 10,
//     "methods": [{"name": "ours", "kind": "remix", "model": "..."},
//                 {"name": "baseline", "kind": "baseline", "model": "..."}],
//     "generation": {"temperature": 0.9, "max_output_tokens": 1024},
//     "judging": {"model": "...", "temperature": 0.0, "max_output_tokens": 128, "pairing": "index_aligned"},
//     "remix": {"max_edits": 2, "max_words": 20, "edit_mode": "span", "retry_cap": 3, "min_quotes": 3,
//               "banned_words": [...], "length_slack": 2,
//               "severity": {"edits": "strict", ..., "word_count": "warn"},
//               "quote_bounds": {"soft_min": 5, "soft_max": 10, "hard_min": 2, "hard_max": 25},
//               "refine": false, "refine_model": "", "refine_rubric": "..."},
//     "cell_attempt_factor": 3,
//     "parallelism": 1,
//     "gateway": {"max_attempts": 5, "base_delay_ms": 500, "max_delay_ms": 8000, "multiplier": 2.0,
//                 "jitter": 0.2, "jitter_seed": 0, "rate_limit_per_second": 0, "cache": true},
//     "seed_nonce_base": 0,
//     "runs_dir": "runs"                  relative to the config file
//   }
struct ExperimentConfig {
  std::filesystem::path roster_path = "roster.json";
  std::size_t n = 10;
  std::vector<MethodSpec> methods{{"ours", SourceMethod::Kind::remix, "gpt-4o-mini"},
                                  {"baseline", SourceMethod::Kind::baseline, "gpt-4o-mini"}};
  double generation_temperature = 0.9;
  int generation_max_tokens = 1024;
  JudgeConfig judge;
  Pairing pairing = Pairing::index_aligned;
  RemixConfig remix;  // generator_model/temperature are taken from the method and generation keys
  std::size_t cell_attempt_factor = 3;
  std::size_t parallelism = 1;
  RetryPolicy retry;
  double rate_limit_per_second = 0.0;
  bool cache = true;
  std::uint64_t seed_nonce_base = 0;
  std::filesystem::path runs_dir = "runs";

  // Full configuration; paths are written as given.
  nlohmann::json to_json() const;
  // The keys that shape generated slogans; its digest guards run resumption.
  nlohmann::json generation_json() const;

  RemixConfig remix_for(const MethodSpec& method) const;
  BaselineConfig baseline_for(const MethodSpec& method) const;
  GatewayOptions gateway_options() const;  // without cache_dir
  const MethodSpec* find_method(std::string_view name) const;
  const MethodSpec& primary_method() const;  // first remix method
};

// Relative roster/runs paths are resolved against `base_dir`. Unknown keys
// throw ConfigError so typos do not pass silently.
ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace quotemix

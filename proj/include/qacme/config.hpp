#pragma once

// JSON experiment configuration shared by the CLI and the service.
//
//   {
//     "log": "queries.csv",            // timestamp,user_id,query
//     "lexicon": "terms.txt",          // optional dictionary terms
//     "positions": 5,
//     "engines": ["popularity", "recency", "user_history", "dictionary"],
//     "basic_engine": "popularity",
//     "strategies": ["single:popularity", "random", "ranked", ...],
//     "n_episodes": 10000, "repeats": 5, "seed": 42,
//     "min_prefix_len": 1, "split_fraction": 0.5, "train_on_full_log": false,
//     "online_update": false,
//     "recency_half_life_days": 7, "prior": [1, 1],
//     "enumeration": {"n_episodes": 1000, "cap": 100000},
//     "synthetic": {...},               // see SyntheticConfig
//     "service": {"strategy": "cascade_explicit", "ttl_seconds": 120,
//                 "silent_intermediate_expiry": false, "port": 8080}
//   }

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qacme/bandit.hpp"
#include "qacme/engines.hpp"
#include "qacme/strategies.hpp"
#include "qacme/synthetic.hpp"

namespace qacme {

struct SyntheticConfig {
  SyntheticEnvironment environment;
  SyntheticListModel lists;
};

struct ServiceConfig {
  std::string strategy = "cascade_explicit";
  double ttl_seconds = 120.0;
  bool silent_intermediate_expiry = false;
  int port = 8080;
  std::string host = "127.0.0.1";
};

struct ExperimentConfig {
  std::string log_path;
  std::optional<std::string> lexicon_path;
  int positions = 5;
  std::vector<EngineId> engines{"popularity", "recency", "user_history", "dictionary"};
  EngineId basic_engine = "popularity";
  std::vector<std::string> strategies{"single:popularity", "random",  "ranked",
                                      "ranked_explicit",   "cascade", "cascade_explicit"};
  long n_episodes = 10000;
  int repeats = 5;
  std::uint64_t seed = 42;
  int min_prefix_len = 1;
  double split_fraction = 0.5;
  bool train_on_full_log = false;
  bool online_update = false;
  double recency_half_life_days = 7.0;
  BetaPrior prior;
  long enumeration_episodes = 1000;
  std::size_t enumeration_cap = 100000;
  std::optional<SyntheticConfig> synthetic;
  ServiceConfig service;

  // Throws ConfigError on invalid values.
  void validate() const;

  EngineConfig engine_config() const;
  // Parses one entry of `strategies` and fills in positions/engines/seed/prior.
  MixtureConfig mixture(const std::string& strategy_spec) const;
};

// Unknown keys are rejected so that typos do not silently fall back to
// defaults. Relative paths are resolved against `base_dir` when given.
ExperimentConfig parse_config(const nlohmann::json& j, const std::string& base_dir = {});
ExperimentConfig load_config(const std::string& path);

// "synthetic" section:
//   {"engines": [...], "list_length": 5, "decay": [1, .8, .6, .4, .2],
//    "default_probability": 0.1,
//    "probabilities": {"a": [0.6, 0.6, ...], ...},   // by rank, 1-based
//    "shared_tops": [{"first": "a", "second": "b", "probability": 0.5}]}
SyntheticConfig parse_synthetic(const nlohmann::json& j, int positions);

}  // namespace qacme

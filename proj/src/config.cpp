#include "qacme/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "qacme/errors.hpp"

namespace qacme {

namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known,
                    const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

std::string resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty() || base_dir.empty()) return path;
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base_dir) / p).string();
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void ExperimentConfig::validate() const {
  if (positions < 1) throw ConfigError("positions (M) must be >= 1");
  if (engines.empty()) throw ConfigError("at least one engine is required");
  if (n_episodes <= 0) throw ConfigError("n_episodes must be positive");
  if (repeats <= 0) throw ConfigError("repeats must be positive");
  if (min_prefix_len < 1) throw ConfigError("min_prefix_len must be >= 1");
  if (!(split_fraction >= 0.0 && split_fraction < 1.0)) {
    throw ConfigError("split_fraction must lie in [0, 1)");
  }
  if (std::find(engines.begin(), engines.end(), basic_engine) == engines.end()) {
    throw ConfigError("basic_engine must be one of the configured engines");
  }
  if (!(recency_half_life_days > 0.0)) throw ConfigError("recency_half_life_days must be positive");
  if (!(prior.alpha > 0.0) || !(prior.beta > 0.0)) throw ConfigError("prior must be positive");
  if (enumeration_episodes <= 0) throw ConfigError("enumeration n_episodes must be positive");
  if (!(service.ttl_seconds > 0.0)) throw ConfigError("service ttl_seconds must be positive");
  for (const auto& s : strategies) mixture(s);
  mixture(service.strategy);
}

EngineConfig ExperimentConfig::engine_config() const {
  EngineConfig ec;
  ec.recency_half_life_seconds = recency_half_life_days * 24.0 * 3600.0;
  if (lexicon_path) {
    std::ifstream in(*lexicon_path);
    if (!in) throw ConfigError("cannot open lexicon: " + *lexicon_path);
    ec.lexicon = read_lexicon(in);
  }
  return ec;
}

MixtureConfig ExperimentConfig::mixture(const std::string& strategy_spec) const {
  MixtureConfig m = parse_strategy(strategy_spec);
  m.positions = positions;
  m.engines = engines;
  m.seed = seed;
  m.prior = prior;
  m.validate();
  return m;
}

SyntheticConfig parse_synthetic(const nlohmann::json& j, int positions) {
  reject_unknown(j,
                 {"engines", "list_length", "decay", "default_probability",
                  "probabilities", "shared_tops"},
                 "synthetic");
  SyntheticConfig sc;
  sc.lists.engines = j.at("engines").get<std::vector<EngineId>>();
  sc.lists.list_length = j.value("list_length", positions);
  sc.environment.decay = j.at("decay").get<std::vector<double>>();
  const bool has_fallback = j.contains("default_probability");
  const double fallback = has_fallback ? j.at("default_probability").get<double>() : 0.0;
  const auto probs = j.value("probabilities", nlohmann::json::object());
  for (const auto& e : sc.lists.engines) {
    std::vector<double> by_rank;
    if (probs.contains(e)) by_rank = probs.at(e).get<std::vector<double>>();
    for (int r = 1; r <= sc.lists.list_length; ++r) {
      if (static_cast<std::size_t>(r) <= by_rank.size()) {
        sc.environment.set(e, r, by_rank[static_cast<std::size_t>(r - 1)]);
      } else if (!by_rank.empty()) {
        sc.environment.set(e, r, by_rank.back());
      } else if (has_fallback) {
        sc.environment.set(e, r, fallback);
      } else {
        throw ConfigError("synthetic: no probability for engine " + e);
      }
    }
  }
  for (const auto& s : j.value("shared_tops", nlohmann::json::array())) {
    sc.lists.shared_tops.push_back(
        {s.at("first").get<std::string>(), s.at("second").get<std::string>(),
         s.at("probability").get<double>()});
  }
  sc.environment.validate(positions);
  return sc;
}

ExperimentConfig parse_config(const nlohmann::json& j, const std::string& base_dir) {
  try {
    reject_unknown(j,
                   {"log", "lexicon", "positions", "engines", "basic_engine", "strategies",
                    "n_episodes", "repeats", "seed", "min_prefix_len", "split_fraction",
                    "train_on_full_log", "online_update", "recency_half_life_days", "prior",
                    "enumeration", "synthetic", "service"},
                   "config");
    ExperimentConfig c;
    if (j.contains("log")) c.log_path = resolve(j.at("log").get<std::string>(), base_dir);
    if (j.contains("lexicon")) c.lexicon_path = resolve(j.at("lexicon").get<std::string>(), base_dir);
    read(j, "positions", c.positions);
    read(j, "engines", c.engines);
    read(j, "basic_engine", c.basic_engine);
    read(j, "strategies", c.strategies);
    read(j, "n_episodes", c.n_episodes);
    read(j, "repeats", c.repeats);
    read(j, "seed", c.seed);
    read(j, "min_prefix_len", c.min_prefix_len);
    read(j, "split_fraction", c.split_fraction);
    read(j, "train_on_full_log", c.train_on_full_log);
    read(j, "online_update", c.online_update);
    read(j, "recency_half_life_days", c.recency_half_life_days);
    if (j.contains("prior")) {
      const auto p = j.at("prior").get<std::vector<double>>();
      if (p.size() != 2) throw ConfigError("prior must be [alpha, beta]");
      c.prior = {p[0], p[1]};
    }
    if (j.contains("enumeration")) {
      const auto& e = j.at("enumeration");
      reject_unknown(e, {"n_episodes", "cap"}, "enumeration");
      read(e, "n_episodes", c.enumeration_episodes);
      read(e, "cap", c.enumeration_cap);
    }
    if (j.contains("service")) {
      const auto& s = j.at("service");
      reject_unknown(s, {"strategy", "ttl_seconds", "silent_intermediate_expiry", "port", "host"},
                     "service");
      read(s, "strategy", c.service.strategy);
      read(s, "ttl_seconds", c.service.ttl_seconds);
      read(s, "silent_intermediate_expiry", c.service.silent_intermediate_expiry);
      read(s, "port", c.service.port);
      read(s, "host", c.service.host);
    }
    if (j.contains("synthetic")) c.synthetic = parse_synthetic(j.at("synthetic"), c.positions);
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(j, std::filesystem::path(path).parent_path().string());
}

}  // namespace qacme

#include "qacme/experiment.hpp"

#include "qacme/errors.hpp"

namespace qacme {

namespace {

EnginePool build_selected(const ExperimentConfig& config,
                          std::span<const QueryLogRecord> training) {
  return build_engines(training, config.engine_config()).select(config.engines);
}

void attach_basic_increase(std::vector<ExperimentResult>& all, const EngineId& basic_engine) {
  const std::string basic = "single:" + basic_engine;
  std::vector<ExperimentResult> baseline;
  for (const auto& r : all) {
    if (r.strategy == basic) baseline.push_back(r);
  }
  attach_increase(all, baseline);
}

}  // namespace

ReplayData prepare_replay(const ExperimentConfig& config, std::vector<QueryLogRecord> log) {
  ReplayData data;
  std::vector<QueryLogRecord> evaluation;
  if (config.train_on_full_log) {
    data.training = log;
    evaluation = std::move(log);
  } else {
    auto split = split_log(std::move(log), config.split_fraction);
    data.training = std::move(split.training);
    evaluation = std::move(split.evaluation);
  }
  data.pool = build_selected(config, data.training);
  auto tuples = build_tuples(evaluation, config.min_prefix_len);
  data.tuples = std::move(tuples.tuples);
  data.skipped_records = tuples.skipped_records;
  return data;
}

ReplayData prepare_replay(const ExperimentConfig& config) {
  if (config.log_path.empty()) throw ConfigError("config has no query log path");
  return prepare_replay(config, load_query_log(config.log_path));
}

std::vector<ExperimentResult> run_configured(const ExperimentConfig& config, ReplayData& data) {
  const RunOptions options{config.n_episodes, config.seed, config.repeats};
  std::vector<ExperimentResult> all;
  for (const auto& spec : config.strategies) {
    const auto mixture = config.mixture(spec);
    std::vector<ExperimentResult> results;
    if (config.online_update) {
      results = run_experiment_online(
          mixture, [&] { return build_selected(config, data.training); }, data.tuples, options);
    } else {
      results = run_experiment(mixture, data.pool, data.tuples, options);
    }
    all.insert(all.end(), results.begin(), results.end());
  }
  attach_basic_increase(all, config.basic_engine);
  return all;
}

EnumerationResult enumerate_configured(const ExperimentConfig& config, ReplayData& data) {
  return enumerate_mixtures(data.pool, config.engines, config.positions, data.tuples,
                            config.enumeration_episodes, config.seed, config.basic_engine,
                            config.enumeration_cap);
}

std::vector<ExperimentResult> run_synthetic_configured(const ExperimentConfig& config) {
  if (!config.synthetic) throw ConfigError("config has no synthetic section");
  const auto& sc = *config.synthetic;
  SyntheticEnvironment env = sc.environment;
  env.seed = config.seed;
  const SyntheticRunOptions options{config.n_episodes, config.repeats};
  std::vector<ExperimentResult> all;
  for (const auto& spec : config.strategies) {
    MixtureConfig mixture = parse_strategy(spec);
    mixture.positions = config.positions;
    mixture.engines = sc.lists.engines;
    mixture.seed = config.seed;
    mixture.prior = config.prior;
    auto results = run_synthetic(mixture, env, sc.lists, options);
    all.insert(all.end(), results.begin(), results.end());
  }
  attach_basic_increase(all, config.basic_engine);
  return all;
}

}  // namespace qacme

#pragma once

// Glue between an ExperimentConfig and the replay machinery: load the log,
// split it, build engines and tuples, and run every configured strategy.

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "qacme/config.hpp"
#include "qacme/engines.hpp"
#include "qacme/replay.hpp"

namespace qacme {

struct ReplayData {
  EnginePool pool;
  std::vector<QueryLogRecord> training;
  std::vector<ReplayTuple> tuples;
  std::size_t skipped_records = 0;
};

// Engines are built on the chronologically first split_fraction of the log
// and tuples come from the rest. With train_on_full_log the engines see the
// whole log and the whole log is replayed, as for an engine that was already
// deployed while the log was collected.
ReplayData prepare_replay(const ExperimentConfig& config, std::vector<QueryLogRecord> log);
ReplayData prepare_replay(const ExperimentConfig& config);

// Runs config.strategies in order and attaches increases against
// "single:<basic_engine>" when that baseline is among them.
std::vector<ExperimentResult> run_configured(const ExperimentConfig& config, ReplayData& data);

EnumerationResult enumerate_configured(const ExperimentConfig& config, ReplayData& data);

// Runs config.strategies in the synthetic environment of config.synthetic.
std::vector<ExperimentResult> run_synthetic_configured(const ExperimentConfig& config);

}  // namespace qacme

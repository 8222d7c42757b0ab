#pragma once

// Offline replay evaluation. A log is split into (prefix, full query) tuples;
// each episode samples one tuple uniformly with replacement, lets a strategy
// fill the list, and counts a click at position m iff the suggestion text at
// m equals the full query exactly.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qacme/engines.hpp"
#include "qacme/query_log.hpp"
#include "qacme/strategies.hpp"

namespace qacme {

struct ReplayTuple {
  std::string prefix;      // strict leading substring of full_query
  std::string full_query;  // normalized
  std::string user;
  double timestamp = 0.0;

  friend bool operator==(const ReplayTuple&, const ReplayTuple&) = default;
};

struct TupleSet {
  std::vector<ReplayTuple> tuples;
  std::size_t skipped_records = 0;  // normalized query too short
};

// One tuple per prefix length in [min_prefix_len, L - 1] of each normalized
// query of length L. Throws ConfigError if min_prefix_len < 1.
TupleSet build_tuples(std::span<const QueryLogRecord> log, int min_prefix_len);

void write_tuples(std::ostream& out, std::span<const ReplayTuple> tuples);
std::vector<ReplayTuple> read_tuples(std::istream& in);

struct LogSplit {
  std::vector<QueryLogRecord> training;
  std::vector<QueryLogRecord> evaluation;
};

// Stable chronological split: the first `training_fraction` of records (by
// timestamp) train the engines, the rest are replayed.
LogSplit split_log(std::vector<QueryLogRecord> records, double training_fraction);

// Position (1-based) whose text equals `full_query`, or list.positions + 1.
int click_index(const DisplayedList& list, std::string_view full_query);

// 100 * (clicks - baseline) / baseline rounded to 2 decimals. Throws
// UndefinedBaseline when baseline_clicks <= 0.
double increase_pct(long clicks, long baseline_clicks);

EngineContext context_for(const ReplayTuple& tuple);

// Per-tuple candidate lists, computed on first use. Valid only while the
// engines stay unchanged.
class CandidateCache {
 public:
  CandidateCache(const EnginePool& pool, std::vector<EngineId> engines,
                 std::span<const ReplayTuple> tuples, std::size_t k);

  const CandidateSet& at(std::size_t tuple_index);
  std::span<const ReplayTuple> tuples() const { return tuples_; }
  const std::vector<EngineId>& engines() const { return engines_; }

 private:
  const EnginePool* pool_;
  std::vector<EngineId> engines_;
  std::span<const ReplayTuple> tuples_;
  std::size_t k_;
  std::vector<std::optional<CandidateSet>> cache_;
};

// n_episodes tuple indices drawn uniformly with replacement.
std::vector<std::size_t> sample_episode_stream(std::size_t n_tuples, long n_episodes,
                                               std::uint64_t seed);

// Plays `stream` through `strategy`, returns the click count and optionally
// appends each episode's click index to `trace`.
long replay_stream(MixtureStrategy& strategy, CandidateCache& cache,
                   std::span<const std::size_t> stream, std::vector<int>* trace = nullptr);

struct ExperimentResult {
  std::string strategy;
  long clicks = 0;
  long episodes = 0;
  std::optional<double> increase_pct;
  std::vector<int> click_trace;  // c_t per episode
  std::uint64_t seed = 0;
  int repeat = 0;

  friend bool operator==(const ExperimentResult&, const ExperimentResult&) = default;
};

struct RunOptions {
  long n_episodes = 10000;
  std::uint64_t seed = 0;
  int repeats = 5;
};

// Repeat r reseeds both the strategy and the episode sampler with seed + r.
// Throws ConfigError for n_episodes <= 0 or repeats <= 0, InvalidInput for an
// empty tuple pool.
std::vector<ExperimentResult> run_experiment(const MixtureConfig& strategy, const EnginePool& pool,
                                             std::span<const ReplayTuple> tuples,
                                             const RunOptions& options);

// Online-update variant: each repeat gets a fresh pool from `make_pool`, and
// every replayed full query is fed to the engines after its feedback.
std::vector<ExperimentResult> run_experiment_online(
    const MixtureConfig& strategy, const std::function<EnginePool()>& make_pool,
    std::span<const ReplayTuple> tuples, const RunOptions& options);

double mean_clicks(std::span<const ExperimentResult> results);

// Fills increase_pct of every result against the baseline results of the
// same repeat index.
void attach_increase(std::span<ExperimentResult> results,
                     std::span<const ExperimentResult> baseline);

// Results TSV: one row per repeat plus a "mean" row per strategy.
// `baseline` names the strategy increases are computed against.
void write_results_table(std::ostream& out, std::span<const ExperimentResult> results,
                         std::string_view baseline);

struct MixtureScore {
  std::vector<EngineId> assignment;
  long clicks = 0;
};

struct EnumerationResult {
  std::vector<MixtureScore> mixtures;  // clicks descending, then assignment
  std::size_t basic_index = 0;         // index of the all-basic assignment
  std::size_t basic_rank = 0;          // 1 + #mixtures with strictly more clicks
  long episodes = 0;
};

// Number of assignments, or nullopt on overflow.
std::optional<std::size_t> mixture_count(std::size_t engines, int positions);

// Every assignment in engines^M replayed over the same stream. Refuses with
// ConfigError when the count exceeds `cap`.
EnumerationResult enumerate_mixtures(CandidateCache& cache, int positions,
                                     std::span<const std::size_t> stream,
                                     const EngineId& basic_engine, std::size_t cap = 100000);

EnumerationResult enumerate_mixtures(const EnginePool& pool, std::span<const EngineId> engines,
                                     int positions, std::span<const ReplayTuple> tuples,
                                     long n_episodes, std::uint64_t seed,
                                     const EngineId& basic_engine, std::size_t cap = 100000);

// TSV with rank, clicks, assignment and a basic marker.
void write_enumeration(std::ostream& out, const EnumerationResult& result);
EnumerationResult read_enumeration(std::istream& in);

// Decreasing-clicks curve for plotting: "index clicks is_basic" rows preceded
// by a comment line with the basic assignment's rank.
void write_curve_plot(std::ostream& out, const EnumerationResult& result);

}  // namespace qacme

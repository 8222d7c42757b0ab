#pragma once

// Synthetic environments for exercising strategies without real traffic:
// a cascade click simulator with per-(engine, rank) good-suggestion rates and
// position decay, synthetic per-episode candidate lists, and query-log
// generators (including a log produced by a deployed engine).

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qacme/engines.hpp"
#include "qacme/query_log.hpp"
#include "qacme/replay.hpp"
#include "qacme/rng.hpp"
#include "qacme/strategies.hpp"

namespace qacme {

struct SyntheticEnvironment {
  // Probability that the suggestion at (engine, rank) is a good one.
  std::map<std::pair<EngineId, int>, double> good_probability;
  // d_1 >= d_2 >= ... >= d_M in (0, 1].
  std::vector<double> decay;
  std::uint64_t seed = 0;

  void set(const EngineId& engine, int rank, double p);
  // Same probability for ranks 1..max_rank.
  void set_all_ranks(const EngineId& engine, int max_rank, double p);
  // Throws ConfigError for a missing entry.
  double probability(const EngineId& engine, int rank) const;
  // Throws ConfigError unless every probability is in [0, 1] and decay is
  // non-increasing in (0, 1] with at least `positions` entries.
  void validate(int positions) const;
};

// Scans positions in order; position m is clicked with probability
// p(engine_m, rank_m) * d_m and the first click ends the scan. Returns the
// clicked position, or list.positions + 1.
int synthetic_episode(const SyntheticEnvironment& env, const DisplayedList& list, Rng& rng);

// Per-episode candidate lists with controllable overlap. Engine e's rank r
// text is "<e>/<r>"; with probability `probability` a SharedTop makes the
// second engine's rank-1 text equal to the first engine's.
struct SyntheticListModel {
  struct SharedTop {
    EngineId first;
    EngineId second;
    double probability = 0.0;
  };

  std::vector<EngineId> engines;
  int list_length = 5;
  std::vector<SharedTop> shared_tops;

  CandidateSet draw(Rng& rng) const;
};

struct SyntheticRunOptions {
  long n_episodes = 10000;
  int repeats = 5;
};

// Called after every episode with (episode index, displayed list, click).
using EpisodeObserver = std::function<void(long, const DisplayedList&, int)>;

// Repeat r runs the strategy with seed config.seed + r and the environment
// (lists and clicks) with env.seed + r.
std::vector<ExperimentResult> run_synthetic(const MixtureConfig& strategy,
                                            const SyntheticEnvironment& env,
                                            const SyntheticListModel& lists,
                                            const SyntheticRunOptions& options,
                                            const EpisodeObserver& observer = {});

// A catalog of distinct queries built from pseudo-words that share
// prefixes, with Zipf popularity, per-user favourites and rotating trends.
struct QueryLogSpec {
  std::size_t catalog_size = 2000;
  std::size_t records = 20000;
  std::size_t users = 300;
  double anonymous_share = 0.2;
  double zipf_exponent = 1.0;
  double favourite_share = 0.3;  // chance a known user repeats a favourite
  std::size_t favourites_per_user = 5;
  double trend_share = 0.15;  // chance of drawing from the current trend set
  std::size_t trend_size = 20;
  double trend_period_seconds = 3.0 * 24 * 3600;
  double start_time = 1'600'000'000.0;
  double span_seconds = 30.0 * 24 * 3600;
  std::uint64_t seed = 1;
};

std::vector<std::string> generate_catalog(std::size_t size, std::uint64_t seed);
std::vector<QueryLogRecord> generate_query_log(const QueryLogSpec& spec);

// Zipf(s) sampler over ranks 0..n-1.
class ZipfSampler {
 public:
  ZipfSampler(std::size_t n, double exponent);
  std::size_t operator()(Rng& rng) const;

 private:
  std::vector<double> cdf_;
};

// A user types their intended query one character at a time while the
// deployed engine shows its top-M list. The logged query is the intent as
// soon as it is displayed; otherwise, with probability `adopt_probability`
// per keystroke, the user settles for the top displayed suggestion; a user
// who types everything logs the intent.
struct LoggedPolicySpec {
  std::size_t sessions = 20000;
  std::size_t users = 300;
  int positions = 5;
  double adopt_probability = 0.2;
  double zipf_exponent = 1.0;
  double start_time = 1'600'000'000.0;
  double span_seconds = 30.0 * 24 * 3600;
  std::uint64_t seed = 3;
};

std::vector<QueryLogRecord> simulate_logged_policy(const Engine& deployed,
                                                   std::span<const std::string> intents,
                                                   const LoggedPolicySpec& spec);

}  // namespace qacme

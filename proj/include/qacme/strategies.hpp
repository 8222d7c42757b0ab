#pragma once

// Mixture strategies: fill M list positions with suggestions taken from
// several engines, never showing the same text twice, then route the click
// back into the bandit state(s).
//
//   Ranked            one bandit per position, keys = engine
//   Cascade           one shared bandit,       keys = engine
//   RankedExplicit    one bandit per position, keys = (engine, rank)
//   CascadeExplicit   one shared bandit,       keys = (engine, rank)
//   Fixed / SingleEngine / Random   non-learning baselines
//
// Ranked feedback fails every displayed non-clicked position (also those
// below the click); cascade feedback only fails positions above the click.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qacme/bandit.hpp"
#include "qacme/engines.hpp"
#include "qacme/rng.hpp"
#include "qacme/suggestion.hpp"

namespace qacme {

enum class StrategyKind {
  kRanked,
  kCascade,
  kRankedExplicit,
  kCascadeExplicit,
  kFixed,
  kSingleEngine,
  kRandom,
};

std::string_view to_string(StrategyKind kind);
bool is_learning(StrategyKind kind);
bool is_explicit(StrategyKind kind);
bool is_per_position(StrategyKind kind);

struct MixtureConfig {
  int positions = 5;  // M
  std::vector<EngineId> engines;
  StrategyKind kind = StrategyKind::kCascade;
  std::vector<EngineId> assignment;  // kFixed: one engine per position
  EngineId single_engine;            // kSingleEngine
  std::uint64_t seed = 0;
  BetaPrior prior;

  // Throws ConfigError when an invariant does not hold.
  void validate() const;
};

// Parses "ranked", "cascade", "ranked_explicit", "cascade_explicit",
// "random", "single:<engine>" and "fixed:<e1>,<e2>,...". Only the kind and
// its arguments are set; positions, engines and seed are left to the caller.
MixtureConfig parse_strategy(std::string_view spec);
// Inverse of parse_strategy().
std::string strategy_name(const MixtureConfig& config);

// One engine's suggestion list for the current episode.
struct EngineCandidates {
  EngineId engine;
  std::vector<Suggestion> items;
};
using CandidateSet = std::vector<EngineCandidates>;

// Queries each listed engine once for up to k suggestions.
CandidateSet gather_candidates(const EnginePool& pool, std::span<const EngineId> engines,
                               std::string_view prefix, const EngineContext& context,
                               std::size_t k);

struct DisplayedItem {
  int position = 0;  // 1-based
  EngineId engine;
  int rank = 0;  // 1-based index in the engine's list
  Suggestion suggestion;

  friend bool operator==(const DisplayedItem&, const DisplayedItem&) = default;
};

struct DisplayedList {
  int positions = 0;  // M, the list width the strategy was asked to fill
  std::vector<DisplayedItem> items;
  bool short_fill = false;

  friend bool operator==(const DisplayedList&, const DisplayedList&) = default;
};

struct AvailableAction {
  EngineId engine;
  int rank = 0;

  friend bool operator==(const AvailableAction&, const AvailableAction&) = default;
};

struct AvailableActionSet {
  int position = 1;
  std::vector<AvailableAction> entries;  // candidate-set order, one per engine
};

// Click index convention: 1..M is a click, M + 1 means no click.
struct EpisodeOutcome {
  DisplayedList list;
  int click = 0;
};

// For each engine, the smallest rank whose text is not already placed.
// Engines with nothing left are omitted.
AvailableActionSet available_actions(const CandidateSet& candidates,
                                     std::span<const DisplayedItem> placed);

// M is states.size() for per-position strategies.
DisplayedList fill_ranked(std::span<BanditState> states, const CandidateSet& candidates);
DisplayedList fill_cascade(BanditState& state, const CandidateSet& candidates, int positions);
DisplayedList fill_ranked_explicit(std::span<BanditState> states, const CandidateSet& candidates);
DisplayedList fill_cascade_explicit(BanditState& state, const CandidateSet& candidates,
                                    int positions);

// Position m is served by assignment[m-1]. When that engine has nothing left
// the first non-exhausted engine of the assignment (in position order) fills
// in, then any other non-exhausted engine in candidate-set order; the list is
// truncated only once every engine is exhausted.
DisplayedList fill_fixed(std::span<const EngineId> assignment, const CandidateSet& candidates);
// Only `engine`'s own list, truncated when it runs out: fill_fixed with the
// same engine at every position over a candidate set holding just that engine.
DisplayedList fill_single(const EngineId& engine, const CandidateSet& candidates, int positions);
DisplayedList fill_random(Rng& rng, const CandidateSet& candidates, int positions);

// Throws InvalidFeedback when the click is outside [1, M + 1] or points past
// the filled items, or when states.size() != M.
void feedback_ranked(std::span<BanditState> states, const EpisodeOutcome& outcome,
                     bool explicit_ranks);
void feedback_cascade(BanditState& state, const EpisodeOutcome& outcome, bool explicit_ranks);

// A configured strategy together with its bandit state(s). Single writer:
// fill() and feedback() must be called in episode order.
class MixtureStrategy {
 public:
  explicit MixtureStrategy(MixtureConfig config);

  const MixtureConfig& config() const { return config_; }
  std::string name() const { return strategy_name(config_); }
  int positions() const { return config_.positions; }

  DisplayedList fill(const CandidateSet& candidates);
  DisplayedList fill(const EnginePool& pool, std::string_view prefix, const EngineContext& context);

  // No-op for baselines.
  void feedback(const EpisodeOutcome& outcome);

  // M states for per-position kinds, one for cascade kinds, none otherwise.
  std::span<const BanditState> states() const { return states_; }

  nlohmann::json snapshot() const;
  // Replaces the bandit states; the snapshot must come from the same kind
  // and M.
  void restore(const nlohmann::json& snapshot);

 private:
  MixtureConfig config_;
  std::vector<BanditState> states_;
  Rng rng_;
};

}  // namespace qacme

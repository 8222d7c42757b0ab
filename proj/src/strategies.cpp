#include "qacme/strategies.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <stdexcept>

#include "qacme/errors.hpp"

namespace qacme {

namespace {

constexpr std::uint64_t kRandomStream = 0x5241'4e44;  // "RAND"

// Picks an index into the available entries, or nullopt to stop filling.
using Chooser = std::function<std::optional<std::size_t>(const AvailableActionSet&)>;

const Suggestion& candidate_at(const CandidateSet& candidates, const EngineId& engine, int rank) {
  for (const auto& c : candidates) {
    if (c.engine == engine) return c.items.at(static_cast<std::size_t>(rank - 1));
  }
  throw std::logic_error("selected engine is not in the candidate set: " + engine);
}

DisplayedList fill_loop(const CandidateSet& candidates, int positions, const Chooser& choose) {
  if (positions < 1) throw ConfigError("a list needs at least one position");
  DisplayedList list;
  list.positions = positions;
  list.items.reserve(static_cast<std::size_t>(positions));
  for (int m = 1; m <= positions; ++m) {
    const auto available = available_actions(candidates, list.items);
    if (available.entries.empty()) break;
    const auto pick = choose(available);
    if (!pick) break;
    const auto& action = available.entries.at(*pick);
    list.items.push_back(
        {m, action.engine, action.rank, candidate_at(candidates, action.engine, action.rank)});
  }
  list.short_fill = static_cast<int>(list.items.size()) < positions;
  return list;
}

std::size_t index_of_engine(const AvailableActionSet& available, const EngineId& engine) {
  for (std::size_t i = 0; i < available.entries.size(); ++i) {
    if (available.entries[i].engine == engine) return i;
  }
  throw std::logic_error("bandit selected an unavailable engine: " + engine);
}

std::size_t select_engine(BanditState& state, const AvailableActionSet& available) {
  std::vector<ActionKey> keys;
  keys.reserve(available.entries.size());
  for (const auto& a : available.entries) keys.emplace_back(a.engine);
  return index_of_engine(available, state.select(keys).engine);
}

std::size_t select_engine_rank(BanditState& state, const AvailableActionSet& available,
                               int max_rank) {
  std::vector<ActionKey> keys;
  keys.reserve(available.entries.size());
  for (const auto& a : available.entries) {
    if (a.rank > max_rank) throw std::logic_error("explicit rank exceeds the list width");
    keys.emplace_back(a.engine, a.rank);
  }
  const auto chosen = state.select(keys);
  for (std::size_t i = 0; i < available.entries.size(); ++i) {
    if (available.entries[i].engine == chosen.engine && available.entries[i].rank == chosen.rank) {
      return i;
    }
  }
  throw std::logic_error("bandit selected an unavailable action");
}

ActionKey key_of(const DisplayedItem& item, bool explicit_ranks) {
  return explicit_ranks ? ActionKey(item.engine, item.rank) : ActionKey(item.engine);
}

void check_outcome(const EpisodeOutcome& outcome) {
  const int m = outcome.list.positions;
  if (outcome.click < 1 || outcome.click > m + 1) {
    throw InvalidFeedback("click index " + std::to_string(outcome.click) +
                          " outside [1, " + std::to_string(m + 1) + "]");
  }
  if (outcome.click <= m && outcome.click > static_cast<int>(outcome.list.items.size())) {
    throw InvalidFeedback("click at position " + std::to_string(outcome.click) +
                          " but only " + std::to_string(outcome.list.items.size()) +
                          " positions were filled");
  }
}

std::vector<std::string> split(std::string_view s, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto end = s.find(delim, start);
    out.emplace_back(s.substr(start, end == std::string_view::npos ? s.npos : end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

}  // namespace

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kRanked: return "ranked";
    case StrategyKind::kCascade: return "cascade";
    case StrategyKind::kRankedExplicit: return "ranked_explicit";
    case StrategyKind::kCascadeExplicit: return "cascade_explicit";
    case StrategyKind::kFixed: return "fixed";
    case StrategyKind::kSingleEngine: return "single";
    case StrategyKind::kRandom: return "random";
  }
  return "unknown";
}

bool is_learning(StrategyKind kind) {
  return kind == StrategyKind::kRanked || kind == StrategyKind::kCascade ||
         kind == StrategyKind::kRankedExplicit || kind == StrategyKind::kCascadeExplicit;
}

bool is_explicit(StrategyKind kind) {
  return kind == StrategyKind::kRankedExplicit || kind == StrategyKind::kCascadeExplicit;
}

bool is_per_position(StrategyKind kind) {
  return kind == StrategyKind::kRanked || kind == StrategyKind::kRankedExplicit;
}

void MixtureConfig::validate() const {
  if (positions < 1) throw ConfigError("M must be >= 1");
  if (engines.empty()) throw ConfigError("a mixture needs at least one engine");
  const std::set<EngineId> unique(engines.begin(), engines.end());
  if (unique.size() != engines.size()) throw ConfigError("duplicate engine id in mixture");
  if (!(prior.alpha > 0.0) || !(prior.beta > 0.0)) {
    throw ConfigError("Beta prior parameters must be positive");
  }
  if (kind == StrategyKind::kFixed) {
    if (static_cast<int>(assignment.size()) != positions) {
      throw ConfigError("fixed assignment must have exactly M entries");
    }
    for (const auto& e : assignment) {
      if (!unique.contains(e)) throw ConfigError("fixed assignment uses unknown engine: " + e);
    }
  }
  if (kind == StrategyKind::kSingleEngine && !unique.contains(single_engine)) {
    throw ConfigError("single-engine baseline uses unknown engine: " + single_engine);
  }
}

MixtureConfig parse_strategy(std::string_view spec) {
  MixtureConfig c;
  const auto colon = spec.find(':');
  const auto head = spec.substr(0, colon);
  const auto arg = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
  if (head == "ranked") {
    c.kind = StrategyKind::kRanked;
  } else if (head == "cascade") {
    c.kind = StrategyKind::kCascade;
  } else if (head == "ranked_explicit") {
    c.kind = StrategyKind::kRankedExplicit;
  } else if (head == "cascade_explicit") {
    c.kind = StrategyKind::kCascadeExplicit;
  } else if (head == "random") {
    c.kind = StrategyKind::kRandom;
  } else if (head == "single" && !arg.empty()) {
    c.kind = StrategyKind::kSingleEngine;
    c.single_engine = std::string(arg);
  } else if (head == "fixed" && !arg.empty()) {
    c.kind = StrategyKind::kFixed;
    c.assignment = split(arg, ',');
  } else {
    throw ConfigError("unknown strategy: " + std::string(spec));
  }
  if (colon != std::string_view::npos && c.kind != StrategyKind::kSingleEngine &&
      c.kind != StrategyKind::kFixed) {
    throw ConfigError("strategy takes no argument: " + std::string(spec));
  }
  return c;
}

std::string strategy_name(const MixtureConfig& config) {
  std::string name(to_string(config.kind));
  if (config.kind == StrategyKind::kSingleEngine) return name + ":" + config.single_engine;
  if (config.kind == StrategyKind::kFixed) {
    name += ':';
    for (std::size_t i = 0; i < config.assignment.size(); ++i) {
      if (i) name += ',';
      name += config.assignment[i];
    }
  }
  return name;
}

CandidateSet gather_candidates(const EnginePool& pool, std::span<const EngineId> engines,
                               std::string_view prefix, const EngineContext& context,
                               std::size_t k) {
  CandidateSet out;
  out.reserve(engines.size());
  for (const auto& id : engines) {
    const Engine* engine = pool.find(id);
    if (!engine) throw ConfigError("unknown engine: " + id);
    out.push_back({id, engine->suggest(prefix, context, k)});
  }
  return out;
}

AvailableActionSet available_actions(const CandidateSet& candidates,
                                     std::span<const DisplayedItem> placed) {
  AvailableActionSet set;
  set.position = static_cast<int>(placed.size()) + 1;
  for (const auto& c : candidates) {
    for (std::size_t i = 0; i < c.items.size(); ++i) {
      const auto& text = c.items[i].text;
      const bool used = std::any_of(placed.begin(), placed.end(),
                                    [&](const DisplayedItem& d) { return d.suggestion.text == text; });
      if (!used) {
        set.entries.push_back({c.engine, static_cast<int>(i) + 1});
        break;
      }
    }
  }
  return set;
}

DisplayedList fill_ranked(std::span<BanditState> states, const CandidateSet& candidates) {
  return fill_loop(candidates, static_cast<int>(states.size()),
                   [&](const AvailableActionSet& a) -> std::optional<std::size_t> {
                     return select_engine(states[static_cast<std::size_t>(a.position - 1)], a);
                   });
}

DisplayedList fill_cascade(BanditState& state, const CandidateSet& candidates, int positions) {
  return fill_loop(candidates, positions,
                   [&](const AvailableActionSet& a) -> std::optional<std::size_t> {
                     return select_engine(state, a);
                   });
}

DisplayedList fill_ranked_explicit(std::span<BanditState> states, const CandidateSet& candidates) {
  const int m = static_cast<int>(states.size());
  return fill_loop(candidates, m, [&](const AvailableActionSet& a) -> std::optional<std::size_t> {
    return select_engine_rank(states[static_cast<std::size_t>(a.position - 1)], a, m);
  });
}

DisplayedList fill_cascade_explicit(BanditState& state, const CandidateSet& candidates,
                                    int positions) {
  return fill_loop(candidates, positions,
                   [&](const AvailableActionSet& a) -> std::optional<std::size_t> {
                     return select_engine_rank(state, a, positions);
                   });
}

DisplayedList fill_fixed(std::span<const EngineId> assignment, const CandidateSet& candidates) {
  return fill_loop(candidates, static_cast<int>(assignment.size()),
                   [&](const AvailableActionSet& a) -> std::optional<std::size_t> {
                     const auto& wanted = assignment[static_cast<std::size_t>(a.position - 1)];
                     for (std::size_t i = 0; i < a.entries.size(); ++i) {
                       if (a.entries[i].engine == wanted) return i;
                     }
                     for (const auto& fallback : assignment) {
                       for (std::size_t i = 0; i < a.entries.size(); ++i) {
                         if (a.entries[i].engine == fallback) return i;
                       }
                     }
                     // Then any other engine, in candidate-set order.
                     if (!a.entries.empty()) return std::size_t{0};
                     return std::nullopt;
                   });
}

DisplayedList fill_single(const EngineId& engine, const CandidateSet& candidates, int positions) {
  if (positions < 1) throw ConfigError("a list needs at least one position");
  const std::vector<EngineId> assignment(static_cast<std::size_t>(positions), engine);
  CandidateSet own;
  for (const auto& c : candidates) {
    if (c.engine == engine) own.push_back(c);
  }
  return fill_fixed(assignment, own);
}

DisplayedList fill_random(Rng& rng, const CandidateSet& candidates, int positions) {
  return fill_loop(candidates, positions,
                   [&](const AvailableActionSet& a) -> std::optional<std::size_t> {
                     return static_cast<std::size_t>(rng.below(a.entries.size()));
                   });
}

void feedback_ranked(std::span<BanditState> states, const EpisodeOutcome& outcome,
                     bool explicit_ranks) {
  check_outcome(outcome);
  if (static_cast<int>(states.size()) != outcome.list.positions) {
    throw InvalidFeedback("ranked feedback needs one bandit per position");
  }
  for (const auto& item : outcome.list.items) {
    const auto result = item.position == outcome.click ? Outcome::kSuccess : Outcome::kFailure;
    states[static_cast<std::size_t>(item.position - 1)].update(key_of(item, explicit_ranks), result);
  }
}

void feedback_cascade(BanditState& state, const EpisodeOutcome& outcome, bool explicit_ranks) {
  check_outcome(outcome);
  for (const auto& item : outcome.list.items) {
    if (item.position > outcome.click) break;
    const auto result = item.position == outcome.click ? Outcome::kSuccess : Outcome::kFailure;
    state.update(key_of(item, explicit_ranks), result);
  }
}

MixtureStrategy::MixtureStrategy(MixtureConfig config)
    : config_(std::move(config)), rng_(derive_seed(config_.seed, kRandomStream)) {
  config_.validate();
  std::vector<ActionKey> initial;
  if (!is_explicit(config_.kind)) {
    for (const auto& e : config_.engines) initial.emplace_back(e);
  }
  if (is_per_position(config_.kind)) {
    states_.reserve(static_cast<std::size_t>(config_.positions));
    for (int m = 0; m < config_.positions; ++m) {
      states_.emplace_back(initial, config_.prior,
                           derive_seed(config_.seed, static_cast<std::uint64_t>(m)));
    }
  } else if (is_learning(config_.kind)) {
    states_.emplace_back(initial, config_.prior, derive_seed(config_.seed, 0));
  }
}

DisplayedList MixtureStrategy::fill(const CandidateSet& candidates) {
  const int m = config_.positions;
  switch (config_.kind) {
    case StrategyKind::kRanked: return fill_ranked(states_, candidates);
    case StrategyKind::kCascade: return fill_cascade(states_.front(), candidates, m);
    case StrategyKind::kRankedExplicit: return fill_ranked_explicit(states_, candidates);
    case StrategyKind::kCascadeExplicit:
      return fill_cascade_explicit(states_.front(), candidates, m);
    case StrategyKind::kFixed: return fill_fixed(config_.assignment, candidates);
    case StrategyKind::kSingleEngine: return fill_single(config_.single_engine, candidates, m);
    case StrategyKind::kRandom: return fill_random(rng_, candidates, m);
  }
  throw std::logic_error("unhandled strategy kind");
}

DisplayedList MixtureStrategy::fill(const EnginePool& pool, std::string_view prefix,
                                    const EngineContext& context) {
  const auto k = static_cast<std::size_t>(config_.positions);
  if (config_.kind == StrategyKind::kSingleEngine) {
    const std::vector<EngineId> own{config_.single_engine};
    return fill(gather_candidates(pool, own, prefix, context, k));
  }
  return fill(gather_candidates(pool, config_.engines, prefix, context, k));
}

void MixtureStrategy::feedback(const EpisodeOutcome& outcome) {
  if (outcome.list.positions != config_.positions) {
    throw InvalidFeedback("outcome list width does not match the strategy's M");
  }
  const bool expl = is_explicit(config_.kind);
  if (is_per_position(config_.kind)) {
    feedback_ranked(states_, outcome, expl);
  } else if (is_learning(config_.kind)) {
    feedback_cascade(states_.front(), outcome, expl);
  } else {
    check_outcome(outcome);
  }
}

nlohmann::json MixtureStrategy::snapshot() const {
  nlohmann::json states = nlohmann::json::array();
  for (const auto& s : states_) states.push_back(s.to_json());
  return {{"format", "qacme-strategy-snapshot"},
          {"version", 1},
          {"strategy", name()},
          {"positions", config_.positions},
          {"states", std::move(states)}};
}

void MixtureStrategy::restore(const nlohmann::json& snapshot) {
  try {
    if (snapshot.at("strategy").get<std::string>() != name() ||
        snapshot.at("positions").get<int>() != config_.positions) {
      throw InvalidInput("snapshot was taken from a different strategy configuration");
    }
    const auto& arr = snapshot.at("states");
    if (arr.size() != states_.size()) throw InvalidInput("snapshot has the wrong number of states");
    std::vector<BanditState> restored;
    restored.reserve(arr.size());
    for (const auto& s : arr) restored.push_back(BanditState::from_json(s));
    states_ = std::move(restored);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed strategy snapshot: ") + e.what());
  }
}

}  // namespace qacme

#pragma once

// Beta-Bernoulli Thompson sampling over dynamic action sets.
//
// Every mixture strategy owns one or more BanditState instances. Actions are
// keyed by engine id (plain strategies) or by (engine id, rank) (explicit
// strategies). Keys that were never seen are created lazily at the prior.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qacme/rng.hpp"

namespace qacme {

using EngineId = std::string;

struct ActionKey {
  EngineId engine;
  // 1-based rank inside the engine's suggestion list; set only for explicit
  // strategies.
  std::optional<int> rank;

  ActionKey() = default;
  explicit ActionKey(EngineId e, std::optional<int> r = std::nullopt);

  // Lexicographic (engine, rank) with the rank-free key first. This order is
  // also the tie-break order of select().
  friend auto operator<=>(const ActionKey&, const ActionKey&) = default;
  friend bool operator==(const ActionKey&, const ActionKey&) = default;
};

std::string to_string(const ActionKey& key);

struct BetaPrior {
  double alpha = 1.0;
  double beta = 1.0;

  friend bool operator==(const BetaPrior&, const BetaPrior&) = default;
};

struct BetaPosterior {
  double alpha = 1.0;
  double beta = 1.0;

  double mean() const { return alpha / (alpha + beta); }
  friend bool operator==(const BetaPosterior&, const BetaPosterior&) = default;
};

enum class Outcome : std::uint8_t { kFailure = 0, kSuccess = 1 };

// One posterior sample drawn for an action during selection.
struct ActionSample {
  ActionKey key;
  double value;
};

// Index of the largest sample; ties go to the lowest key.
std::size_t argmax(std::span<const ActionSample> samples);

class BanditState {
 public:
  // Throws ConfigError unless prior.alpha > 0 and prior.beta > 0.
  BanditState(std::span<const ActionKey> actions, BetaPrior prior, std::uint64_t seed);

  // Conjugate update: success adds one to alpha, failure one to beta.
  void update(const ActionKey& action, Outcome outcome);

  // Thompson selection: one Beta draw per available action, argmax wins.
  // `available` must be non-empty (InvalidInput otherwise). Samples are drawn
  // in key order so the result does not depend on the caller's ordering.
  ActionKey select(std::span<const ActionKey> available);

  // The draws select() would use; exposed for testing the argmax rule.
  std::vector<ActionSample> draw_samples(std::span<const ActionKey> available);

  const BetaPosterior* find(const ActionKey& action) const;
  const std::map<ActionKey, BetaPosterior>& posteriors() const { return posteriors_; }
  BetaPrior prior() const { return prior_; }
  const Rng& rng() const { return rng_; }

  // Sum over actions of (alpha + beta) minus the prior mass, i.e. the number
  // of updates applied so far.
  double pulls() const;

  nlohmann::json to_json() const;
  static BanditState from_json(const nlohmann::json& j);

  friend bool operator==(const BanditState&, const BanditState&) = default;

 private:
  BetaPosterior& entry(const ActionKey& action);

  BetaPrior prior_;
  std::map<ActionKey, BetaPosterior> posteriors_;
  Rng rng_;
};

BanditState init_bandit(std::span<const ActionKey> actions, BetaPrior prior, std::uint64_t seed);

}  // namespace qacme

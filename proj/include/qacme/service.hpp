#pragma once

// Live suggestion service. Every suggest() call is an episode: the displayed
// list is stored under a one-shot token and the bandit is only updated when
// that token receives feedback or expires (expiry = no click).
//
// Thread safety: all public methods may be called concurrently. Strategy
// mutations go through one writer lock, so fills and feedback for this
// instance are serialized; the ticket store has its own lock.

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "qacme/engines.hpp"
#include "qacme/rng.hpp"
#include "qacme/strategies.hpp"

namespace qacme {

struct ServiceOptions {
  double ttl_seconds = 120.0;
  // Expire tickets superseded by a newer ticket of the same user without
  // touching the bandit, instead of counting them as no-clicks.
  bool silent_intermediate_expiry = false;
  std::uint64_t token_seed = 0;
};

struct EpisodeTicket {
  std::string token;
  double issued_at = 0.0;
  DisplayedList displayed;
  std::string strategy;
  std::optional<std::string> user;
  std::uint64_t sequence = 0;
};

struct ShownSuggestion {
  int position = 0;
  std::string text;
};

struct SuggestResponse {
  std::string token;
  std::vector<ShownSuggestion> suggestions;
  bool short_fill = false;
};

struct StatsRow {
  EngineId engine;
  std::optional<int> rank;
  double alpha = 0.0;
  double beta = 0.0;
  double mean = 0.0;
  double pulls = 0.0;
};

struct StatsTable {
  std::string strategy;
  int positions = 0;
  BetaPrior prior;
  // One entry per bandit: per position for ranked kinds, one for cascade.
  std::vector<std::vector<StatsRow>> states;
  long episodes = 0;  // tickets resolved (feedback or expiry with update)
  long clicks = 0;
  long updates = 0;  // posterior updates dispatched
  std::size_t open_tickets = 0;
};

class QacService {
 public:
  QacService(EnginePool pool, MixtureConfig strategy, ServiceOptions options = {});

  // Throws InvalidInput when the prefix is empty after normalization.
  SuggestResponse suggest(std::string_view raw_prefix, const std::optional<std::string>& user,
                          double now);

  // `position` is 1-based; nullopt means no click. Throws TicketError for an
  // unknown or consumed token and InvalidFeedback for a position outside the
  // displayed list; neither changes any state.
  void feedback(std::string_view token, std::optional<int> position);

  // Tickets issued more than ttl_seconds before `now` are resolved as no
  // click. Returns how many were expired.
  std::size_t expire_tickets(double now);

  StatsTable stats() const;
  nlohmann::json stats_json() const;

  nlohmann::json snapshot() const;
  void restore(const nlohmann::json& snapshot);

  std::size_t open_tickets() const;
  const ServiceOptions& options() const { return options_; }

 private:
  // Caller holds writer_mutex_.
  void apply_outcome(const EpisodeTicket& ticket, int click);

  EnginePool pool_;
  ServiceOptions options_;

  mutable std::mutex writer_mutex_;
  MixtureStrategy strategy_;
  long episodes_ = 0;
  long clicks_ = 0;
  long updates_ = 0;

  mutable std::mutex tickets_mutex_;
  std::unordered_map<std::string, EpisodeTicket> tickets_;
  std::map<std::string, std::uint64_t> latest_by_user_;
  std::uint64_t next_sequence_ = 0;
  Rng token_rng_;
};

nlohmann::json to_json(const SuggestResponse& response);

}  // namespace qacme

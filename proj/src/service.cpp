#include "qacme/service.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>

#include "qacme/errors.hpp"
#include "qacme/text.hpp"

namespace qacme {

namespace {

double total_pulls(const MixtureStrategy& s) {
  double total = 0.0;
  for (const auto& state : s.states()) total += state.pulls();
  return total;
}

}  // namespace

QacService::QacService(EnginePool pool, MixtureConfig strategy, ServiceOptions options)
    : pool_(std::move(pool)),
      options_(options),
      strategy_(std::move(strategy)),
      token_rng_(options.token_seed) {
  if (!(options_.ttl_seconds > 0.0)) throw ConfigError("ticket TTL must be positive");
  for (const auto& id : strategy_.config().engines) {
    if (!pool_.find(id)) throw ConfigError("strategy uses an engine the pool lacks: " + id);
  }
}

SuggestResponse QacService::suggest(std::string_view raw_prefix,
                                    const std::optional<std::string>& user, double now) {
  const auto prefix = normalize_prefix(raw_prefix);
  if (prefix.empty()) throw InvalidInput("prefix is empty");

  EngineContext ctx;
  if (user && !user->empty()) ctx.user = *user;
  ctx.timestamp = now;
  const auto candidates =
      gather_candidates(pool_, strategy_.config().engines, prefix, ctx,
                        static_cast<std::size_t>(strategy_.positions()));

  EpisodeTicket ticket;
  {
    std::lock_guard lock(writer_mutex_);
    ticket.displayed = strategy_.fill(candidates);
    ticket.strategy = strategy_.name();
  }
  ticket.issued_at = now;
  ticket.user = ctx.user;

  SuggestResponse response;
  response.short_fill = ticket.displayed.short_fill;
  for (const auto& item : ticket.displayed.items) {
    response.suggestions.push_back({item.position, item.suggestion.text});
  }
  {
    std::lock_guard lock(tickets_mutex_);
    ticket.sequence = next_sequence_++;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%016" PRIx64 "%08" PRIx64, token_rng_.next(), ticket.sequence);
    ticket.token = buf;
    if (ticket.user) latest_by_user_[*ticket.user] = ticket.sequence;
    response.token = ticket.token;
    tickets_.emplace(ticket.token, std::move(ticket));
  }
  return response;
}

void QacService::apply_outcome(const EpisodeTicket& ticket, int click) {
  const double before = total_pulls(strategy_);
  strategy_.feedback({ticket.displayed, click});
  updates_ += static_cast<long>(total_pulls(strategy_) - before);
  ++episodes_;
  if (click <= ticket.displayed.positions) ++clicks_;
}

void QacService::feedback(std::string_view token, std::optional<int> position) {
  EpisodeTicket ticket;
  {
    std::lock_guard lock(tickets_mutex_);
    auto it = tickets_.find(std::string(token));
    if (it == tickets_.end()) {
      throw TicketError("unknown or already consumed token: " + std::string(token));
    }
    const auto& shown = it->second.displayed;
    if (position && (*position < 1 || *position > static_cast<int>(shown.items.size()))) {
      throw InvalidFeedback("clicked position " + std::to_string(*position) +
                            " is outside the displayed list of " +
                            std::to_string(shown.items.size()));
    }
    ticket = std::move(it->second);
    tickets_.erase(it);
  }
  const int click = position.value_or(ticket.displayed.positions + 1);
  std::lock_guard lock(writer_mutex_);
  apply_outcome(ticket, click);
}

std::size_t QacService::expire_tickets(double now) {
  std::vector<EpisodeTicket> expired;
  std::vector<bool> silent;
  {
    std::lock_guard lock(tickets_mutex_);
    for (auto it = tickets_.begin(); it != tickets_.end();) {
      if (now - it->second.issued_at > options_.ttl_seconds) {
        bool superseded = false;
        if (options_.silent_intermediate_expiry && it->second.user) {
          auto latest = latest_by_user_.find(*it->second.user);
          superseded = latest != latest_by_user_.end() && latest->second > it->second.sequence;
        }
        silent.push_back(superseded);
        expired.push_back(std::move(it->second));
        it = tickets_.erase(it);
      } else {
        ++it;
      }
    }
  }
  // Resolve in issue order so the bandit sees episodes in sequence.
  std::vector<std::size_t> order(expired.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](auto a, auto b) { return expired[a].sequence < expired[b].sequence; });
  std::lock_guard lock(writer_mutex_);
  for (auto i : order) {
    if (!silent[i]) apply_outcome(expired[i], expired[i].displayed.positions + 1);
  }
  return expired.size();
}

StatsTable QacService::stats() const {
  StatsTable table;
  {
    std::lock_guard lock(writer_mutex_);
    table.strategy = strategy_.name();
    table.positions = strategy_.positions();
    table.prior = strategy_.config().prior;
    const BetaPrior prior = table.prior;
    for (const auto& state : strategy_.states()) {
      std::vector<StatsRow> rows;
      for (const auto& [key, post] : state.posteriors()) {
        rows.push_back({key.engine, key.rank, post.alpha, post.beta, post.mean(),
                        post.alpha + post.beta - prior.alpha - prior.beta});
      }
      table.states.push_back(std::move(rows));
    }
    table.episodes = episodes_;
    table.clicks = clicks_;
    table.updates = updates_;
  }
  table.open_tickets = open_tickets();
  return table;
}

nlohmann::json QacService::stats_json() const {
  const auto t = stats();
  const auto kind = strategy_.config().kind;
  nlohmann::json states = nlohmann::json::array();
  for (std::size_t i = 0; i < t.states.size(); ++i) {
    nlohmann::json actions = nlohmann::json::array();
    for (const auto& r : t.states[i]) {
      actions.push_back({{"engine", r.engine},
                         {"rank", r.rank ? nlohmann::json(*r.rank) : nlohmann::json(nullptr)},
                         {"alpha", r.alpha},
                         {"beta", r.beta},
                         {"mean", r.mean},
                         {"pulls", r.pulls}});
    }
    nlohmann::json s = {{"actions", std::move(actions)}};
    if (is_per_position(kind)) {
      s["position"] = i + 1;
    } else {
      s["position"] = nullptr;
    }
    states.push_back(std::move(s));
  }
  return {{"strategy", t.strategy},
          {"kind", std::string(to_string(kind))},
          {"explicit", is_explicit(kind)},
          {"positions", t.positions},
          {"prior", {{"alpha", t.prior.alpha}, {"beta", t.prior.beta}}},
          {"episodes", t.episodes},
          {"clicks", t.clicks},
          {"ctr", t.episodes > 0 ? static_cast<double>(t.clicks) / static_cast<double>(t.episodes) : 0.0},
          {"updates", t.updates},
          {"open_tickets", t.open_tickets},
          {"states", std::move(states)}};
}

nlohmann::json QacService::snapshot() const {
  std::lock_guard lock(writer_mutex_);
  return {{"format", "qacme-service-snapshot"},
          {"version", 1},
          {"strategy", strategy_.snapshot()},
          {"counters", {{"episodes", episodes_}, {"clicks", clicks_}, {"updates", updates_}}}};
}

void QacService::restore(const nlohmann::json& snapshot) {
  try {
    if (snapshot.at("format").get<std::string>() != "qacme-service-snapshot") {
      throw InvalidInput("not a service snapshot");
    }
    const auto& c = snapshot.at("counters");
    const auto episodes = c.at("episodes").get<long>();
    const auto clicks = c.at("clicks").get<long>();
    const auto updates = c.at("updates").get<long>();
    std::lock_guard lock(writer_mutex_);
    strategy_.restore(snapshot.at("strategy"));
    episodes_ = episodes;
    clicks_ = clicks;
    updates_ = updates;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed service snapshot: ") + e.what());
  }
}

std::size_t QacService::open_tickets() const {
  std::lock_guard lock(tickets_mutex_);
  return tickets_.size();
}

nlohmann::json to_json(const SuggestResponse& response) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& s : response.suggestions) {
    items.push_back({{"position", s.position}, {"text", s.text}});
  }
  return {{"token", response.token},
          {"suggestions", std::move(items)},
          {"short_fill", response.short_fill}};
}

}  // namespace qacme

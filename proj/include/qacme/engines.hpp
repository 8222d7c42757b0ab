#pragma once

// Completion engines. Each returns, for a prefix and a context, its own
// relevance-ordered list of normalized suggestions with no repeated text.
// Engines are read-only after construction in replay mode; observe() is the
// optional online-update hook and must be externally serialized.

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qacme/bandit.hpp"
#include "qacme/query_log.hpp"
#include "qacme/suggestion.hpp"
#include "qacme/trie.hpp"

namespace qacme {

struct EngineContext {
  std::optional<std::string> user;
  double timestamp = 0.0;
  // The user's earlier full queries in this session, normalized.
  std::vector<std::string> session_queries;
};

class Engine {
 public:
  explicit Engine(EngineId id) : id_(std::move(id)) {}
  virtual ~Engine() = default;

  const EngineId& id() const { return id_; }

  // `prefix` must already be normalized (see normalize_prefix). Returns at
  // most k suggestions, every one starting with `prefix`.
  virtual std::vector<Suggestion> suggest(std::string_view prefix, const EngineContext& context,
                                          std::size_t k) const = 0;

  virtual void observe(const QueryLogRecord& record) = 0;

 private:
  EngineId id_;
};

// Global query counts.
class PopularityEngine : public Engine {
 public:
  explicit PopularityEngine(EngineId id = "popularity");
  std::vector<Suggestion> suggest(std::string_view prefix, const EngineContext& context,
                                  std::size_t k) const override;
  void observe(const QueryLogRecord& record) override;
  const WeightedTrie& trie() const { return trie_; }

 private:
  WeightedTrie trie_;
};

// Counts decayed by exp(-decay_rate * age), age measured against
// `reference_time` (the newest training record). Rebasing to any later "now"
// multiplies all weights by one constant, so the order is unaffected.
class RecencyEngine : public Engine {
 public:
  RecencyEngine(double decay_rate_per_second, double reference_time, EngineId id = "recency");
  std::vector<Suggestion> suggest(std::string_view prefix, const EngineContext& context,
                                  std::size_t k) const override;
  void observe(const QueryLogRecord& record) override;
  double decay_rate() const { return decay_rate_; }

 private:
  double decay_rate_;
  double reference_time_;
  WeightedTrie trie_;
};

// Per-user query counts plus the current session; nothing for unknown users.
class UserHistoryEngine : public Engine {
 public:
  explicit UserHistoryEngine(EngineId id = "user_history");
  std::vector<Suggestion> suggest(std::string_view prefix, const EngineContext& context,
                                  std::size_t k) const override;
  void observe(const QueryLogRecord& record) override;
  std::size_t user_count() const { return per_user_.size(); }

 private:
  std::unordered_map<std::string, WeightedTrie> per_user_;
};

// Completes the last (partial) token of the prefix from a term lexicon and
// returns the prefix with that token completed.
class DictionaryEngine : public Engine {
 public:
  explicit DictionaryEngine(EngineId id = "dictionary");
  std::vector<Suggestion> suggest(std::string_view prefix, const EngineContext& context,
                                  std::size_t k) const override;
  void observe(const QueryLogRecord& record) override;
  void add_term(std::string_view term, double weight = 1.0);
  const WeightedTrie& lexicon() const { return lexicon_; }

 private:
  WeightedTrie lexicon_;
};

// Ordered set of engines with unique ids.
class EnginePool {
 public:
  EnginePool() = default;
  EnginePool(EnginePool&&) noexcept = default;
  EnginePool& operator=(EnginePool&&) noexcept = default;

  // Throws ConfigError on a duplicate id.
  Engine& add(std::unique_ptr<Engine> engine);

  const Engine* find(std::string_view id) const;
  Engine* find(std::string_view id);
  std::vector<EngineId> ids() const;
  std::size_t size() const { return engines_.size(); }
  bool empty() const { return engines_.empty(); }

  // Keeps only the listed engines, in the listed order.
  EnginePool select(std::span<const EngineId> ids) &&;

  void observe(const QueryLogRecord& record);

  auto begin() const { return engines_.begin(); }
  auto end() const { return engines_.end(); }

 private:
  std::vector<std::unique_ptr<Engine>> engines_;
};

struct EngineConfig {
  double recency_half_life_seconds = 7.0 * 24.0 * 3600.0;
  // Extra dictionary terms, e.g. from a lexicon file.
  std::vector<std::string> lexicon;
};

// Decay rate for a half-life; an infinite half-life means no decay.
double decay_rate_for_half_life(double half_life_seconds);

// Builds {popularity, recency, user_history, dictionary} from a training log.
// Records whose normalized query is empty are ignored. An empty log yields
// valid engines that return nothing.
EnginePool build_engines(std::span<const QueryLogRecord> training_log, const EngineConfig& config);

// Newline-delimited term list; blank lines skipped, terms normalized.
std::vector<std::string> read_lexicon(std::istream& in);

}  // namespace qacme

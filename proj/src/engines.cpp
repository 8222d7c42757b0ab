#include "qacme/engines.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>

#include "qacme/errors.hpp"
#include "qacme/text.hpp"

namespace qacme {

namespace {

bool by_score_then_text(const Suggestion& a, const Suggestion& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.text < b.text;
}

}  // namespace

PopularityEngine::PopularityEngine(EngineId id) : Engine(std::move(id)) {}

std::vector<Suggestion> PopularityEngine::suggest(std::string_view prefix, const EngineContext&,
                                                  std::size_t k) const {
  return trie_.top_k(prefix, k);
}

void PopularityEngine::observe(const QueryLogRecord& record) {
  auto q = normalize_query(record.query);
  if (!q.empty()) trie_.insert(q, 1.0);
}

RecencyEngine::RecencyEngine(double decay_rate_per_second, double reference_time, EngineId id)
    : Engine(std::move(id)), decay_rate_(decay_rate_per_second), reference_time_(reference_time) {
  if (!(decay_rate_ >= 0.0) || !std::isfinite(decay_rate_)) {
    throw ConfigError("recency decay rate must be finite and >= 0");
  }
}

std::vector<Suggestion> RecencyEngine::suggest(std::string_view prefix, const EngineContext&,
                                               std::size_t k) const {
  return trie_.top_k(prefix, k);
}

void RecencyEngine::observe(const QueryLogRecord& record) {
  auto q = normalize_query(record.query);
  if (q.empty()) return;
  const double age = reference_time_ - record.timestamp;
  trie_.insert(q, std::exp(-decay_rate_ * age));
}

UserHistoryEngine::UserHistoryEngine(EngineId id) : Engine(std::move(id)) {}

std::vector<Suggestion> UserHistoryEngine::suggest(std::string_view prefix,
                                                   const EngineContext& context,
                                                   std::size_t k) const {
  const WeightedTrie* history = nullptr;
  if (context.user && !context.user->empty()) {
    auto it = per_user_.find(*context.user);
    if (it != per_user_.end()) history = &it->second;
  }

  std::map<std::string, double, std::less<>> session;
  for (const auto& q : context.session_queries) {
    if (q.starts_with(prefix)) session[q] += 1.0;
  }
  if (session.empty()) {
    return history ? history->top_k(prefix, k) : std::vector<Suggestion>{};
  }

  // Only session items can move up, so the trie's top (k + |session|)
  // contains every non-session item of the combined top k.
  std::map<std::string, double, std::less<>> merged;
  if (history) {
    for (auto& s : history->top_k(prefix, k + session.size())) merged[s.text] = s.score;
  }
  for (const auto& [text, count] : session) {
    double base = 0.0;
    if (auto it = merged.find(text); it != merged.end()) {
      base = it->second;
    } else if (history) {
      base = history->weight(text).value_or(0.0);
    }
    merged[text] = base + count;
  }
  std::vector<Suggestion> out;
  out.reserve(merged.size());
  for (auto& [text, score] : merged) out.push_back({text, score});
  std::sort(out.begin(), out.end(), by_score_then_text);
  if (out.size() > k) out.resize(k);
  return out;
}

void UserHistoryEngine::observe(const QueryLogRecord& record) {
  if (record.user.empty()) return;
  auto q = normalize_query(record.query);
  if (!q.empty()) per_user_[record.user].insert(q, 1.0);
}

DictionaryEngine::DictionaryEngine(EngineId id) : Engine(std::move(id)) {}

std::vector<Suggestion> DictionaryEngine::suggest(std::string_view prefix, const EngineContext&,
                                                  std::size_t k) const {
  const auto cut = prefix.rfind(' ');
  const std::string_view head = cut == std::string_view::npos ? std::string_view{} : prefix.substr(0, cut + 1);
  const std::string_view token = prefix.substr(head.size());
  auto terms = lexicon_.top_k(token, k);
  for (auto& t : terms) t.text.insert(0, head);
  return terms;
}

void DictionaryEngine::observe(const QueryLogRecord& record) {
  const auto q = normalize_query(record.query);
  std::size_t start = 0;
  while (start < q.size()) {
    auto end = q.find(' ', start);
    if (end == std::string::npos) end = q.size();
    lexicon_.insert(std::string_view(q).substr(start, end - start), 1.0);
    start = end + 1;
  }
}

void DictionaryEngine::add_term(std::string_view term, double weight) {
  auto t = normalize_query(term);
  if (t.empty()) throw InvalidInput("empty dictionary term");
  lexicon_.insert(t, weight);
}

Engine& EnginePool::add(std::unique_ptr<Engine> engine) {
  if (!engine) throw ConfigError("null engine");
  if (find(engine->id())) throw ConfigError("duplicate engine id: " + engine->id());
  engines_.push_back(std::move(engine));
  return *engines_.back();
}

const Engine* EnginePool::find(std::string_view id) const {
  for (const auto& e : engines_) {
    if (e->id() == id) return e.get();
  }
  return nullptr;
}

Engine* EnginePool::find(std::string_view id) {
  return const_cast<Engine*>(std::as_const(*this).find(id));
}

std::vector<EngineId> EnginePool::ids() const {
  std::vector<EngineId> out;
  out.reserve(engines_.size());
  for (const auto& e : engines_) out.push_back(e->id());
  return out;
}

EnginePool EnginePool::select(std::span<const EngineId> ids) && {
  EnginePool out;
  for (const auto& id : ids) {
    auto it = std::find_if(engines_.begin(), engines_.end(),
                           [&](const auto& e) { return e && e->id() == id; });
    if (it == engines_.end()) throw ConfigError("unknown engine: " + id);
    out.add(std::move(*it));
  }
  engines_.clear();
  return out;
}

void EnginePool::observe(const QueryLogRecord& record) {
  for (auto& e : engines_) e->observe(record);
}

double decay_rate_for_half_life(double half_life_seconds) {
  if (std::isinf(half_life_seconds)) return 0.0;
  if (!(half_life_seconds > 0.0)) throw ConfigError("recency half-life must be positive");
  return std::log(2.0) / half_life_seconds;
}

EnginePool build_engines(std::span<const QueryLogRecord> training_log, const EngineConfig& config) {
  double reference = 0.0;
  for (const auto& r : training_log) reference = std::max(reference, r.timestamp);

  EnginePool pool;
  auto& popularity = pool.add(std::make_unique<PopularityEngine>());
  auto& recency = pool.add(std::make_unique<RecencyEngine>(
      decay_rate_for_half_life(config.recency_half_life_seconds), reference));
  auto& history = pool.add(std::make_unique<UserHistoryEngine>());
  auto dictionary = std::make_unique<DictionaryEngine>();
  for (const auto& term : config.lexicon) dictionary->add_term(term);
  auto& dict = pool.add(std::move(dictionary));

  for (const auto& r : training_log) {
    popularity.observe(r);
    recency.observe(r);
    history.observe(r);
    dict.observe(r);
  }
  return pool;
}

std::vector<std::string> read_lexicon(std::istream& in) {
  std::vector<std::string> terms;
  std::string line;
  while (std::getline(in, line)) {
    auto t = normalize_query(line);
    if (!t.empty()) terms.push_back(std::move(t));
  }
  return terms;
}

}  // namespace qacme

#include "qacme/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "qacme/errors.hpp"

namespace qacme {

namespace {

constexpr std::uint64_t kClickStream = 0x434c'4943;  // "CLIC"
constexpr std::uint64_t kListStream = 0x4c49'5354;   // "LIST"

}  // namespace

void SyntheticEnvironment::set(const EngineId& engine, int rank, double p) {
  good_probability[{engine, rank}] = p;
}

void SyntheticEnvironment::set_all_ranks(const EngineId& engine, int max_rank, double p) {
  for (int r = 1; r <= max_rank; ++r) set(engine, r, p);
}

double SyntheticEnvironment::probability(const EngineId& engine, int rank) const {
  auto it = good_probability.find({engine, rank});
  if (it == good_probability.end()) {
    throw ConfigError("synthetic environment has no probability for " + engine + " rank " +
                      std::to_string(rank));
  }
  return it->second;
}

void SyntheticEnvironment::validate(int positions) const {
  if (static_cast<int>(decay.size()) < positions) {
    throw ConfigError("synthetic environment needs one decay factor per position");
  }
  for (std::size_t i = 0; i < decay.size(); ++i) {
    if (!(decay[i] > 0.0 && decay[i] <= 1.0)) throw ConfigError("decay factors must lie in (0, 1]");
    if (i > 0 && decay[i] > decay[i - 1]) throw ConfigError("decay factors must be non-increasing");
  }
  for (const auto& [key, p] : good_probability) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("click probabilities must lie in [0, 1]");
  }
}

int synthetic_episode(const SyntheticEnvironment& env, const DisplayedList& list, Rng& rng) {
  for (const auto& item : list.items) {
    const auto pos = static_cast<std::size_t>(item.position - 1);
    if (pos >= env.decay.size()) throw ConfigError("no decay factor for position");
    const double p = env.probability(item.engine, item.rank) * env.decay[pos];
    if (rng.uniform() < p) return item.position;
  }
  return list.positions + 1;
}

CandidateSet SyntheticListModel::draw(Rng& rng) const {
  CandidateSet set;
  set.reserve(engines.size());
  for (const auto& e : engines) {
    EngineCandidates c{e, {}};
    for (int r = 1; r <= list_length; ++r) {
      c.items.push_back({e + "/" + std::to_string(r), static_cast<double>(list_length - r + 1)});
    }
    set.push_back(std::move(c));
  }
  for (const auto& shared : shared_tops) {
    const bool hit = rng.uniform() < shared.probability;
    if (!hit) continue;
    auto first = std::find_if(set.begin(), set.end(), [&](auto& c) { return c.engine == shared.first; });
    auto second =
        std::find_if(set.begin(), set.end(), [&](auto& c) { return c.engine == shared.second; });
    if (first == set.end() || second == set.end() || first->items.empty() ||
        second->items.empty()) {
      throw ConfigError("shared-top rule names an unknown engine");
    }
    second->items.front().text = first->items.front().text;
  }
  return set;
}

std::vector<ExperimentResult> run_synthetic(const MixtureConfig& strategy,
                                            const SyntheticEnvironment& env,
                                            const SyntheticListModel& lists,
                                            const SyntheticRunOptions& options,
                                            const EpisodeObserver& observer) {
  if (options.n_episodes <= 0) throw ConfigError("n_episodes must be positive");
  if (options.repeats <= 0) throw ConfigError("repeats must be positive");
  strategy.validate();
  env.validate(strategy.positions);

  std::vector<ExperimentResult> results;
  for (int r = 0; r < options.repeats; ++r) {
    MixtureConfig config = strategy;
    config.seed = strategy.seed + static_cast<std::uint64_t>(r);
    MixtureStrategy instance(std::move(config));
    const std::uint64_t env_seed = env.seed + static_cast<std::uint64_t>(r);
    Rng clicks_rng(derive_seed(env_seed, kClickStream));
    Rng lists_rng(derive_seed(env_seed, kListStream));

    ExperimentResult result;
    result.strategy = instance.name();
    result.episodes = options.n_episodes;
    result.seed = instance.config().seed;
    result.repeat = r;
    result.click_trace.reserve(static_cast<std::size_t>(options.n_episodes));
    for (long t = 0; t < options.n_episodes; ++t) {
      const auto candidates = lists.draw(lists_rng);
      EpisodeOutcome outcome{instance.fill(candidates), 0};
      outcome.click = synthetic_episode(env, outcome.list, clicks_rng);
      instance.feedback(outcome);
      if (outcome.click <= instance.positions()) ++result.clicks;
      result.click_trace.push_back(outcome.click);
      if (observer) observer(t, outcome.list, outcome.click);
    }
    results.push_back(std::move(result));
  }
  return results;
}

ZipfSampler::ZipfSampler(std::size_t n, double exponent) {
  if (n == 0) throw ConfigError("Zipf sampler over an empty range");
  cdf_.resize(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += 1.0 / std::pow(static_cast<double>(i + 1), exponent);
    cdf_[i] = total;
  }
  for (auto& c : cdf_) c /= total;
}

std::size_t ZipfSampler::operator()(Rng& rng) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
}

std::vector<std::string> generate_catalog(std::size_t size, std::uint64_t seed) {
  static constexpr const char* kSyllables[] = {"ka", "ri", "mo", "ta", "ne", "lu", "sa", "po",
                                               "ve", "di", "ro", "mi", "ba", "te", "co", "la"};
  constexpr std::size_t kSyllableCount = std::size(kSyllables);
  Rng rng(seed);

  // A smallish vocabulary so that many queries share leading words.
  std::vector<std::string> words;
  std::set<std::string> seen_words;
  const std::size_t vocab = std::max<std::size_t>(8, size / 4);
  std::size_t attempts = 0;
  while (words.size() < vocab && attempts++ < vocab * 50) {
    std::string w;
    const auto syllables = 1 + rng.below(3);
    for (std::uint64_t i = 0; i < syllables; ++i) w += kSyllables[rng.below(kSyllableCount)];
    if (seen_words.insert(w).second) words.push_back(w);
  }
  const ZipfSampler word_pick(words.size(), 0.8);

  std::vector<std::string> catalog;
  std::set<std::string> seen;
  attempts = 0;
  while (catalog.size() < size && attempts++ < size * 50) {
    std::string q = words[word_pick(rng)];
    const auto extra = rng.below(3);
    for (std::uint64_t i = 0; i < extra; ++i) q += " " + words[word_pick(rng)];
    if (seen.insert(q).second) catalog.push_back(q);
  }
  // Popularity rank must not correlate with generation order.
  for (std::size_t i = catalog.size(); i > 1; --i) {
    std::swap(catalog[i - 1], catalog[static_cast<std::size_t>(rng.below(i))]);
  }
  return catalog;
}

std::vector<QueryLogRecord> generate_query_log(const QueryLogSpec& spec) {
  if (spec.catalog_size == 0 || spec.users == 0) throw ConfigError("empty catalog or user base");
  const auto catalog = generate_catalog(spec.catalog_size, derive_seed(spec.seed, 1));
  Rng rng(derive_seed(spec.seed, 2));
  const ZipfSampler popularity(catalog.size(), spec.zipf_exponent);

  std::vector<std::vector<std::size_t>> favourites(spec.users);
  for (auto& fav : favourites) {
    for (std::size_t i = 0; i < spec.favourites_per_user; ++i) {
      fav.push_back(static_cast<std::size_t>(rng.below(catalog.size())));
    }
  }

  std::vector<QueryLogRecord> log;
  log.reserve(spec.records);
  std::vector<std::size_t> trend;
  long trend_epoch = -1;
  for (std::size_t i = 0; i < spec.records; ++i) {
    const double offset = spec.span_seconds * static_cast<double>(i) /
                          static_cast<double>(std::max<std::size_t>(spec.records, 1));
    const auto epoch = static_cast<long>(offset / spec.trend_period_seconds);
    if (epoch != trend_epoch) {
      trend_epoch = epoch;
      trend.clear();
      for (std::size_t k = 0; k < spec.trend_size; ++k) {
        trend.push_back(static_cast<std::size_t>(rng.below(catalog.size())));
      }
    }

    QueryLogRecord r;
    r.timestamp = std::floor(spec.start_time + offset);
    const bool anonymous = rng.uniform() < spec.anonymous_share;
    const auto user = static_cast<std::size_t>(rng.below(spec.users));
    if (!anonymous) r.user = "u" + std::to_string(user);

    std::size_t pick;
    const double u = rng.uniform();
    if (!anonymous && u < spec.favourite_share && !favourites[user].empty()) {
      pick = favourites[user][static_cast<std::size_t>(rng.below(favourites[user].size()))];
    } else if (u < spec.favourite_share + spec.trend_share && !trend.empty()) {
      pick = trend[static_cast<std::size_t>(rng.below(trend.size()))];
    } else {
      pick = popularity(rng);
    }
    r.query = catalog[pick];
    log.push_back(std::move(r));
  }
  return log;
}

std::vector<QueryLogRecord> simulate_logged_policy(const Engine& deployed,
                                                   std::span<const std::string> intents,
                                                   const LoggedPolicySpec& spec) {
  if (intents.empty()) throw ConfigError("logged-policy simulation needs intents");
  if (spec.positions < 1) throw ConfigError("M must be >= 1");
  Rng rng(spec.seed);
  const ZipfSampler pick(intents.size(), spec.zipf_exponent);
  std::vector<QueryLogRecord> log;
  log.reserve(spec.sessions);
  for (std::size_t s = 0; s < spec.sessions; ++s) {
    QueryLogRecord r;
    r.timestamp = std::floor(spec.start_time + spec.span_seconds * static_cast<double>(s) /
                                                   static_cast<double>(spec.sessions));
    r.user = "u" + std::to_string(rng.below(std::max<std::size_t>(spec.users, 1)));
    const std::string& intent = intents[pick(rng)];
    EngineContext ctx;
    ctx.user = r.user;
    ctx.timestamp = r.timestamp;
    r.query = intent;
    for (std::size_t len = 1; len < intent.size(); ++len) {
      const auto shown =
          deployed.suggest(std::string_view(intent).substr(0, len), ctx,
                           static_cast<std::size_t>(spec.positions));
      const bool intent_shown = std::any_of(shown.begin(), shown.end(),
                                            [&](const Suggestion& x) { return x.text == intent; });
      if (intent_shown) break;
      if (!shown.empty() && rng.uniform() < spec.adopt_probability) {
        r.query = shown.front().text;
        break;
      }
    }
    log.push_back(std::move(r));
  }
  return log;
}

}  // namespace qacme

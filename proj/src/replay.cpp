#include "qacme/replay.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "qacme/errors.hpp"
#include "qacme/text.hpp"

namespace qacme {

namespace {

constexpr std::uint64_t kSamplerStream = 0x5341'4d50;  // "SAMP"

bool utf8_continuation(char c) { return (static_cast<unsigned char>(c) & 0xC0) == 0x80; }

std::string fmt2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string join(const std::vector<EngineId>& ids, char sep) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += sep;
    out += ids[i];
  }
  return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto end = line.find('\t', start);
    out.push_back(line.substr(start, end == std::string::npos ? std::string::npos : end - start));
    if (end == std::string::npos) return out;
    start = end + 1;
  }
}

void check_options(const RunOptions& options, std::span<const ReplayTuple> tuples) {
  if (options.n_episodes <= 0) throw ConfigError("n_episodes must be positive");
  if (options.repeats <= 0) throw ConfigError("repeats must be positive");
  if (tuples.empty()) throw InvalidInput("replay needs at least one tuple");
}

}  // namespace

TupleSet build_tuples(std::span<const QueryLogRecord> log, int min_prefix_len) {
  if (min_prefix_len < 1) throw ConfigError("min_prefix_len must be >= 1");
  TupleSet set;
  const auto min_len = static_cast<std::size_t>(min_prefix_len);
  for (const auto& record : log) {
    const auto query = normalize_query(record.query);
    if (query.size() <= min_len) {
      ++set.skipped_records;
      continue;
    }
    for (std::size_t len = min_len; len < query.size(); ++len) {
      if (utf8_continuation(query[len])) continue;
      set.tuples.push_back({query.substr(0, len), query, record.user, record.timestamp});
    }
  }
  return set;
}

void write_tuples(std::ostream& out, std::span<const ReplayTuple> tuples) {
  out << "timestamp\tuser_id\tprefix\tfull_query\n";
  for (const auto& t : tuples) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", t.timestamp);
    out << buf << '\t' << t.user << '\t' << t.prefix << '\t' << t.full_query << '\n';
  }
}

std::vector<ReplayTuple> read_tuples(std::istream& in) {
  std::vector<ReplayTuple> tuples;
  std::string line;
  std::getline(in, line);  // header
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cols = split_tabs(line);
    if (cols.size() != 4) {
      throw InvalidInput("tuple file line " + std::to_string(line_no) + ": expected 4 columns");
    }
    ReplayTuple t{cols[2], cols[3], cols[1], std::stod(cols[0])};
    if (!t.full_query.starts_with(t.prefix) || t.prefix.size() >= t.full_query.size()) {
      throw InvalidInput("tuple file line " + std::to_string(line_no) +
                         ": prefix is not a strict prefix of the query");
    }
    tuples.push_back(std::move(t));
  }
  return tuples;
}

LogSplit split_log(std::vector<QueryLogRecord> records, double training_fraction) {
  if (!(training_fraction >= 0.0 && training_fraction <= 1.0)) {
    throw ConfigError("training fraction must lie in [0, 1]");
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  const auto cut = static_cast<std::size_t>(
      std::floor(training_fraction * static_cast<double>(records.size())));
  LogSplit split;
  split.training.assign(std::make_move_iterator(records.begin()),
                        std::make_move_iterator(records.begin() + static_cast<std::ptrdiff_t>(cut)));
  split.evaluation.assign(std::make_move_iterator(records.begin() + static_cast<std::ptrdiff_t>(cut)),
                          std::make_move_iterator(records.end()));
  return split;
}

int click_index(const DisplayedList& list, std::string_view full_query) {
  for (const auto& item : list.items) {
    if (item.suggestion.text == full_query) return item.position;
  }
  return list.positions + 1;
}

double increase_pct(long clicks, long baseline_clicks) {
  if (baseline_clicks <= 0) throw UndefinedBaseline("increase is undefined for a zero baseline");
  const double pct = 100.0 * static_cast<double>(clicks - baseline_clicks) /
                     static_cast<double>(baseline_clicks);
  return std::round(pct * 100.0) / 100.0;
}

EngineContext context_for(const ReplayTuple& tuple) {
  EngineContext ctx;
  if (!tuple.user.empty()) ctx.user = tuple.user;
  ctx.timestamp = tuple.timestamp;
  return ctx;
}

CandidateCache::CandidateCache(const EnginePool& pool, std::vector<EngineId> engines,
                               std::span<const ReplayTuple> tuples, std::size_t k)
    : pool_(&pool), engines_(std::move(engines)), tuples_(tuples), k_(k), cache_(tuples.size()) {
  for (const auto& id : engines_) {
    if (!pool.find(id)) throw ConfigError("unknown engine: " + id);
  }
}

const CandidateSet& CandidateCache::at(std::size_t tuple_index) {
  auto& slot = cache_.at(tuple_index);
  if (!slot) {
    const auto& t = tuples_[tuple_index];
    slot = gather_candidates(*pool_, engines_, t.prefix, context_for(t), k_);
  }
  return *slot;
}

std::vector<std::size_t> sample_episode_stream(std::size_t n_tuples, long n_episodes,
                                               std::uint64_t seed) {
  if (n_tuples == 0) throw InvalidInput("cannot sample episodes from an empty tuple pool");
  if (n_episodes <= 0) throw ConfigError("n_episodes must be positive");
  Rng rng(seed);
  std::vector<std::size_t> stream(static_cast<std::size_t>(n_episodes));
  for (auto& idx : stream) idx = static_cast<std::size_t>(rng.below(n_tuples));
  return stream;
}

long replay_stream(MixtureStrategy& strategy, CandidateCache& cache,
                   std::span<const std::size_t> stream, std::vector<int>* trace) {
  long clicks = 0;
  const int m = strategy.positions();
  for (const auto idx : stream) {
    EpisodeOutcome outcome{strategy.fill(cache.at(idx)), 0};
    outcome.click = click_index(outcome.list, cache.tuples()[idx].full_query);
    strategy.feedback(outcome);
    if (outcome.click <= m) ++clicks;
    if (trace) trace->push_back(outcome.click);
  }
  return clicks;
}

std::vector<ExperimentResult> run_experiment(const MixtureConfig& strategy, const EnginePool& pool,
                                             std::span<const ReplayTuple> tuples,
                                             const RunOptions& options) {
  check_options(options, tuples);
  strategy.validate();
  CandidateCache cache(pool, strategy.engines, tuples, static_cast<std::size_t>(strategy.positions));
  std::vector<ExperimentResult> results;
  for (int r = 0; r < options.repeats; ++r) {
    const std::uint64_t seed = options.seed + static_cast<std::uint64_t>(r);
    MixtureConfig config = strategy;
    config.seed = seed;
    MixtureStrategy instance(std::move(config));
    const auto stream =
        sample_episode_stream(tuples.size(), options.n_episodes, derive_seed(seed, kSamplerStream));
    ExperimentResult result;
    result.strategy = instance.name();
    result.episodes = options.n_episodes;
    result.seed = seed;
    result.repeat = r;
    result.click_trace.reserve(stream.size());
    result.clicks = replay_stream(instance, cache, stream, &result.click_trace);
    results.push_back(std::move(result));
  }
  return results;
}

std::vector<ExperimentResult> run_experiment_online(
    const MixtureConfig& strategy, const std::function<EnginePool()>& make_pool,
    std::span<const ReplayTuple> tuples, const RunOptions& options) {
  check_options(options, tuples);
  strategy.validate();
  std::vector<ExperimentResult> results;
  for (int r = 0; r < options.repeats; ++r) {
    const std::uint64_t seed = options.seed + static_cast<std::uint64_t>(r);
    EnginePool pool = make_pool();
    MixtureConfig config = strategy;
    config.seed = seed;
    MixtureStrategy instance(std::move(config));
    const auto stream =
        sample_episode_stream(tuples.size(), options.n_episodes, derive_seed(seed, kSamplerStream));
    ExperimentResult result;
    result.strategy = instance.name();
    result.episodes = options.n_episodes;
    result.seed = seed;
    result.repeat = r;
    for (const auto idx : stream) {
      const auto& t = tuples[idx];
      EpisodeOutcome outcome{instance.fill(pool, t.prefix, context_for(t)), 0};
      outcome.click = click_index(outcome.list, t.full_query);
      instance.feedback(outcome);
      if (outcome.click <= instance.positions()) ++result.clicks;
      result.click_trace.push_back(outcome.click);
      pool.observe({t.timestamp, t.user, t.full_query});
    }
    results.push_back(std::move(result));
  }
  return results;
}

double mean_clicks(std::span<const ExperimentResult> results) {
  if (results.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : results) sum += static_cast<double>(r.clicks);
  return sum / static_cast<double>(results.size());
}

void attach_increase(std::span<ExperimentResult> results,
                     std::span<const ExperimentResult> baseline) {
  for (auto& r : results) {
    for (const auto& b : baseline) {
      if (b.repeat == r.repeat && b.clicks > 0) r.increase_pct = increase_pct(r.clicks, b.clicks);
    }
  }
}

void write_results_table(std::ostream& out, std::span<const ExperimentResult> results,
                         std::string_view baseline) {
  std::vector<std::string> order;
  for (const auto& r : results) {
    if (std::find(order.begin(), order.end(), r.strategy) == order.end()) order.push_back(r.strategy);
  }
  auto rows_of = [&](const std::string& name) {
    std::vector<ExperimentResult> rows;
    for (const auto& r : results) {
      if (r.strategy == name) rows.push_back(r);
    }
    return rows;
  };
  const auto base_rows = rows_of(std::string(baseline));
  const double base_mean = mean_clicks(base_rows);

  out << "strategy\trepeat\tseed\tepisodes\tclicks\tincrease_pct\n";
  for (const auto& name : order) {
    auto rows = rows_of(name);
    for (const auto& r : rows) {
      out << r.strategy << '\t' << r.repeat << '\t' << r.seed << '\t' << r.episodes << '\t'
          << r.clicks << '\t';
      for (const auto& b : base_rows) {
        if (b.repeat == r.repeat && b.clicks > 0) out << fmt2(increase_pct(r.clicks, b.clicks));
      }
      out << '\n';
    }
    const double mean = mean_clicks(rows);
    out << name << "\tmean\t-\t" << (rows.empty() ? 0 : rows.front().episodes) << '\t'
        << fmt2(mean) << '\t';
    if (base_mean > 0.0) {
      out << fmt2(std::round(10000.0 * (mean - base_mean) / base_mean) / 100.0);
    }
    out << '\n';
  }
}

std::optional<std::size_t> mixture_count(std::size_t engines, int positions) {
  if (positions < 0) return std::nullopt;
  std::size_t count = 1;
  for (int i = 0; i < positions; ++i) {
    if (engines != 0 && count > std::numeric_limits<std::size_t>::max() / engines) {
      return std::nullopt;
    }
    count *= engines;
  }
  return count;
}

namespace {

std::size_t checked_mixture_count(std::size_t engines, int positions, std::size_t cap) {
  const auto count = mixture_count(engines, positions);
  if (!count || *count > cap) {
    throw ConfigError("refusing to enumerate " +
                      (count ? std::to_string(*count) : std::string("too many")) +
                      " mixtures (cap " + std::to_string(cap) +
                      "); reduce M or the engine set, or raise the cap");
  }
  return *count;
}

}  // namespace

EnumerationResult enumerate_mixtures(CandidateCache& cache, int positions,
                                     std::span<const std::size_t> stream,
                                     const EngineId& basic_engine, std::size_t cap) {
  const auto& engines = cache.engines();
  if (engines.empty()) throw ConfigError("enumeration needs at least one engine");
  if (positions < 1) throw ConfigError("M must be >= 1");
  const auto basic_it = std::find(engines.begin(), engines.end(), basic_engine);
  if (basic_it == engines.end()) throw ConfigError("basic engine not in the pool: " + basic_engine);
  const std::size_t count = checked_mixture_count(engines.size(), positions, cap);

  EnumerationResult result;
  result.episodes = static_cast<long>(stream.size());
  result.mixtures.reserve(count);
  std::vector<std::size_t> digits(static_cast<std::size_t>(positions), 0);
  std::vector<EngineId> assignment(static_cast<std::size_t>(positions));
  for (std::size_t n = 0; n < count; ++n) {
    for (std::size_t p = 0; p < digits.size(); ++p) assignment[p] = engines[digits[p]];
    long clicks = 0;
    for (const auto idx : stream) {
      const auto list = fill_fixed(assignment, cache.at(idx));
      if (click_index(list, cache.tuples()[idx].full_query) <= positions) ++clicks;
    }
    result.mixtures.push_back({assignment, clicks});
    for (std::size_t p = digits.size(); p-- > 0;) {
      if (++digits[p] < engines.size()) break;
      digits[p] = 0;
    }
  }

  std::stable_sort(result.mixtures.begin(), result.mixtures.end(),
                   [](const MixtureScore& a, const MixtureScore& b) { return a.clicks > b.clicks; });
  const std::vector<EngineId> all_basic(static_cast<std::size_t>(positions), basic_engine);
  for (std::size_t i = 0; i < result.mixtures.size(); ++i) {
    if (result.mixtures[i].assignment == all_basic) result.basic_index = i;
  }
  const long basic_clicks = result.mixtures[result.basic_index].clicks;
  result.basic_rank = 1 + static_cast<std::size_t>(std::count_if(
                              result.mixtures.begin(), result.mixtures.end(),
                              [&](const MixtureScore& m) { return m.clicks > basic_clicks; }));
  return result;
}

EnumerationResult enumerate_mixtures(const EnginePool& pool, std::span<const EngineId> engines,
                                     int positions, std::span<const ReplayTuple> tuples,
                                     long n_episodes, std::uint64_t seed,
                                     const EngineId& basic_engine, std::size_t cap) {
  if (tuples.empty()) throw InvalidInput("replay needs at least one tuple");
  checked_mixture_count(engines.size(), positions, cap);
  CandidateCache cache(pool, {engines.begin(), engines.end()}, tuples,
                       static_cast<std::size_t>(positions));
  const auto stream =
      sample_episode_stream(tuples.size(), n_episodes, derive_seed(seed, kSamplerStream));
  return enumerate_mixtures(cache, positions, stream, basic_engine, cap);
}

void write_enumeration(std::ostream& out, const EnumerationResult& result) {
  out << "rank\tclicks\tassignment\tbasic\n";
  for (std::size_t i = 0; i < result.mixtures.size(); ++i) {
    const auto& m = result.mixtures[i];
    out << (i + 1) << '\t' << m.clicks << '\t' << join(m.assignment, ',') << '\t'
        << (i == result.basic_index ? 1 : 0) << '\n';
  }
}

EnumerationResult read_enumeration(std::istream& in) {
  EnumerationResult result;
  std::string line;
  std::getline(in, line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cols = split_tabs(line);
    if (cols.size() != 4) {
      throw InvalidInput("enumeration file line " + std::to_string(line_no) + ": expected 4 columns");
    }
    MixtureScore score;
    score.clicks = std::stol(cols[1]);
    std::stringstream ss(cols[2]);
    std::string id;
    while (std::getline(ss, id, ',')) score.assignment.push_back(id);
    if (cols[3] == "1") result.basic_index = result.mixtures.size();
    result.mixtures.push_back(std::move(score));
  }
  if (!result.mixtures.empty()) {
    const long basic_clicks = result.mixtures[result.basic_index].clicks;
    result.basic_rank = 1 + static_cast<std::size_t>(std::count_if(
                                result.mixtures.begin(), result.mixtures.end(),
                                [&](const MixtureScore& m) { return m.clicks > basic_clicks; }));
  }
  return result;
}

void write_curve_plot(std::ostream& out, const EnumerationResult& result) {
  out << "# mixtures=" << result.mixtures.size() << " basic_rank=" << result.basic_rank;
  if (!result.mixtures.empty()) {
    out << " basic_clicks=" << result.mixtures[result.basic_index].clicks
        << " best_clicks=" << result.mixtures.front().clicks;
  }
  out << "\n# index\tclicks\tis_basic\n";
  for (std::size_t i = 0; i < result.mixtures.size(); ++i) {
    out << (i + 1) << '\t' << result.mixtures[i].clicks << '\t'
        << (i == result.basic_index ? 1 : 0) << '\n';
  }
}

}  // namespace qacme

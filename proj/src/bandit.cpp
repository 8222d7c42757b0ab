#include "qacme/bandit.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <string_view>

#include "qacme/errors.hpp"

namespace qacme {

namespace {

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016" PRIx64, v);
  return buf;
}

std::uint64_t parse_hex64(const nlohmann::json& j) {
  const auto s = j.get<std::string>();
  std::size_t pos = 0;
  const auto v = std::stoull(s, &pos, 16);
  if (pos != s.size()) throw InvalidInput("bad hex word in snapshot: " + s);
  return v;
}

void check_prior(BetaPrior prior) {
  if (!(prior.alpha > 0.0) || !(prior.beta > 0.0)) {
    throw ConfigError("Beta prior parameters must be positive");
  }
}

}  // namespace

ActionKey::ActionKey(EngineId e, std::optional<int> r) : engine(std::move(e)), rank(r) {
  if (rank && *rank < 1) throw InvalidInput("action rank must be >= 1");
}

std::string to_string(const ActionKey& key) {
  if (!key.rank) return key.engine;
  return key.engine + "#" + std::to_string(*key.rank);
}

std::size_t argmax(std::span<const ActionSample> samples) {
  if (samples.empty()) throw InvalidInput("argmax over an empty sample set");
  std::size_t best = 0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const auto& s = samples[i];
    const auto& b = samples[best];
    if (s.value > b.value || (s.value == b.value && s.key < b.key)) best = i;
  }
  return best;
}

BanditState::BanditState(std::span<const ActionKey> actions, BetaPrior prior, std::uint64_t seed)
    : prior_(prior), rng_(seed) {
  check_prior(prior);
  for (const auto& a : actions) posteriors_.try_emplace(a, BetaPosterior{prior.alpha, prior.beta});
}

BanditState init_bandit(std::span<const ActionKey> actions, BetaPrior prior, std::uint64_t seed) {
  return BanditState(actions, prior, seed);
}

BetaPosterior& BanditState::entry(const ActionKey& action) {
  auto [it, inserted] = posteriors_.try_emplace(action, BetaPosterior{prior_.alpha, prior_.beta});
  return it->second;
}

void BanditState::update(const ActionKey& action, Outcome outcome) {
  auto& post = entry(action);
  switch (outcome) {
    case Outcome::kSuccess:
      post.alpha += 1.0;
      break;
    case Outcome::kFailure:
      post.beta += 1.0;
      break;
  }
}

std::vector<ActionSample> BanditState::draw_samples(std::span<const ActionKey> available) {
  if (available.empty()) {
    throw InvalidInput("select() called with no available actions");
  }
  std::vector<ActionKey> keys(available.begin(), available.end());
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

  std::vector<ActionSample> samples;
  samples.reserve(keys.size());
  for (auto& k : keys) {
    const auto& post = entry(k);
    const double v = rng_.beta(post.alpha, post.beta);
    samples.push_back({std::move(k), v});
  }
  return samples;
}

ActionKey BanditState::select(std::span<const ActionKey> available) {
  if (available.size() == 1) {
    entry(available.front());
    return available.front();
  }
  auto samples = draw_samples(available);
  return std::move(samples[argmax(samples)].key);
}

const BetaPosterior* BanditState::find(const ActionKey& action) const {
  auto it = posteriors_.find(action);
  return it == posteriors_.end() ? nullptr : &it->second;
}

double BanditState::pulls() const {
  double total = 0.0;
  for (const auto& [key, post] : posteriors_) {
    total += post.alpha + post.beta - prior_.alpha - prior_.beta;
  }
  return total;
}

nlohmann::json BanditState::to_json() const {
  nlohmann::json j;
  j["prior"] = {{"alpha", prior_.alpha}, {"beta", prior_.beta}};
  nlohmann::json words = nlohmann::json::array();
  for (auto w : rng_.state()) words.push_back(hex64(w));
  j["rng"] = {{"algorithm", "xoshiro256**"},
              {"seed", hex64(rng_.seed())},
              {"draws", rng_.draws()},
              {"state", std::move(words)}};
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [key, post] : posteriors_) {
    rows.push_back({{"engine", key.engine},
                    {"rank", key.rank ? nlohmann::json(*key.rank) : nlohmann::json(nullptr)},
                    {"alpha", post.alpha},
                    {"beta", post.beta}});
  }
  j["posteriors"] = std::move(rows);
  return j;
}

BanditState BanditState::from_json(const nlohmann::json& j) {
  try {
    const BetaPrior prior{j.at("prior").at("alpha").get<double>(),
                          j.at("prior").at("beta").get<double>()};
    const auto& r = j.at("rng");
    Rng::State words{};
    const auto& arr = r.at("state");
    if (!arr.is_array() || arr.size() != words.size()) {
      throw InvalidInput("snapshot rng state must hold 4 words");
    }
    for (std::size_t i = 0; i < words.size(); ++i) words[i] = parse_hex64(arr[i]);

    BanditState state({}, prior, 0);
    state.rng_ = Rng::from_state(parse_hex64(r.at("seed")), r.at("draws").get<std::uint64_t>(), words);
    for (const auto& row : j.at("posteriors")) {
      std::optional<int> rank;
      if (!row.at("rank").is_null()) rank = row.at("rank").get<int>();
      const BetaPosterior post{row.at("alpha").get<double>(), row.at("beta").get<double>()};
      if (!(post.alpha > 0.0) || !(post.beta > 0.0)) {
        throw InvalidInput("snapshot posterior parameters must be positive");
      }
      state.posteriors_[ActionKey(row.at("engine").get<std::string>(), rank)] = post;
    }
    return state;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed bandit snapshot: ") + e.what());
  }
}

}  // namespace qacme

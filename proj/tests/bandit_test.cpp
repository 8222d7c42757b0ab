#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "qacme/bandit.hpp"
#include "qacme/errors.hpp"
#include "qacme/rng.hpp"
#include "support/oracles.hpp"

using qacme::ActionKey;
using qacme::BanditState;
using qacme::BetaPosterior;
using qacme::BetaPrior;
using qacme::Outcome;

namespace {

std::vector<ActionKey> keys(std::initializer_list<const char*> ids) {
  std::vector<ActionKey> out;
  for (const char* id : ids) out.emplace_back(id);
  return out;
}

}  // namespace

TEST_CASE("init_bandit places every listed action at the prior") {
  auto ab = keys({"A", "B"});
  BanditState s = qacme::init_bandit(ab, {1, 1}, 42);
  REQUIRE(s.posteriors().size() == 2);
  CHECK(*s.find(ActionKey("A")) == BetaPosterior{1, 1});
  CHECK(*s.find(ActionKey("B")) == BetaPosterior{1, 1});

  BanditState empty = qacme::init_bandit({}, {1, 1}, 0);
  CHECK(empty.posteriors().empty());

  auto a = keys({"A"});
  BanditState p = qacme::init_bandit(a, {2, 3}, 7);
  CHECK(*p.find(ActionKey("A")) == BetaPosterior{2, 3});
}

TEST_CASE("non-positive prior is a configuration error") {
  CHECK_THROWS_AS(qacme::init_bandit({}, {0, 1}, 1), qacme::ConfigError);
  CHECK_THROWS_AS(qacme::init_bandit({}, {1, -2}, 1), qacme::ConfigError);
}

TEST_CASE("action keys order by engine then rank, rank-free first") {
  CHECK(ActionKey("a") < ActionKey("a", 1));
  CHECK(ActionKey("a", 1) < ActionKey("a", 2));
  CHECK(ActionKey("a", 9) < ActionKey("b"));
  CHECK(ActionKey("a", 2) == ActionKey("a", 2));
  CHECK_FALSE(ActionKey("a") == ActionKey("a", 1));
  CHECK_THROWS_AS(ActionKey("a", 0), qacme::InvalidInput);
  CHECK(qacme::to_string(ActionKey("pop", 3)) == "pop#3");
  CHECK(qacme::to_string(ActionKey("pop")) == "pop");
}

TEST_CASE("conjugate updates") {
  auto a = keys({"A"});
  BanditState s = qacme::init_bandit(a, {1, 1}, 1);
  s.update(ActionKey("A"), Outcome::kSuccess);
  CHECK(*s.find(ActionKey("A")) == BetaPosterior{2, 1});

  BanditState t = qacme::init_bandit(a, {3, 2}, 1);
  t.update(ActionKey("A"), Outcome::kFailure);
  CHECK(*t.find(ActionKey("A")) == BetaPosterior{3, 3});

  BanditState u = qacme::init_bandit(a, {1, 1}, 1);
  for (int i = 0; i < 5; ++i) u.update(ActionKey("A"), Outcome::kSuccess);
  for (int i = 0; i < 3; ++i) u.update(ActionKey("A"), Outcome::kFailure);
  CHECK(*u.find(ActionKey("A")) == BetaPosterior{6, 4});
  CHECK(u.pulls() == 8);
}

TEST_CASE("update creates unseen keys lazily at the prior") {
  BanditState s = qacme::init_bandit({}, {2, 5}, 3);
  s.update(ActionKey("X", 4), Outcome::kSuccess);
  CHECK(*s.find(ActionKey("X", 4)) == BetaPosterior{3, 5});
  CHECK(s.find(ActionKey("X")) == nullptr);
}

TEST_CASE("posterior equals prior plus counts for random sequences") {
  std::mt19937_64 gen(11);
  for (int seq = 0; seq < 200; ++seq) {
    const BetaPrior prior{1.0 + static_cast<double>(gen() % 4), 0.5 + static_cast<double>(gen() % 3)};
    BanditState s = qacme::init_bandit({}, prior, seq);
    std::map<ActionKey, std::pair<int, int>> counts;
    const int n = static_cast<int>(gen() % 200);
    for (int i = 0; i < n; ++i) {
      ActionKey k(std::string(1, static_cast<char>('a' + gen() % 3)),
                  gen() % 2 ? std::optional<int>(1 + static_cast<int>(gen() % 4)) : std::nullopt);
      const bool one = gen() % 2;
      s.update(k, one ? Outcome::kSuccess : Outcome::kFailure);
      (one ? counts[k].first : counts[k].second)++;
    }
    REQUIRE(s.posteriors().size() == counts.size());
    for (const auto& [k, c] : counts) {
      CHECK(*s.find(k) == BetaPosterior{prior.alpha + c.first, prior.beta + c.second});
    }
  }
}

TEST_CASE("select on a singleton returns it without drawing") {
  BanditState s = qacme::init_bandit({}, {1, 1}, 5);
  auto a = keys({"A"});
  CHECK(s.select(a) == ActionKey("A"));
  CHECK(s.rng().draws() == 0);
  CHECK(s.find(ActionKey("A")) != nullptr);
}

TEST_CASE("select on an empty set is rejected") {
  BanditState s = qacme::init_bandit({}, {1, 1}, 5);
  CHECK_THROWS_AS(s.select({}), qacme::InvalidInput);
}

TEST_CASE("argmax breaks ties toward the lowest key") {
  std::vector<qacme::ActionSample> samples{
      {ActionKey("b"), 0.5}, {ActionKey("a", 2), 0.5}, {ActionKey("a", 1), 0.5}, {ActionKey("c"), 0.1}};
  CHECK(samples[qacme::argmax(samples)].key == ActionKey("a", 1));
  samples[3].value = 0.9;
  CHECK(samples[qacme::argmax(samples)].key == ActionKey("c"));
}

TEST_CASE("argmax is invariant under strictly increasing transforms") {
  auto abc = keys({"a", "b", "c", "d"});
  BanditState s = qacme::init_bandit(abc, {1, 1}, 9);
  for (int i = 0; i < 500; ++i) {
    auto samples = s.draw_samples(abc);
    const auto base = samples[qacme::argmax(samples)].key;
    for (auto& x : samples) x.value = std::log(x.value) * 3.0 + 7.0;
    CHECK(samples[qacme::argmax(samples)].key == base);
    for (auto& x : samples) x.value = std::exp(x.value);
    CHECK(samples[qacme::argmax(samples)].key == base);
  }
}

TEST_CASE("selection does not depend on the order of the available set") {
  auto fwd = keys({"a", "b", "c"});
  auto rev = keys({"c", "b", "a"});
  BanditState s1 = qacme::init_bandit(fwd, {1, 1}, 77);
  BanditState s2 = qacme::init_bandit(fwd, {1, 1}, 77);
  for (int i = 0; i < 200; ++i) CHECK(s1.select(fwd) == s2.select(rev));
}

TEST_CASE("a dominant posterior is selected almost always") {
  auto ab = keys({"A", "B"});
  BanditState s = qacme::init_bandit(ab, {1, 1}, 2024);
  for (int i = 0; i < 999; ++i) s.update(ActionKey("A"), Outcome::kSuccess);
  for (int i = 0; i < 999; ++i) s.update(ActionKey("B"), Outcome::kFailure);
  int wins = 0;
  for (int i = 0; i < 10000; ++i) wins += s.select(ab) == ActionKey("A");
  CHECK(wins >= 9990);
}

TEST_CASE("selection frequency for Beta(8,2) vs Beta(2,8) matches the oracle") {
  auto ab = keys({"A", "B"});
  BanditState s = qacme::init_bandit(ab, {1, 1}, 17);
  for (int i = 0; i < 7; ++i) s.update(ActionKey("A"), Outcome::kSuccess);
  s.update(ActionKey("A"), Outcome::kFailure);
  s.update(ActionKey("B"), Outcome::kSuccess);
  for (int i = 0; i < 7; ++i) s.update(ActionKey("B"), Outcome::kFailure);
  int wins = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) wins += s.select(ab) == ActionKey("A");
  const double expected = oracle::prob_greater(8, 2, 2, 8, 1000000, 99);
  CHECK(std::abs(static_cast<double>(wins) / n - expected) <= 0.01);
  CHECK(std::abs(expected - oracle::prob_greater_exact(8, 2, 2, 8)) <= 0.002);
}

TEST_CASE("same seed and call sequence give identical states") {
  auto abc = keys({"a", "b", "c"});
  BanditState s1 = qacme::init_bandit(abc, {1, 1}, 123);
  BanditState s2 = qacme::init_bandit(abc, {1, 1}, 123);
  for (int i = 0; i < 1000; ++i) {
    const auto k1 = s1.select(abc);
    const auto k2 = s2.select(abc);
    REQUIRE(k1 == k2);
    const auto o = (i % 3 == 0) ? Outcome::kSuccess : Outcome::kFailure;
    s1.update(k1, o);
    s2.update(k2, o);
  }
  CHECK(s1 == s2);
  BanditState s3 = qacme::init_bandit(abc, {1, 1}, 124);
  std::vector<ActionKey> a1, a3;
  BanditState s4 = qacme::init_bandit(abc, {1, 1}, 123);
  for (int i = 0; i < 50; ++i) {
    a1.push_back(s4.select(abc));
    a3.push_back(s3.select(abc));
  }
  CHECK(a1 != a3);
}

TEST_CASE("snapshot round-trips exactly, including the generator") {
  auto ab = keys({"A", "B"});
  BanditState s = qacme::init_bandit(ab, {1.5, 2}, 555);
  s.update(ActionKey("C", 3), Outcome::kSuccess);
  for (int i = 0; i < 37; ++i) s.update(s.select(ab), i % 2 ? Outcome::kSuccess : Outcome::kFailure);
  const auto j = s.to_json();
  BanditState r = BanditState::from_json(nlohmann::json::parse(j.dump()));
  CHECK(r == s);
  for (int i = 0; i < 100; ++i) CHECK(r.select(ab) == s.select(ab));
  CHECK(j["rng"]["algorithm"] == "xoshiro256**");
  bool saw_null_rank = false;
  for (const auto& p : j["posteriors"]) saw_null_rank |= p["rank"].is_null();
  CHECK(saw_null_rank);
}

TEST_CASE("rng is portable: pinned first outputs") {
  // splitmix64 reference values for seed 0 (widely published).
  std::uint64_t x = 0;
  CHECK(qacme::splitmix64(x) == 0xe220a8397b1dcdafULL);
  CHECK(qacme::splitmix64(x) == 0x6e789e6aa1b965f4ULL);
  qacme::Rng r(7);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK((u >= 0.0 && u < 1.0));
  }
  qacme::Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) CHECK(a.beta(2.0, 3.0) == b.beta(2.0, 3.0));
}

TEST_CASE("gamma and beta samplers have the right moments") {
  qacme::Rng r(31);
  const int n = 200000;
  for (double shape : {0.3, 1.0, 4.5}) {
    double sum = 0, sum2 = 0;
    for (int i = 0; i < n; ++i) {
      const double g = r.gamma(shape);
      sum += g;
      sum2 += g * g;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(mean == doctest::Approx(shape).epsilon(0.02));
    CHECK(var == doctest::Approx(shape).epsilon(0.05));
  }
  double sum = 0;
  for (int i = 0; i < n; ++i) sum += r.beta(2.0, 6.0);
  CHECK(sum / n == doctest::Approx(0.25).epsilon(0.01));
}

TEST_CASE("below() is uniform and bounded") {
  qacme::Rng r(8);
  std::array<int, 7> hist{};
  for (int i = 0; i < 70000; ++i) hist[r.below(7)]++;
  for (int h : hist) CHECK(std::abs(h - 10000) < 400);
}

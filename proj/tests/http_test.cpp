#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <thread>

#include "qacme/engines.hpp"
#include "qacme/http_service.hpp"
#include "qacme/service.hpp"

using namespace qacme;

namespace {

struct Server {
  QacService service;
  std::atomic<double> now{1000.0};
  HttpFrontend frontend;
  int port = 0;
  std::thread thread;

  explicit Server(MixtureConfig config, ServiceOptions options = {})
      : service(make_pool(), std::move(config), options),
        frontend(service, make_options(now)) {
    port = frontend.bind();
    thread = std::thread([this] { frontend.serve(); });
    frontend.wait_until_ready();
  }
  ~Server() {
    frontend.stop();
    thread.join();
  }

  static EnginePool make_pool() {
    std::vector<QueryLogRecord> log;
    for (int i = 0; i < 5; ++i) log.push_back({1, "u", "query"});
    for (int i = 0; i < 3; ++i) log.push_back({1, "u", "question"});
    log.push_back({1, "u", "quote"});
    return build_engines(log, {});
  }
  static HttpOptions make_options(std::atomic<double>& clock) {
    HttpOptions o;
    o.port = 0;
    o.expiry_interval_seconds = 0.05;
    o.clock = [&clock] { return clock.load(); };
    return o;
  }
};

MixtureConfig cascade() {
  MixtureConfig c = parse_strategy("cascade");
  c.engines = {"popularity", "recency", "user_history", "dictionary"};
  c.positions = 3;
  c.seed = 1;
  return c;
}

}  // namespace

TEST_CASE("suggest, feedback and stats over HTTP") {
  Server s(cascade());
  httplib::Client cli("127.0.0.1", s.port);

  auto res = cli.Get("/suggest?prefix=qu&user=u");
  REQUIRE(res);
  CHECK(res->status == 200);
  const auto body = nlohmann::json::parse(res->body);
  REQUIRE(body["suggestions"].size() == 3);
  const std::string token = body["token"];

  auto fb = cli.Post("/feedback", nlohmann::json{{"token", token}, {"position", 2}}.dump(),
                     "application/json");
  REQUIRE(fb);
  CHECK(fb->status == 200);
  fb = cli.Post("/feedback", nlohmann::json{{"token", token}, {"position", 2}}.dump(), "application/json");
  CHECK(fb->status == 409);

  auto st = cli.Get("/stats");
  REQUIRE(st);
  const auto stats = nlohmann::json::parse(st->body);
  CHECK(stats["updates"] == 2);
  CHECK(stats["clicks"] == 1);

  CHECK(cli.Get("/suggest?prefix=%20")->status == 400);
  CHECK(cli.Post("/feedback", "not json", "application/json")->status == 400);

  const auto t2 = nlohmann::json::parse(cli.Get("/suggest?prefix=qu")->body)["token"].get<std::string>();
  fb = cli.Post("/feedback", nlohmann::json{{"token", t2}, {"position", 9}}.dump(), "application/json");
  CHECK(fb->status == 400);
  fb = cli.Post("/feedback", nlohmann::json{{"token", t2}, {"position", nullptr}}.dump(), "application/json");
  CHECK(fb->status == 200);
}

TEST_CASE("snapshot and restore over HTTP") {
  Server a(cascade());
  httplib::Client ca("127.0.0.1", a.port);
  for (int i = 0; i < 5; ++i) {
    const auto t = nlohmann::json::parse(ca.Get("/suggest?prefix=que")->body)["token"].get<std::string>();
    ca.Post("/feedback", nlohmann::json{{"token", t}, {"position", 1}}.dump(), "application/json");
  }
  auto snap = ca.Post("/admin/snapshot", "", "application/json");
  REQUIRE(snap);
  CHECK(snap->status == 200);

  Server b(cascade());
  httplib::Client cb("127.0.0.1", b.port);
  auto rr = cb.Post("/admin/restore", snap->body, "application/json");
  REQUIRE(rr);
  CHECK(rr->status == 200);
  CHECK(nlohmann::json::parse(cb.Get("/stats")->body) == nlohmann::json::parse(ca.Get("/stats")->body));
  CHECK(cb.Post("/admin/restore", "{}", "application/json")->status == 400);
}

TEST_CASE("the background sweep expires stale tickets") {
  ServiceOptions opt;
  opt.ttl_seconds = 60;
  Server s(cascade(), opt);
  httplib::Client cli("127.0.0.1", s.port);
  cli.Get("/suggest?prefix=qu");
  CHECK(s.service.open_tickets() == 1);
  s.now = 1061.0;
  for (int i = 0; i < 100 && s.service.open_tickets() > 0; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  CHECK(s.service.open_tickets() == 0);
  CHECK(s.service.stats().episodes == 1);
}

#include "qacme/http_service.hpp"

#include <chrono>
#include <fstream>

#include <httplib.h>

#include "qacme/errors.hpp"

namespace qacme {

namespace {

void reply(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& message) {
  reply(res, status, {{"error", message}});
}

// Maps library exceptions onto HTTP status codes.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const TicketError& e) {
    reply_error(res, 409, e.what());
  } catch (const InvalidFeedback& e) {
    reply_error(res, 400, e.what());
  } catch (const InvalidInput& e) {
    reply_error(res, 400, e.what());
  } catch (const nlohmann::json::exception& e) {
    reply_error(res, 400, std::string("bad JSON: ") + e.what());
  } catch (const std::exception& e) {
    reply_error(res, 500, e.what());
  }
}

}  // namespace

double wall_clock_seconds() {
  using namespace std::chrono;
  return duration<double>(system_clock::now().time_since_epoch()).count();
}

HttpFrontend::HttpFrontend(QacService& service, HttpOptions options)
    : service_(service), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  if (!options_.clock) options_.clock = wall_clock_seconds;
  install_routes();
}

HttpFrontend::~HttpFrontend() { stop(); }

void HttpFrontend::install_routes() {
  auto& srv = *server_;

  srv.Get("/suggest", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::optional<std::string> user;
      if (req.has_param("user") && !req.get_param_value("user").empty()) {
        user = req.get_param_value("user");
      }
      const auto response =
          service_.suggest(req.get_param_value("prefix"), user, options_.clock());
      reply(res, 200, to_json(response));
    });
  });

  srv.Post("/feedback", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto body = nlohmann::json::parse(req.body);
      const auto token = body.at("token").get<std::string>();
      std::optional<int> position;
      if (body.contains("position") && !body.at("position").is_null()) {
        position = body.at("position").get<int>();
      }
      service_.feedback(token, position);
      reply(res, 200, {{"ok", true}});
    });
  });

  srv.Get("/stats", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { reply(res, 200, service_.stats_json()); });
  });

  srv.Post("/admin/snapshot", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      const auto snap = service_.snapshot();
      if (options_.snapshot_path) {
        std::ofstream out(*options_.snapshot_path);
        if (!out) throw std::runtime_error("cannot write snapshot to " + *options_.snapshot_path);
        out << snap.dump(2) << '\n';
      }
      reply(res, 200, snap);
    });
  });

  srv.Post("/admin/restore", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      service_.restore(nlohmann::json::parse(req.body));
      reply(res, 200, {{"ok", true}});
    });
  });

  if (options_.static_dir) srv.set_mount_point("/", *options_.static_dir);
}

int HttpFrontend::bind() {
  int port = options_.port;
  if (port == 0) {
    port = server_->bind_to_any_port(options_.host);
  } else if (!server_->bind_to_port(options_.host, port)) {
    port = -1;
  }
  if (port < 0) {
    throw std::runtime_error("cannot bind " + options_.host + ":" + std::to_string(options_.port));
  }
  return port;
}

void HttpFrontend::serve() {
  running_ = true;
  expiry_thread_ = std::thread([this] {
    const auto step = std::chrono::duration<double>(options_.expiry_interval_seconds);
    auto next = std::chrono::steady_clock::now();
    while (running_) {
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
      if (std::chrono::steady_clock::now() < next) continue;
      next += std::chrono::duration_cast<std::chrono::steady_clock::duration>(step);
      service_.expire_tickets(options_.clock());
    }
  });
  server_->listen_after_bind();
  running_ = false;
  if (expiry_thread_.joinable()) expiry_thread_.join();
}

void HttpFrontend::wait_until_ready() const { server_->wait_until_ready(); }

void HttpFrontend::stop() {
  running_ = false;
  // serve() joins the expiry thread once the listener returns.
  if (server_) server_->stop();
}

}  // namespace qacme

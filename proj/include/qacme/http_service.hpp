#pragma once

// HTTP+JSON binding of QacService:
//
//   GET  /suggest?prefix=&user=     -> {token, suggestions: [{position, text}], short_fill}
//   POST /feedback {token, position|null}
//   GET  /stats
//   POST /admin/snapshot             -> snapshot JSON (also written to the
//                                       snapshot path when one is configured)
//   POST /admin/restore  <snapshot JSON>

#include <atomic>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "qacme/service.hpp"

namespace httplib {
class Server;
}

namespace qacme {

struct HttpOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 = pick a free port
  std::optional<std::string> static_dir;
  std::optional<std::string> snapshot_path;
  double expiry_interval_seconds = 1.0;
  // Seconds since epoch; injectable for tests.
  std::function<double()> clock;
};

class HttpFrontend {
 public:
  HttpFrontend(QacService& service, HttpOptions options);
  ~HttpFrontend();
  HttpFrontend(const HttpFrontend&) = delete;
  HttpFrontend& operator=(const HttpFrontend&) = delete;

  // Binds the socket and returns the bound port; throws on failure.
  int bind();
  // Serves until stop(); also runs the periodic ticket expiry.
  void serve();
  // Blocks until serve() is accepting connections.
  void wait_until_ready() const;
  void stop();

 private:
  void install_routes();

  QacService& service_;
  HttpOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::atomic<bool> running_{false};
  std::thread expiry_thread_;
};

double wall_clock_seconds();

}  // namespace qacme

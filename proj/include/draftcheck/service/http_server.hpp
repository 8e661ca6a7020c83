#pragma once

#include <memory>
#include <string>

#include "draftcheck/service/feedback_service.hpp"

namespace httplib {
class Server;
}

namespace draftcheck::service {

// JSON-over-HTTP front end for FeedbackService. Routes:
//   GET  /api/health
//   GET  /api/rounds
//   POST /api/rounds/{round}/students/{student}/feedback   body: draft text
//   POST /api/rounds/{round}/students/{student}/submit     body: draft text
//   GET  /api/rounds/{round}/students/{student}/history
//   GET  /api/rounds/{round}/analytics/{statistic}[?format=csv]
class HttpServer {
 public:
  explicit HttpServer(FeedbackService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Returns false when the address cannot be bound.
  bool bind(const std::string& host, int port);
  // Binds an ephemeral port and returns it, or -1.
  int bind_any_port(const std::string& host);
  // Blocks until stop() is called.
  bool serve();
  void stop();
  void wait_until_ready() const;
  int port() const { return port_; }

 private:
  FeedbackService& service_;
  std::unique_ptr<httplib::Server> server_;
  int port_{-1};
};

}  // namespace draftcheck::service

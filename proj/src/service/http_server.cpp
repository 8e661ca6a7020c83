#include "draftcheck/service/http_server.hpp"

#include <sys/socket.h>

#include <chrono>

#include <httplib.h>
#include <spdlog/spdlog.h>

namespace draftcheck::service {
namespace {

void write_response(httplib::Response& res, const ApiResponse& api) {
  res.status = api.status;
  if (!api.text.empty() || api.content_type != "application/json") {
    res.set_content(api.text, api.content_type);
  } else {
    res.set_content(api.body.dump(), "application/json");
  }
}

std::optional<std::string> header_value(const httplib::Request& req, const std::string& name) {
  if (!req.has_header(name)) return std::nullopt;
  return req.get_header_value(name);
}

}  // namespace

HttpServer::HttpServer(FeedbackService& service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  auto& svr = *server_;
  const std::string header = service_.config().student_header;

  // httplib's default adds SO_REUSEPORT, which lets a second instance share the port silently.
  svr.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });

  svr.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"status":"ok"})", "application/json");
  });
  svr.Get("/api/rounds", [this](const httplib::Request&, httplib::Response& res) {
    write_response(res, service_.list_rounds());
  });
  svr.Post(R"(/api/rounds/([^/]+)/students/([^/]+)/feedback)",
           [this, header](const httplib::Request& req, httplib::Response& res) {
             write_response(res, service_.request_feedback(req.matches[1], req.matches[2], req.body,
                                                           header_value(req, header)));
           });
  svr.Post(R"(/api/rounds/([^/]+)/students/([^/]+)/submit)",
           [this, header](const httplib::Request& req, httplib::Response& res) {
             write_response(res, service_.submit(req.matches[1], req.matches[2], req.body,
                                                 header_value(req, header)));
           });
  svr.Get(R"(/api/rounds/([^/]+)/students/([^/]+)/history)",
          [this, header](const httplib::Request& req, httplib::Response& res) {
            write_response(res, service_.history(req.matches[1], req.matches[2],
                                                 header_value(req, header)));
          });
  svr.Get(R"(/api/rounds/([^/]+)/analytics/([^/]+))",
          [this](const httplib::Request& req, httplib::Response& res) {
            const bool csv = req.has_param("format") && req.get_param_value("format") == "csv";
            write_response(res, service_.analytics(req.matches[1], req.matches[2], csv));
          });

  if (const auto& dir = service_.config().static_dir) {
    if (!svr.set_mount_point("/", dir->string())) {
      spdlog::warn("static_dir {} does not exist; not serving UI assets", dir->string());
    }
  }

  svr.set_exception_handler([](const httplib::Request& req, httplib::Response& res,
                               std::exception_ptr ep) {
    std::string what = "unknown error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    spdlog::error("{} {} failed: {}", req.method, req.path, what);
    res.status = 500;
    res.set_content(nlohmann::json{{"error", "InternalError"}, {"message", what}}.dump(),
                    "application/json");
  });
  svr.set_logger([](const httplib::Request& req, const httplib::Response& res) {
    spdlog::info("{} {} -> {} ({} bytes in, {} bytes out)", req.method, req.path, res.status,
                 req.body.size(), res.body.size());
  });
}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::bind(const std::string& host, int port) {
  if (!server_->bind_to_port(host, port)) return false;
  port_ = port;
  return true;
}

int HttpServer::bind_any_port(const std::string& host) {
  port_ = server_->bind_to_any_port(host);
  return port_;
}

bool HttpServer::serve() { return server_->listen_after_bind(); }

void HttpServer::stop() {
  if (server_ && server_->is_running()) server_->stop();
}

void HttpServer::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace draftcheck::service

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "ooprompt/gateway.hpp"
#include "ooprompt/json.hpp"
#include "ooprompt/workspace.hpp"

namespace ooprompt {

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
  std::string authorization;  // raw Authorization header
};

struct ApiResponse {
  int status = 200;
  Json body;  // always an envelope
};

/// HTTP status for an error code: 400, 401, 404, 409 or 502 (500 for I/O).
int http_status(ErrorCode code);

Json ok_envelope(Json data);
Json error_envelope(const Error& e);

/// JSON-over-HTTP facade over a workspace. Mutations are serialized and must echo
/// the caller's object_version; evaluation runs are started in the background and
/// polled by run id.
struct ServiceOptions {
  std::optional<std::string> cors_origin;  // unset: take it from workspace.json
  std::optional<std::string> api_token;
};

class Service {
 public:
  Service(Workspace& ws, Assistant& assistant, ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Routes one request without any transport.
  ApiResponse handle(const ApiRequest& req);

  /// Binds and serves on a background thread; port 0 picks a free port. Returns the port.
  int start(const std::string& host, int port);
  /// Blocks until stop() is called or the listener fails.
  void wait();
  void stop();

  /// Joins finished and running evaluation jobs.
  void drain();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// "host:port" or ":port"; defaults to 127.0.0.1:8080.
std::pair<std::string, int> parse_listen_address(const std::string& spec);

}  // namespace ooprompt

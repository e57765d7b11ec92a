#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "memlab/server/experiment_service.hpp"

namespace memlab::server {

struct HttpOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  /// Directory served under /stimuli/. Pool image_uri values are resolved
  /// relative to it for the per-slot /stimuli/s/<session>/<slot> locators.
  std::optional<std::filesystem::path> stimuli_dir;
};

/// JSON-over-HTTP front end of an ExperimentService:
///   POST /experiments
///   POST /experiments/{id}/sessions
///   GET  /sessions/{id}/schedule
///   POST /sessions/{id}/responses
///   POST /sessions/{id}/complete
///   GET  /experiments/{id}/export?format=csv|jsonl&what=table|matrix
///   GET  /stimuli/...
/// Errors come back as {"error": <code>, "message": <text>} with 400, 404,
/// 409 or 410.
class HttpServer {
 public:
  HttpServer(ExperimentService& service, HttpOptions options);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds the socket and returns the bound port. Throws std::runtime_error on failure.
  int bind();
  /// Serves until stop(); call bind() first.
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace memlab::server

#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "argmine/pipeline.hpp"

namespace argmine {

class ServiceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  // Mounted at "/" when it exists.
  std::filesystem::path static_dir;
  std::string cors_origin = "*";
  // Models offered by /api/models; the first is the default.
  std::vector<std::string> models;
  AnalyzeOptions analyze;
  ShotSet shots;
  // Reachability check for /api/health; defaults to probe_server.
  std::function<bool()> probe;
};

// Local HTTP front end:
//   POST /api/analyze  {"text": ..., "model"?, "setup"?}  -> analysis
//   GET  /api/models   {"models": [...], "default": ...}
//   GET  /api/health   {"status": "ok" | "degraded", ...}
class Service {
 public:
  Service(ServiceOptions options, Completer& completer);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds the socket; throws ServiceError when the port is taken. Returns the
  // bound port.
  int bind();
  // Blocks until stop().
  void listen();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace argmine

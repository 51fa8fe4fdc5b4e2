#include "argmine/service.hpp"

#include <algorithm>

#include <httplib.h>

#include <nlohmann/json.hpp>

namespace argmine {

using nlohmann::json;

struct Service::Impl {
  ServiceOptions options;
  Completer& completer;
  httplib::Server server;
  int port = -1;

  Impl(ServiceOptions o, Completer& c) : options(std::move(o)), completer(c) {}

  void send_json(httplib::Response& res, int status, const json& body) const {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  void routes() {
    // httplib's default adds SO_REUSEPORT, which would let a second server
    // share a busy port instead of failing to bind.
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    server.set_default_headers({{"Access-Control-Allow-Origin", options.cors_origin},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
    });

    server.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) {
      const bool reachable = options.probe ? options.probe()
                                           : probe_server(options.analyze.config.model);
      send_json(res, 200, {{"status", reachable ? "ok" : "degraded"},
                           {"model_reachable", reachable},
                           {"model", options.analyze.config.model.model},
                           {"version", ARGMINE_VERSION}});
    });

    server.Get("/api/models", [this](const httplib::Request&, httplib::Response& res) {
      std::vector<std::string> models = options.models;
      const std::string& configured = options.analyze.config.model.model;
      if (std::find(models.begin(), models.end(), configured) == models.end()) {
        models.insert(models.begin(), configured);
      }
      send_json(res, 200, {{"models", models}, {"default", configured}});
    });

    server.Post("/api/analyze", [this](const httplib::Request& req, httplib::Response& res) {
      const json body = json::parse(req.body, nullptr, false);
      if (body.is_discarded() || !body.is_object() || !body.contains("text") ||
          !body["text"].is_string()) {
        send_json(res, 400, {{"error", "expected a JSON object with a string field \"text\""}});
        return;
      }
      AnalyzeOptions opts = options.analyze;
      try {
        if (body.contains("model")) {
          const std::string model = body["model"].get<std::string>();
          const auto& allowed = options.models;
          if (model != opts.config.model.model &&
              std::find(allowed.begin(), allowed.end(), model) == allowed.end()) {
            send_json(res, 400, {{"error", "unknown model '" + model + "'"}});
            return;
          }
          opts.config.model.model = model;
        }
        if (body.contains("setup")) {
          opts.config.setup = parse_setup(body["setup"].get<std::string>());
          opts.config.type = opts.config.quality = true;
        }
        const AnalysisResult result =
            analyze(body["text"].get<std::string>(), opts, completer, options.shots);
        json out = to_json(result);
        out["options"] = {{"model", opts.config.model.model},
                          {"setup", to_string(opts.config.setup)},
                          {"mode", to_string(opts.config.mode)},
                          {"shots", opts.config.shots}};
        send_json(res, 200, out);
      } catch (const InputError& e) {
        send_json(res, 400, {{"error", e.what()}});
      } catch (const ConfigError& e) {
        send_json(res, 400, {{"error", e.what()}});
      } catch (const std::invalid_argument& e) {
        send_json(res, 400, {{"error", e.what()}});
      } catch (const nlohmann::json::exception& e) {
        send_json(res, 400, {{"error", e.what()}});
      } catch (const std::exception& e) {
        send_json(res, 500, {{"error", e.what()}});
      }
    });

    if (!options.static_dir.empty() && std::filesystem::is_directory(options.static_dir)) {
      server.set_mount_point("/", options.static_dir.string());
    }
  }
};

Service::Service(ServiceOptions options, Completer& completer)
    : impl_(std::make_unique<Impl>(std::move(options), completer)) {
  impl_->routes();
}

Service::~Service() { stop(); }

int Service::bind() {
  const auto& o = impl_->options;
  if (o.port == 0) {
    impl_->port = impl_->server.bind_to_any_port(o.host);
  } else if (impl_->server.bind_to_port(o.host, o.port)) {
    impl_->port = o.port;
  } else {
    impl_->port = -1;
  }
  if (impl_->port < 0) {
    throw ServiceError("cannot listen on " + o.host + ":" + std::to_string(o.port) +
                       " (port in use?)");
  }
  return impl_->port;
}

void Service::listen() {
  if (impl_->port < 0) bind();
  impl_->server.listen_after_bind();
}

void Service::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

bool Service::running() const { return impl_->server.is_running(); }

}  // namespace argmine

#include "memlab/server/http_server.hpp"

#include <fstream>
#include <iterator>
#include <stdexcept>

#include <httplib.h>

#include "codec.hpp"
#include "memlab/error.hpp"
#include "memlab/io/records.hpp"

namespace memlab::server {
namespace {

using json = nlohmann::ordered_json;

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kConflict:
    case ErrorCode::kEmptyAggregate: return 409;
    case ErrorCode::kGone: return 410;
    default: return 400;
  }
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send_json(res, status, json{{"error", code}, {"message", message}});
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    json j = json::parse(req.body);
    if (!j.is_object()) fail(ErrorCode::kInvalidInput, "request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kInvalidInput, std::string("request body is not valid JSON: ") + e.what());
  }
}

json to_json(const SessionDescriptor& d) {
  json slots = json::array();
  for (const auto& s : d.slots) {
    slots.push_back(json{{"slot", s.slot}, {"image_uri", s.image_uri}, {"display_ms", d.display_ms},
                         {"gap_ms", d.gap_ms}});
  }
  return json{{"session_id", d.session_id},
              {"experiment_id", d.experiment_id},
              {"participant_id", d.participant_id},
              {"sequence_id", d.sequence_id},
              {"seed", d.seed},
              {"display_ms", d.display_ms},
              {"gap_ms", d.gap_ms},
              {"completed", d.completed},
              {"slots", std::move(slots)}};
}

json to_json(const ResponseAck& a) {
  return json{{"session_id", a.session_id},
              {"slot", a.slot},
              {"correct", a.correct},
              {"offset", a.offset},
              {"received_ms", a.received_ms}};
}

const char* mime_for(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".png") return "image/png";
  if (ext == ".gif") return "image/gif";
  if (ext == ".webp") return "image/webp";
  return "application/octet-stream";
}

}  // namespace

struct HttpServer::Impl {
  ExperimentService& service;
  HttpOptions options;
  httplib::Server http;
  int port = 0;

  Impl(ExperimentService& s, HttpOptions o) : service(s), options(std::move(o)) {}

  template <typename Handler>
  httplib::Server::Handler guarded(Handler handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
      try {
        handler(req, res);
      } catch (const Error& e) {
        send_error(res, status_for(e.code()), to_string(e.code()), e.what());
      } catch (const json::exception& e) {
        send_error(res, 400, "InvalidInput", e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "Internal", e.what());
      }
    };
  }

  void routes() {
    http.set_default_headers({{"Access-Control-Allow-Origin", "*"}, {"Cache-Control", "no-store"}});
    http.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });

    http.Post("/experiments", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json body = parse_body(req);
      ExperimentConfig config = codec::config_from_json(body);
      if (body.contains("pool_path")) {
        config.pool = io::read_pool_file(body.at("pool_path").get<std::string>());
      }
      if (body.contains("sequence_path")) {
        auto bundle = io::read_bundle_files({body.at("sequence_path").get<std::string>()});
        if (bundle.sequences.size() != 1) {
          fail(ErrorCode::kInvalidInput, "sequence_path must hold exactly one sequence");
        }
        config.fixed_sequence = std::move(bundle.sequences.begin()->second);
      }
      const std::string id = service.create_experiment(std::move(config));
      const ExperimentConfig stored = service.experiment_config(id);
      send_json(res, 201, json{{"experiment_id", id}, {"seed", *stored.seed}, {"max_sessions", stored.max_sessions},
                               {"params", codec::to_json(stored.params)}});
    }));

    http.Post(R"(/experiments/([^/]+)/sessions)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json body = parse_body(req);
      const auto participant = codec::value_or<std::string>(body, "participant_id", "");
      send_json(res, 201, to_json(service.create_session(req.matches[1], participant)));
    }));

    http.Get(R"(/sessions/([^/]+)/schedule)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, to_json(service.schedule(req.matches[1])));
    }));

    http.Post(R"(/sessions/([^/]+)/responses)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json body = parse_body(req);
      if (!body.contains("slot")) fail(ErrorCode::kInvalidInput, "missing field 'slot'");
      const int slot = codec::value_or<int>(body, "slot", -1);
      const bool pressed = codec::value_or<bool>(body, "pressed", true);
      const auto latency = codec::value_or<std::int64_t>(body, "latency_ms", 0);
      send_json(res, 200, to_json(service.record_response(req.matches[1], slot, pressed, latency)));
    }));

    http.Post(R"(/sessions/([^/]+)/complete)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, codec::to_json(service.complete_session(req.matches[1])));
    }));

    http.Get(R"(/experiments/([^/]+)/export)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string format = req.has_param("format") ? req.get_param_value("format") : "csv";
      const std::string what = req.has_param("what") ? req.get_param_value("what") : "table";
      if (format != "csv" && format != "jsonl") fail(ErrorCode::kInvalidInput, "format must be csv or jsonl");
      if (what != "table" && what != "matrix") fail(ErrorCode::kInvalidInput, "what must be table or matrix");
      const auto body = service.export_data(req.matches[1], format == "csv" ? ExportFormat::kCsv : ExportFormat::kJsonl,
                                            what == "table" ? ExportWhat::kTable : ExportWhat::kMatrix);
      res.status = 200;
      res.set_content(body, format == "csv" ? "text/csv" : "application/x-ndjson");
    }));

    http.Get(R"(/stimuli/s/([^/]+)/(\d+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string uri = service.stimulus_uri(req.matches[1], std::stoi(req.matches[2]));
      if (!options.stimuli_dir) fail(ErrorCode::kNotFound, "no stimulus directory configured");
      const std::filesystem::path rel(uri);
      if (rel.is_absolute() || uri.find("..") != std::string::npos) fail(ErrorCode::kNotFound, "stimulus not servable");
      const auto path = *options.stimuli_dir / rel;
      std::ifstream in(path, std::ios::binary);
      if (!in) fail(ErrorCode::kNotFound, "stimulus file missing");
      std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      res.status = 200;
      res.set_content(std::move(bytes), mime_for(path));
    }));

    if (options.stimuli_dir) http.set_mount_point("/stimuli", options.stimuli_dir->string());
  }
};

HttpServer::HttpServer(ExperimentService& service, HttpOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {
  impl_->routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  if (impl_->options.port == 0) {
    impl_->port = impl_->http.bind_to_any_port(impl_->options.host);
  } else {
    impl_->port = impl_->http.bind_to_port(impl_->options.host, impl_->options.port) ? impl_->options.port : -1;
  }
  if (impl_->port <= 0) {
    throw std::runtime_error("cannot bind " + impl_->options.host + ":" + std::to_string(impl_->options.port));
  }
  return impl_->port;
}

void HttpServer::run() { impl_->http.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->http.stop();
}

}  // namespace memlab::server

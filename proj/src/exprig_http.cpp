#include "glossmap/exprig.hpp"

#include <httplib.h>
#include <json.hpp>

namespace glossmap::exprig {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message,
                json extra = json::object()) {
    extra["error"] = code;
    extra["message"] = message;
    send_json(res, status, extra);
}

int conflict_status(ConflictCode code) { return code == ConflictCode::unknown_session ? 404 : 409; }

/// Runs a handler and maps service exceptions onto HTTP responses.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
    try {
        fn();
    } catch (const ConflictError& e) {
        send_error(res, conflict_status(e.code()), to_string(e.code()), e.what());
    } catch (const json::exception& e) {
        send_error(res, 400, "bad_request", e.what());
    } catch (const Error& e) {
        send_error(res, e.kind() == ErrorKind::io ? 500 : 422, "validation", e.what());
    }
}

json trial_json(const TrialRef& t) {
    if (t.done) return json{{"done", true}, {"index", t.index}, {"total", t.total}};
    return json{{"done", false},
                {"stimulus_id", t.stimulus_id},
                {"image_url", t.image_url},
                {"index", t.index},
                {"total", t.total}};
}

}  // namespace

struct HttpServer::Impl {
    ExperimentService& service;
    httplib::Server server;

    Impl(ExperimentService& s, const std::filesystem::path& stimuli_dir) : service(s) {
        server.set_mount_point("/stimuli", stimuli_dir.string());
        server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});

        server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
            res.status = 204;
        });

        server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const json body = json::parse(req.body);
                const SessionState s = service.start_session(
                    body.at("observer").get<std::string>(), body.at("session").get<int>(),
                    body.value("seed", std::uint64_t{0}));
                send_json(res, 201,
                          json{{"session_id", s.id}, {"observer", s.observer}, {"session", s.session},
                               {"seed", s.seed}, {"cursor", s.cursor}, {"total", s.order.size()}});
            });
        });

        server.Get(R"(/sessions/([^/]+)/trial)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] { send_json(res, 200, trial_json(service.next_trial(req.matches[1]))); });
        });

        server.Post(R"(/sessions/([^/]+)/ratings)", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const json body = json::parse(req.body);
                Submission sub;
                sub.stimulus_id = body.at("stimulus_id").get<std::string>();
                sub.ratings.values = {body.at("metal").get<double>(), body.at("shiny_black").get<double>(),
                                      body.at("shiny_white").get<double>(), body.at("other").get<double>()};
                const std::string sid = req.matches[1];
                try {
                    service.submit_rating(sid, sub);
                } catch (const ConflictError&) {
                    throw;
                } catch (const DomainError& e) {
                    send_error(res, 422, "validation", e.what(), json{{"sum", sub.ratings.sum()}});
                    return;
                }
                const SessionState s = service.session(sid);
                send_json(res, 200, json{{"accepted", true}, {"cursor", s.cursor}, {"completed", s.completed}});
            });
        });

        server.Get("/export.csv", [this](const httplib::Request&, httplib::Response& res) {
            res.set_content(service.export_csv(), "text/csv");
        });
    }
};

HttpServer::HttpServer(ExperimentService& service, std::filesystem::path stimuli_dir)
    : impl_(std::make_unique<Impl>(service, stimuli_dir)) {}

HttpServer::~HttpServer() = default;

int HttpServer::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool HttpServer::bind(const std::string& host, int port) { return impl_->server.bind_to_port(host, port); }

bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace glossmap::exprig

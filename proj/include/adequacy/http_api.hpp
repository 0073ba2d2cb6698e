#pragma once

// JSON-over-HTTP routes for ScenarioService. docs/api.md lists the payloads.

#include <adequacy/service.hpp>

#include <httplib.h>
#include <json.hpp>

#include <cstdlib>
#include <string>

namespace adequacy {

namespace detail::http {

inline void send(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump() + "\n", "application/json");
}

inline nlohmann::json error_body(const std::string& message) { return {{"error", message}}; }

template <typename F>
void guarded(httplib::Response& res, F&& f) {
    try {
        f();
    } catch (const RequestError& e) {
        auto body = error_body("validation failed");
        body["fields"] = nlohmann::json::array();
        for (const auto& fe : e.errors()) body["fields"].push_back({{"field", fe.field}, {"message", fe.message}});
        send(res, 400, body);
    } catch (const NotFound& e) {
        send(res, 404, error_body(e.what()));
    } catch (const NotReady& e) {
        auto body = error_body(e.what());
        body["status"] = status_name(e.status());
        send(res, 409, body);
    } catch (const ValidationError& e) {
        send(res, 400, error_body(e.what()));
    } catch (const ComputationError& e) {
        send(res, 422, error_body(e.what()));
    } catch (const std::exception& e) {
        send(res, 500, error_body(e.what()));
    }
}

inline nlohmann::json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return nlohmann::json::object();
    auto j = nlohmann::json::parse(req.body, nullptr, false);
    if (j.is_discarded()) throw RequestError("body", "is not valid JSON");
    return j;
}

}  // namespace detail::http

inline void register_routes(httplib::Server& server, ScenarioService& service) {
    using namespace detail::http;

    server.Get("/api/health", [&](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] { send(res, 200, service.health()); });
    });

    server.Post("/api/scenarios", [&](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto c = service.create(parse_body(req));
            send(res, c.status == JobStatus::done ? 200 : 202,
                 {{"id", c.id}, {"status", status_name(c.status)}, {"existing", c.existing}});
        });
    });

    server.Get("/api/scenarios/:id", [&](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send(res, 200, service.describe(req.path_params.at("id"))); });
    });

    server.Get("/api/scenarios/:id/metrics", [&](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send(res, 200, service.metrics(req.path_params.at("id"))); });
    });

    server.Get("/api/scenarios/:id/distributions/:metric", [&](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto& id = req.path_params.at("id");
            const auto& metric = req.path_params.at("metric");
            (void)service.describe(id);  // 404 before a bad metric name
            try {
                (void)parse_metric(metric);
            } catch (const ValidationError& e) {
                throw RequestError("metric", e.what());
            }
            send(res, 200, service.distribution(id, metric));
        });
    });

    server.Post("/api/scenarios/:id/whatif", [&](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send(res, 200, service.whatif(req.path_params.at("id"), parse_body(req))); });
    });

    if (const char* dir = std::getenv("ADEQUACY_STATIC_DIR"); dir && *dir) server.set_mount_point("/", dir);
}

struct ListenAddress {
    std::string host;
    int port = 0;
};

inline ListenAddress parse_listen(const std::string& s) {
    const auto colon = s.rfind(':');
    if (colon == std::string::npos) throw ValidationError("listen address must be HOST:PORT, got '" + s + "'");
    ListenAddress a{s.substr(0, colon), 0};
    const auto port = s.substr(colon + 1);
    const auto [p, ec] = std::from_chars(port.data(), port.data() + port.size(), a.port);
    if (ec != std::errc() || p != port.data() + port.size() || a.port < 0 || a.port > 65535)
        throw ValidationError("invalid port in listen address '" + s + "'");
    return a;
}

}  // namespace adequacy

#include <charconv>
#include <optional>
#include <string>

#include "httplib.h"
#include "json.hpp"

#include "covmap/service.hpp"

namespace covmap {

namespace {

void send(httplib::Response& res, const HttpResult& r)
{
    res.status = r.status;
    for (const auto& [name, value] : r.headers) res.set_header(name, value);
    res.set_content(r.body, r.content_type);
}

void send_error(httplib::Response& res, int status, const std::string& reason, const std::string& detail)
{
    send(res, {status, nlohmann::json{{"error", reason}, {"detail", detail}}.dump(), "application/json", {}});
}

std::optional<double> parse_double(const std::string& s)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

} // namespace

void mount_routes(httplib::Server& server, Service& service)
{
    server.set_tcp_nodelay(true);
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Expose-Headers", kModelGenerationHeader}});

    server.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Post("/v1/measurements", [&service](const httplib::Request& req, httplib::Response& res) {
        send(res, service.post_measurement(req.body));
    });

    server.Get("/v1/heatmap", [&service](const httplib::Request& req, httplib::Response& res) {
        if (!req.has_param("operator")) return send_error(res, 400, "MissingOperator", "operator is required");
        send(res, service.get_heatmap(req.get_param_value("operator")));
    });

    server.Get("/v1/nearest-strong", [&service](const httplib::Request& req, httplib::Response& res) {
        if (!req.has_param("operator")) return send_error(res, 400, "MissingOperator", "operator is required");
        std::optional<double> values[3];
        const char* names[3] = {"lat", "lon", "rssi_dbm"};
        for (int i = 0; i < 3; ++i) {
            if (req.has_param(names[i])) values[i] = parse_double(req.get_param_value(names[i]));
            if (!values[i]) {
                const std::string reason = i < 2 ? "BadCoordinates" : "OutOfRangeRssi";
                return send_error(res, 400, reason, std::string(names[i]) + " must be a number");
            }
        }
        send(res, service.get_nearest_strong(req.get_param_value("operator"), *values[0], *values[1], *values[2]));
    });

    server.Get("/v1/operators", [&service](const httplib::Request&, httplib::Response& res) {
        send(res, service.get_operators());
    });
}

} // namespace covmap

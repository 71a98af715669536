#include "covmap/sinks.hpp"

#include <stdexcept>

#include "httplib.h"
#include "json.hpp"

namespace covmap::sim {

HttpPoster::HttpPoster(const std::string& base_url)
{
    std::string url = base_url;
    while (!url.empty() && url.back() == '/') url.pop_back();
    client_ = std::make_unique<httplib::Client>(url);
    if (!client_->is_valid()) throw std::invalid_argument("bad service url " + base_url);
    client_->set_keep_alive(true);
    client_->set_tcp_nodelay(true);
}

HttpPoster::~HttpPoster() = default;
HttpPoster::HttpPoster(HttpPoster&&) noexcept = default;
HttpPoster& HttpPoster::operator=(HttpPoster&&) noexcept = default;

void HttpPoster::operator()(const Measurement& m)
{
    auto res = client_->Post("/v1/measurements", to_json(m).dump(), "application/json");
    if (!res) throw std::runtime_error("POST failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw std::runtime_error("service replied " + std::to_string(res->status) + ": " + res->body);
    auto body = nlohmann::json::parse(res->body, nullptr, false);
    if (!body.is_discarded() && body.value("status", "") == "suppressed")
        ++suppressed_;
    else
        ++admitted_;
}

JsonlWriter::JsonlWriter(const std::filesystem::path& path) : out_(path, std::ios::app | std::ios::binary), path_(path)
{
    if (!out_) throw std::runtime_error("cannot open " + path.string());
}

void JsonlWriter::operator()(const Measurement& m)
{
    out_ << to_json_line(m);
    out_.flush();
    if (!out_) throw std::runtime_error("write to " + path_.string() + " failed");
}

} // namespace covmap::sim

#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include "covmap/measurement.hpp"

namespace httplib {
class Client;
}

namespace covmap::sim {

/// POSTs each measurement to <base_url>/v1/measurements. Throws on transport errors and
/// non-200 replies; dedup suppression is a 200 and counts as delivered.
class HttpPoster
{
public:
    explicit HttpPoster(const std::string& base_url);
    ~HttpPoster();

    HttpPoster(HttpPoster&&) noexcept;
    HttpPoster& operator=(HttpPoster&&) noexcept;

    void operator()(const Measurement& m);

    std::size_t admitted() const { return admitted_; }
    std::size_t suppressed() const { return suppressed_; }

private:
    std::unique_ptr<httplib::Client> client_;
    std::size_t admitted_ = 0;
    std::size_t suppressed_ = 0;
};

/// Appends JSON lines to a file.
class JsonlWriter
{
public:
    explicit JsonlWriter(const std::filesystem::path& path);
    void operator()(const Measurement& m);

private:
    std::ofstream out_;
    std::filesystem::path path_;
};

} // namespace covmap::sim

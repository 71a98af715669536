#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "covmap/clustering.hpp"
#include "covmap/geo.hpp"
#include "covmap/measurement.hpp"

namespace covmap {

struct ServiceConfig
{
    std::string listen = "127.0.0.1:8080";
    std::filesystem::path data_file = "data/measurements.jsonl";
    std::filesystem::path model_dir = "models";
    std::int64_t recluster_interval_s = 900;
    std::int64_t dedup_window_s = kDefaultDedupWindowS;
    std::int64_t max_clock_skew_s = kDefaultMaxClockSkewS;
    int k = kDefaultK;
    int max_iter = kDefaultMaxIter;
    double search_radius_m = geo::kDefaultSearchRadiusM;
    int candidate_limit = geo::kDefaultCandidateLimit;
    std::uint64_t rng_seed = 0;
};

class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Throws ConfigError naming the first bad field.
void validate(const ServiceConfig& config);

/// JSON object whose keys are the ServiceConfig field names; absent keys keep defaults.
ServiceConfig load_config_file(const std::filesystem::path& path, ServiceConfig base = {});

struct ListenAddress
{
    std::string host;
    int port = 0;
};

ListenAddress parse_listen(const std::string& listen);

} // namespace covmap

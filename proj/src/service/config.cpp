#include "covmap/config.hpp"

#include <charconv>
#include <fstream>

#include "json.hpp"

namespace covmap {

void validate(const ServiceConfig& c)
{
    if (c.listen.empty()) throw ConfigError("listen must be non-empty");
    parse_listen(c.listen);
    if (c.data_file.empty()) throw ConfigError("data_file must be non-empty");
    if (c.model_dir.empty()) throw ConfigError("model_dir must be non-empty");
    if (c.recluster_interval_s < 1) throw ConfigError("recluster_interval_s must be >= 1");
    if (c.dedup_window_s < 0) throw ConfigError("dedup_window_s must be >= 0");
    if (c.max_clock_skew_s < 0) throw ConfigError("max_clock_skew_s must be >= 0");
    if (c.k < 1) throw ConfigError("k must be >= 1");
    if (c.max_iter < 1) throw ConfigError("max_iter must be >= 1");
    if (!(c.search_radius_m > 0.0)) throw ConfigError("search_radius_m must be > 0");
    if (c.candidate_limit < 1) throw ConfigError("candidate_limit must be >= 1");
}

ServiceConfig load_config_file(const std::filesystem::path& path, ServiceConfig c)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ConfigError("config file must hold a JSON object");

    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "listen") c.listen = value.get<std::string>();
            else if (key == "data_file") c.data_file = value.get<std::string>();
            else if (key == "model_dir") c.model_dir = value.get<std::string>();
            else if (key == "recluster_interval_s") c.recluster_interval_s = value.get<std::int64_t>();
            else if (key == "dedup_window_s") c.dedup_window_s = value.get<std::int64_t>();
            else if (key == "max_clock_skew_s") c.max_clock_skew_s = value.get<std::int64_t>();
            else if (key == "k") c.k = value.get<int>();
            else if (key == "max_iter") c.max_iter = value.get<int>();
            else if (key == "search_radius_m") c.search_radius_m = value.get<double>();
            else if (key == "candidate_limit") c.candidate_limit = value.get<int>();
            else if (key == "rng_seed") c.rng_seed = value.get<std::uint64_t>();
            else throw ConfigError("unknown config key " + key);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
    return c;
}

ListenAddress parse_listen(const std::string& listen)
{
    const auto colon = listen.rfind(':');
    if (colon == std::string::npos || colon == 0) throw ConfigError("listen must be host:port");
    ListenAddress a;
    a.host = listen.substr(0, colon);
    const std::string port = listen.substr(colon + 1);
    auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), a.port);
    if (ec != std::errc{} || ptr != port.data() + port.size() || a.port < 0 || a.port > 65535)
        throw ConfigError("bad port in listen address " + listen);
    return a;
}

} // namespace covmap

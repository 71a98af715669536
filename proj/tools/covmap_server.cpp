// Coverage-map ingestion and query service.

#include <csignal>
#include <iostream>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "httplib.h"

#include "covmap/config.hpp"
#include "covmap/service.hpp"

namespace {

httplib::Server* g_server = nullptr;

void on_signal(int)
{
    if (g_server) g_server->stop();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"covmap-server: RSSI measurement ingestion, clustering and coverage queries"};

    std::string config_path;
    covmap::ServiceConfig cli;
    app.add_option("--config", config_path, "JSON config file; flags override its values");
    auto* listen = app.add_option("--listen", cli.listen, "host:port to bind");
    auto* data = app.add_option("--data-file", cli.data_file, "append-only measurement store");
    auto* models = app.add_option("--model-dir", cli.model_dir, "directory for per-operator model files");
    auto* interval = app.add_option("--recluster-interval-s", cli.recluster_interval_s, "seconds between re-clustering runs");
    auto* window = app.add_option("--dedup-window-s", cli.dedup_window_s, "per-device admission window");
    auto* k = app.add_option("--k", cli.k, "clusters per operator");
    auto* radius = app.add_option("--radius-m", cli.search_radius_m, "nearest-strong search radius");
    auto* limit = app.add_option("--limit", cli.candidate_limit, "max candidates per query");
    auto* seed = app.add_option("--seed", cli.rng_seed, "base seed for centroid initialization");
    CLI11_PARSE(app, argc, argv);

    covmap::ServiceConfig config;
    try {
        if (!config_path.empty()) config = covmap::load_config_file(config_path);
        if (*listen) config.listen = cli.listen;
        if (*data) config.data_file = cli.data_file;
        if (*models) config.model_dir = cli.model_dir;
        if (*interval) config.recluster_interval_s = cli.recluster_interval_s;
        if (*window) config.dedup_window_s = cli.dedup_window_s;
        if (*k) config.k = cli.k;
        if (*radius) config.search_radius_m = cli.search_radius_m;
        if (*limit) config.candidate_limit = cli.candidate_limit;
        if (*seed) config.rng_seed = cli.rng_seed;
        covmap::validate(config);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    covmap::Service service(config);
    try {
        service.open();
    } catch (const std::exception& e) {
        spdlog::critical("startup failed: {}", e.what());
        return 1;
    }

    covmap::Scheduler scheduler(std::chrono::seconds(config.recluster_interval_s),
                                [&service] { service.recluster_tick(); });
    scheduler.start();

    httplib::Server server;
    covmap::mount_routes(server, service);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    const auto addr = covmap::parse_listen(config.listen);
    spdlog::info("listening on {}:{}", addr.host, addr.port);
    const bool ok = server.listen(addr.host, addr.port);
    scheduler.stop();
    if (!ok) {
        spdlog::critical("cannot listen on {}", config.listen);
        return 1;
    }
    return 0;
}

// Synthetic handset fleet: walks UEs through a path-loss field and reports measurements.

#include <chrono>
#include <iostream>

#include "CLI11.hpp"

#include "covmap/simulator.hpp"
#include "covmap/sinks.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"covmap-sim: generate RSSI measurements from a tower scenario"};

    std::string scenario_path, post_url, out_path;
    std::uint64_t seed = 0;
    bool use_now = false;
    app.add_option("--scenario", scenario_path, "scenario JSON file")->required()->check(CLI::ExistingFile);
    auto* post = app.add_option("--post", post_url, "service base URL, e.g. http://127.0.0.1:8080");
    auto* out = app.add_option("--out", out_path, "JSON-lines output file");
    post->excludes(out);
    auto* seed_opt = app.add_option("--seed", seed, "override the scenario rng_seed");
    app.add_flag("--now", use_now, "timestamp the trace so it ends at the current time");
    CLI11_PARSE(app, argc, argv);

    if (!*post && !*out) {
        std::cerr << "one of --post or --out is required\n";
        return 2;
    }

    covmap::sim::Scenario scenario;
    try {
        scenario = covmap::sim::load_scenario(scenario_path);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    if (*seed_opt) scenario.rng_seed = seed;
    if (use_now) {
        const auto now = std::chrono::duration_cast<std::chrono::seconds>(
                             std::chrono::system_clock::now().time_since_epoch())
                             .count();
        scenario.start_time_s = now - scenario.duration_s;
    }

    try {
        covmap::sim::TraceSummary summary;
        if (*post) {
            covmap::sim::HttpPoster poster(post_url);
            summary = covmap::sim::run_scenario(scenario, std::ref(poster));
            std::cout << "posted " << summary.total << " measurements (" << poster.admitted() << " admitted, "
                      << poster.suppressed() << " suppressed)\n";
        } else {
            covmap::sim::JsonlWriter writer(out_path);
            summary = covmap::sim::run_scenario(scenario, std::ref(writer));
            std::cout << "wrote " << summary.total << " measurements to " << out_path << "\n";
        }
        for (const auto& [op, n] : summary.per_operator) std::cout << "  " << op << ": " << n << "\n";
    } catch (const covmap::sim::SinkFailure& e) {
        std::cerr << "sink failed after " << e.partial().total << " measurements: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 0;
}

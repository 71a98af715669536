#pragma once

// Synthetic handsets. Towers radiate under a log-distance path-loss model
//     rssi = tx_power - (PL0 + 10 n log10(max(d, 1 m) / 1 m)) + N(0, sigma)
// and UEs random-walk through the field, reporting the strongest tower of their
// operator once per cadence tick.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "covmap/measurement.hpp"
#include "covmap/random.hpp"

namespace covmap::sim {

struct Tower
{
    GeoPoint location;
    double tx_power_dbm = 40.0;
    std::string op;
};

struct BoundingBox
{
    GeoPoint south_west;
    GeoPoint north_east;

    bool contains(const GeoPoint& p) const;
};

struct Scenario
{
    std::vector<Tower> towers;
    int ue_count = 10;
    BoundingBox box;
    std::int64_t duration_s = 600;
    std::int64_t cadence_s = 10;
    double path_loss_exponent = 3.0;
    double reference_loss_db = 40.0; // at 1 m
    double shadowing_sigma_db = 4.0;
    std::uint64_t rng_seed = 0;
    std::int64_t start_time_s = 0;
    double max_step_m = 15.0;
    // 0 starts UEs uniformly in the box; otherwise UE i starts within this radius of
    // tower i mod towers, which models users gathered around sites.
    double hotspot_radius_m = 0.0;
};

class ScenarioError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

class NoTowerForOperator : public std::invalid_argument
{
public:
    explicit NoTowerForOperator(const std::string& op)
        : std::invalid_argument("no tower serves operator " + op)
    {
    }
};

void validate(const Scenario& s);

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Scenario& s);
Scenario load_scenario(const std::filesystem::path& path);

/// Distinct operators in order of first appearance among the towers.
std::vector<std::string> operators(const Scenario& s);

/// Deterministic received power from one tower, unclamped.
double received_power_dbm(const Scenario& s, const Tower& tower, const GeoPoint& location);

/// Strongest-server RSSI for `op` at `location`, clamped to [-140, -20]. Pass an Rng to
/// add a shadowing draw per tower.
double field_rssi(const Scenario& s, const std::string& op, const GeoPoint& location,
                  Rng* shadowing = nullptr);

/// Index into s.towers of the strongest tower at each point (shadowing off, lowest index
/// on ties). With `op` non-empty only that operator's towers compete.
std::vector<int> oracle_labels(const Scenario& s, std::span<const GeoPoint> points,
                               const std::string& op = {});

struct TraceSummary
{
    std::size_t total = 0;
    std::map<std::string, std::size_t> per_operator;
};

class SinkFailure : public std::runtime_error
{
public:
    SinkFailure(const std::string& what, TraceSummary partial)
        : std::runtime_error(what), partial_(std::move(partial))
    {
    }
    const TraceSummary& partial() const { return partial_; }

private:
    TraceSummary partial_;
};

using Sink = std::function<void(const Measurement&)>;

std::string device_id(int ue_index);

/// Emits one measurement per UE at t = 0, cadence, ... <= duration, tick-major.
/// An exception from the sink aborts the run as SinkFailure with the partial counts.
TraceSummary run_scenario(const Scenario& s, const Sink& sink);

} // namespace covmap::sim

#include "covmap/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>

#include "covmap/geo.hpp"

namespace covmap::sim {

using nlohmann::json;

bool BoundingBox::contains(const GeoPoint& p) const
{
    return p.lat >= south_west.lat && p.lat <= north_east.lat && p.lon >= south_west.lon &&
           p.lon <= north_east.lon;
}

void validate(const Scenario& s)
{
    if (s.towers.empty()) throw ScenarioError("scenario needs at least one tower");
    for (const Tower& t : s.towers) {
        if (!is_valid(t.location)) throw ScenarioError("tower location out of range");
        if (!(t.tx_power_dbm >= 0.0 && t.tx_power_dbm <= 60.0)) throw ScenarioError("tx_power_dbm must be in [0, 60]");
        if (t.op.empty()) throw ScenarioError("tower operator must be non-empty");
    }
    if (s.ue_count < 1) throw ScenarioError("ue_count must be >= 1");
    if (s.cadence_s < 1) throw ScenarioError("cadence_s must be >= 1");
    if (s.duration_s < 0) throw ScenarioError("duration_s must be >= 0");
    if (!(s.path_loss_exponent >= 1.6 && s.path_loss_exponent <= 6.5))
        throw ScenarioError("path loss exponent must be in [1.6, 6.5]");
    if (!(s.shadowing_sigma_db >= 0.0)) throw ScenarioError("shadowing sigma must be >= 0");
    if (!(s.max_step_m >= 0.0)) throw ScenarioError("max_step_m must be >= 0");
    if (!(s.hotspot_radius_m >= 0.0)) throw ScenarioError("hotspot_radius_m must be >= 0");
    if (!is_valid(s.box.south_west) || !is_valid(s.box.north_east) ||
        !(s.box.north_east.lat > s.box.south_west.lat) || !(s.box.north_east.lon > s.box.south_west.lon))
        throw ScenarioError("bounding box must be non-degenerate");
}

namespace {

GeoPoint point_from(const json& j)
{
    return {j.at("lat").get<double>(), j.at("lon").get<double>()};
}

json point_json(const GeoPoint& p)
{
    return {{"lat", p.lat}, {"lon", p.lon}};
}

} // namespace

Scenario scenario_from_json(const json& j)
{
    try {
        Scenario s;
        for (const json& t : j.at("towers"))
            s.towers.push_back({point_from(t), t.value("tx_power_dbm", 40.0), t.at("operator").get<std::string>()});
        s.ue_count = j.value("ue_count", s.ue_count);
        s.box.south_west = point_from(j.at("box").at("south_west"));
        s.box.north_east = point_from(j.at("box").at("north_east"));
        s.duration_s = j.value("duration_s", s.duration_s);
        s.cadence_s = j.value("cadence_s", s.cadence_s);
        s.path_loss_exponent = j.value("path_loss_exponent", s.path_loss_exponent);
        s.reference_loss_db = j.value("reference_loss_db", s.reference_loss_db);
        s.shadowing_sigma_db = j.value("shadowing_sigma_db", s.shadowing_sigma_db);
        s.rng_seed = j.value("rng_seed", s.rng_seed);
        s.start_time_s = j.value("start_time_s", s.start_time_s);
        s.max_step_m = j.value("max_step_m", s.max_step_m);
        s.hotspot_radius_m = j.value("hotspot_radius_m", s.hotspot_radius_m);
        validate(s);
        return s;
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("bad scenario: ") + e.what());
    }
}

json to_json(const Scenario& s)
{
    json towers = json::array();
    for (const Tower& t : s.towers)
        towers.push_back({{"lat", t.location.lat}, {"lon", t.location.lon}, {"tx_power_dbm", t.tx_power_dbm}, {"operator", t.op}});
    return {{"towers", towers},
            {"ue_count", s.ue_count},
            {"box", {{"south_west", point_json(s.box.south_west)}, {"north_east", point_json(s.box.north_east)}}},
            {"duration_s", s.duration_s},
            {"cadence_s", s.cadence_s},
            {"path_loss_exponent", s.path_loss_exponent},
            {"reference_loss_db", s.reference_loss_db},
            {"shadowing_sigma_db", s.shadowing_sigma_db},
            {"rng_seed", s.rng_seed},
            {"start_time_s", s.start_time_s},
            {"max_step_m", s.max_step_m},
            {"hotspot_radius_m", s.hotspot_radius_m}};
}

Scenario load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot read scenario file " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ScenarioError("scenario file is not valid JSON");
    return scenario_from_json(j);
}

std::vector<std::string> operators(const Scenario& s)
{
    std::vector<std::string> ops;
    for (const Tower& t : s.towers)
        if (std::find(ops.begin(), ops.end(), t.op) == ops.end()) ops.push_back(t.op);
    return ops;
}

double received_power_dbm(const Scenario& s, const Tower& tower, const GeoPoint& location)
{
    const double d = std::max(geo::haversine_distance(tower.location, location), 1.0);
    return tower.tx_power_dbm - (s.reference_loss_db + 10.0 * s.path_loss_exponent * std::log10(d));
}

double field_rssi(const Scenario& s, const std::string& op, const GeoPoint& location, Rng* shadowing)
{
    double best = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (const Tower& t : s.towers) {
        if (t.op != op) continue;
        double rx = received_power_dbm(s, t, location);
        if (shadowing && s.shadowing_sigma_db > 0.0) rx += s.shadowing_sigma_db * standard_normal(*shadowing);
        best = std::max(best, rx);
        any = true;
    }
    if (!any) throw NoTowerForOperator(op);
    return std::clamp(best, static_cast<double>(kMinRssiDbm), static_cast<double>(kMaxRssiDbm));
}

std::vector<int> oracle_labels(const Scenario& s, std::span<const GeoPoint> points, const std::string& op)
{
    std::vector<int> labels;
    labels.reserve(points.size());
    for (const GeoPoint& p : points) {
        int best = -1;
        double best_rx = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < s.towers.size(); ++i) {
            if (!op.empty() && s.towers[i].op != op) continue;
            const double rx = received_power_dbm(s, s.towers[i], p);
            if (best < 0 || rx > best_rx) {
                best = static_cast<int>(i);
                best_rx = rx;
            }
        }
        labels.push_back(best);
    }
    return labels;
}

std::string device_id(int ue_index)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "sim-ue-%04d", ue_index);
    return buf;
}

namespace {

double reflect(double v, double lo, double hi)
{
    if (v < lo) v = lo + (lo - v);
    if (v > hi) v = hi - (v - hi);
    return std::clamp(v, lo, hi);
}

GeoPoint clamp_to_box(const GeoPoint& p, const BoundingBox& box)
{
    return {std::clamp(p.lat, box.south_west.lat, box.north_east.lat),
            std::clamp(p.lon, box.south_west.lon, box.north_east.lon)};
}

} // namespace

TraceSummary run_scenario(const Scenario& s, const Sink& sink)
{
    validate(s);
    const std::vector<std::string> ops = operators(s);
    Rng walk(mix_seed(s.rng_seed, 1));
    Rng shadow(mix_seed(s.rng_seed, 2));

    std::vector<GeoPoint> position(static_cast<std::size_t>(s.ue_count));
    for (std::size_t i = 0; i < position.size(); ++i) {
        GeoPoint& p = position[i];
        if (s.hotspot_radius_m > 0.0) {
            // Uniform over the disc: sqrt on the radius draw.
            const Tower& site = s.towers[i % s.towers.size()];
            const double r = s.hotspot_radius_m * std::sqrt(uniform01(walk));
            const double a = uniform_real(walk, 0.0, 2.0 * std::numbers::pi);
            p = clamp_to_box(geo::offset_m(site.location, r * std::cos(a), r * std::sin(a)), s.box);
        } else {
            p.lat = uniform_real(walk, s.box.south_west.lat, s.box.north_east.lat);
            p.lon = uniform_real(walk, s.box.south_west.lon, s.box.north_east.lon);
        }
    }

    TraceSummary summary;
    for (std::int64_t t = 0; t <= s.duration_s; t += s.cadence_s) {
        for (int ue = 0; ue < s.ue_count; ++ue) {
            GeoPoint& p = position[static_cast<std::size_t>(ue)];
            Measurement m;
            m.device_id = device_id(ue);
            m.timestamp_s = s.start_time_s + t;
            m.location = p;
            m.op = ops[static_cast<std::size_t>(ue) % ops.size()];
            m.rssi_dbm = static_cast<int>(std::lround(field_rssi(s, m.op, p, &shadow)));
            try {
                sink(m);
            } catch (const std::exception& e) {
                throw SinkFailure(e.what(), summary);
            }
            ++summary.total;
            ++summary.per_operator[m.op];

            const double step = uniform_real(walk, 0.0, s.max_step_m);
            const double heading = uniform_real(walk, 0.0, 2.0 * std::numbers::pi);
            GeoPoint next = geo::offset_m(p, step * std::cos(heading), step * std::sin(heading));
            p.lat = reflect(next.lat, s.box.south_west.lat, s.box.north_east.lat);
            p.lon = reflect(next.lon, s.box.south_west.lon, s.box.north_east.lon);
        }
    }
    return summary;
}

} // namespace covmap::sim

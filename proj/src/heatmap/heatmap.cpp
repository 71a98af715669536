#include "covmap/heatmap.hpp"

#include <algorithm>
#include <map>

#include "json.hpp"

namespace covmap {

std::string_view tag_color(int strength_tag)
{
    const auto last = static_cast<int>(kTagColors.size()) - 1;
    return kTagColors[static_cast<std::size_t>(std::clamp(strength_tag, 0, last))];
}

namespace {

struct CellAccumulator
{
    const TaggedMeasurement* best = nullptr;
    double rssi_sum = 0.0;
    int count = 0;
};

bool outranks(const TaggedMeasurement& a, const TaggedMeasurement& b)
{
    if (a.strength_tag != b.strength_tag) return a.strength_tag > b.strength_tag;
    if (a.location.lat != b.location.lat) return a.location.lat < b.location.lat;
    return a.location.lon < b.location.lon;
}

} // namespace

HeatmapDocument build_heatmap(std::span<const TaggedMeasurement> points, std::string op,
                              std::int64_t generated_at)
{
    std::map<geo::GridCell, CellAccumulator> cells;
    for (const TaggedMeasurement& p : points) {
        CellAccumulator& acc = cells[geo::grid_cell(p.location)];
        if (!acc.best || outranks(p, *acc.best)) acc.best = &p;
        acc.rssi_sum += p.rssi_dbm;
        ++acc.count;
    }

    HeatmapDocument doc;
    doc.op = std::move(op);
    doc.generated_at = generated_at;
    doc.points.reserve(cells.size());
    for (const auto& [cell, acc] : cells) {
        doc.points.push_back(
            {acc.best->location, acc.best->strength_tag, acc.rssi_sum / acc.count, acc.count});
    }
    return doc;
}

std::string to_geojson(const HeatmapDocument& doc)
{
    using nlohmann::ordered_json;
    ordered_json features = ordered_json::array();
    for (const HeatmapPoint& p : doc.points) {
        ordered_json f;
        f["type"] = "Feature";
        f["geometry"] = {{"type", "Point"}, {"coordinates", {p.location.lon, p.location.lat}}};
        f["properties"] = {{"strength_tag", p.strength_tag},
                           {"mean_rssi_dbm", p.mean_rssi_dbm},
                           {"sample_count", p.sample_count},
                           {"color", std::string(tag_color(p.strength_tag))}};
        features.push_back(std::move(f));
    }
    ordered_json fc;
    fc["type"] = "FeatureCollection";
    fc["features"] = std::move(features);
    return fc.dump();
}

std::vector<geo::TaggedPoint> candidate_points(const HeatmapDocument& doc)
{
    std::vector<geo::TaggedPoint> out;
    out.reserve(doc.points.size());
    for (const HeatmapPoint& p : doc.points) out.push_back({p.location, p.strength_tag, p.sample_count});
    return out;
}

} // namespace covmap

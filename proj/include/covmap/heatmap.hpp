#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "covmap/geo.hpp"
#include "covmap/measurement.hpp"

namespace covmap {

struct TaggedMeasurement
{
    GeoPoint location;
    int strength_tag = 0;
    double rssi_dbm = 0.0;
};

// One occupied 10 m cell. The location is that of the cell's highest-tag member
// (lower lat, then lower lon on ties), so it is a place where the tag was observed.
struct HeatmapPoint
{
    GeoPoint location;
    int strength_tag = 0;
    double mean_rssi_dbm = 0.0;
    int sample_count = 0;
};

struct HeatmapDocument
{
    std::string op;
    std::int64_t generated_at = 0;
    std::vector<HeatmapPoint> points;
};

inline constexpr std::array<std::string_view, 5> kTagColors = {
    "#d73027", "#fc8d59", "#fee08b", "#91cf60", "#1a9850"};

/// Red to green ramp. Tags past the end of the ramp take its last color.
std::string_view tag_color(int strength_tag);

/// Buckets points into grid cells; cells come out in (row, col) order.
HeatmapDocument build_heatmap(std::span<const TaggedMeasurement> points, std::string op,
                              std::int64_t generated_at = 0);

std::string to_geojson(const HeatmapDocument& doc);

/// Heatmap cells as navigation candidates.
std::vector<geo::TaggedPoint> candidate_points(const HeatmapDocument& doc);

} // namespace covmap

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "covmap/measurement.hpp"

namespace covmap::geo {

inline constexpr double kEarthRadiusM = 6'371'000.0;
inline constexpr double kDefaultSearchRadiusM = 100.0;
inline constexpr int kDefaultCandidateLimit = 3;
inline constexpr double kMaxRouteSpacingM = 10.0;
inline constexpr double kGridCellM = 10.0;

class DegenerateSegment : public std::invalid_argument
{
public:
    DegenerateSegment() : std::invalid_argument("bearing is undefined for coincident points") {}
};

/// Great-circle distance in meters.
double haversine_distance(const GeoPoint& a, const GeoPoint& b);

/// Forward azimuth from a to b in [0, 360). Throws DegenerateSegment when a == b.
double initial_bearing(const GeoPoint& a, const GeoPoint& b);

/// Point at `fraction` of the way along the great circle from a to b.
GeoPoint interpolate(const GeoPoint& a, const GeoPoint& b, double fraction);

/// Displace `origin` by (north_m, east_m) on a local tangent plane.
GeoPoint offset_m(const GeoPoint& origin, double north_m, double east_m);

struct TaggedPoint
{
    GeoPoint location;
    int strength_tag = 0;
    int sample_count = 1;
};

struct CandidateLocation
{
    GeoPoint location;
    int strength_tag = 0;
    double distance_m = 0.0;
    double bearing_deg = 0.0; // 0 when the candidate coincides with the user
    int source_measurement_count = 0;
};

/// Up to `limit` points with tag > user_tag within radius_m of the user, nearest first.
/// Equal distances order by higher tag, then lower lat, then lower lon.
std::vector<CandidateLocation> find_nearest_stronger(const GeoPoint& user, int user_tag,
                                                     std::span<const TaggedPoint> points,
                                                     double radius_m = kDefaultSearchRadiusM,
                                                     int limit = kDefaultCandidateLimit);

struct RoutePolyline
{
    std::vector<GeoPoint> waypoints;
    double total_distance_m = 0.0;
};

/// Great-circle polyline with spacing <= 10 m and exact endpoints. Coincident endpoints
/// give a single waypoint.
RoutePolyline straight_line_route(const GeoPoint& user, const GeoPoint& target);

/// Index of the ~10 m grid cell containing p. Rows are fixed-height latitude bands; the
/// column width uses the cosine of the row's central latitude.
struct GridCell
{
    std::int64_t row = 0;
    std::int64_t col = 0;

    friend auto operator<=>(const GridCell&, const GridCell&) = default;
};

GridCell grid_cell(const GeoPoint& p, double cell_m = kGridCellM);

} // namespace covmap::geo

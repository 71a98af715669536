#include "covmap/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace covmap::geo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr double kMetersPerDegree = kEarthRadiusM * kDegToRad;

} // namespace

double haversine_distance(const GeoPoint& a, const GeoPoint& b)
{
    const double phi1 = a.lat * kDegToRad;
    const double phi2 = b.lat * kDegToRad;
    const double dphi = (b.lat - a.lat) * kDegToRad;
    const double dlambda = (b.lon - a.lon) * kDegToRad;
    const double s1 = std::sin(dphi / 2.0);
    const double s2 = std::sin(dlambda / 2.0);
    const double h = std::clamp(s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2, 0.0, 1.0);
    return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
}

double initial_bearing(const GeoPoint& a, const GeoPoint& b)
{
    if (a == b) throw DegenerateSegment();
    const double phi1 = a.lat * kDegToRad;
    const double phi2 = b.lat * kDegToRad;
    const double dlambda = (b.lon - a.lon) * kDegToRad;
    const double y = std::sin(dlambda) * std::cos(phi2);
    const double x = std::cos(phi1) * std::sin(phi2) - std::sin(phi1) * std::cos(phi2) * std::cos(dlambda);
    double deg = std::atan2(y, x) * kRadToDeg;
    deg = std::fmod(deg + 360.0, 360.0);
    return deg >= 360.0 ? 0.0 : deg;
}

GeoPoint interpolate(const GeoPoint& a, const GeoPoint& b, double fraction)
{
    const double delta = haversine_distance(a, b) / kEarthRadiusM;
    if (delta == 0.0) return a;

    const double phi1 = a.lat * kDegToRad, lambda1 = a.lon * kDegToRad;
    const double phi2 = b.lat * kDegToRad, lambda2 = b.lon * kDegToRad;
    const double wa = std::sin((1.0 - fraction) * delta) / std::sin(delta);
    const double wb = std::sin(fraction * delta) / std::sin(delta);
    const double x = wa * std::cos(phi1) * std::cos(lambda1) + wb * std::cos(phi2) * std::cos(lambda2);
    const double y = wa * std::cos(phi1) * std::sin(lambda1) + wb * std::cos(phi2) * std::sin(lambda2);
    const double z = wa * std::sin(phi1) + wb * std::sin(phi2);
    return {std::atan2(z, std::hypot(x, y)) * kRadToDeg, std::atan2(y, x) * kRadToDeg};
}

GeoPoint offset_m(const GeoPoint& origin, double north_m, double east_m)
{
    const double lat = origin.lat + north_m / kMetersPerDegree;
    const double lon = origin.lon + east_m / (kMetersPerDegree * std::cos(origin.lat * kDegToRad));
    return {lat, lon};
}

std::vector<CandidateLocation> find_nearest_stronger(const GeoPoint& user, int user_tag,
                                                     std::span<const TaggedPoint> points,
                                                     double radius_m, int limit)
{
    std::vector<CandidateLocation> out;
    if (limit < 1 || !(radius_m > 0.0)) return out;

    for (const TaggedPoint& p : points) {
        if (p.strength_tag <= user_tag) continue;
        const double d = haversine_distance(user, p.location);
        if (d > radius_m) continue;
        out.push_back({p.location, p.strength_tag, d, 0.0, p.sample_count});
    }

    auto before = [](const CandidateLocation& a, const CandidateLocation& b) {
        if (a.distance_m != b.distance_m) return a.distance_m < b.distance_m;
        if (a.strength_tag != b.strength_tag) return a.strength_tag > b.strength_tag;
        if (a.location.lat != b.location.lat) return a.location.lat < b.location.lat;
        return a.location.lon < b.location.lon;
    };
    const auto keep = std::min(out.size(), static_cast<std::size_t>(limit));
    std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(keep), out.end(), before);
    out.resize(keep);

    for (CandidateLocation& c : out)
        c.bearing_deg = c.location == user ? 0.0 : initial_bearing(user, c.location);
    return out;
}

RoutePolyline straight_line_route(const GeoPoint& user, const GeoPoint& target)
{
    RoutePolyline route;
    route.total_distance_m = haversine_distance(user, target);
    if (route.total_distance_m == 0.0) {
        route.waypoints.push_back(user);
        return route;
    }
    const auto segments =
        static_cast<std::size_t>(std::max(1.0, std::ceil(route.total_distance_m / kMaxRouteSpacingM)));
    route.waypoints.reserve(segments + 1);
    route.waypoints.push_back(user);
    for (std::size_t i = 1; i < segments; ++i)
        route.waypoints.push_back(interpolate(user, target, static_cast<double>(i) / static_cast<double>(segments)));
    route.waypoints.push_back(target);
    return route;
}

GridCell grid_cell(const GeoPoint& p, double cell_m)
{
    const double row_height_deg = cell_m / kMetersPerDegree;
    const auto row = static_cast<std::int64_t>(std::floor(p.lat / row_height_deg));
    const double row_center = (static_cast<double>(row) + 0.5) * row_height_deg;
    const double col_width_deg =
        cell_m / (kMetersPerDegree * std::max(std::cos(row_center * kDegToRad), 1e-9));
    const auto col = static_cast<std::int64_t>(std::floor(p.lon / col_width_deg));
    return {row, col};
}

} // namespace covmap::geo

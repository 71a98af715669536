#pragma once

// Test-only reference computations. Each one re-derives its quantity along a different
// path from the library code it is used to check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <vector>

#include "covmap/clustering.hpp"
#include "covmap/geo.hpp"
#include "covmap/random.hpp"

namespace oracle {

using covmap::FeatureVector;
using covmap::GeoPoint;

inline double sq_dist(const FeatureVector& a, const FeatureVector& b)
{
    double s = 0.0;
    for (int d = 0; d < 3; ++d) s += std::pow(a[d] - b[d], 2);
    return s;
}

/// All K distances per point, argmin with the lowest index on ties.
inline std::vector<int> assign(const std::vector<FeatureVector>& x, const std::vector<FeatureVector>& mu)
{
    std::vector<int> out;
    for (const auto& p : x) {
        std::vector<double> d;
        for (const auto& c : mu) d.push_back(sq_dist(p, c));
        out.push_back(static_cast<int>(std::min_element(d.begin(), d.end()) - d.begin()));
    }
    return out;
}

/// Per-cluster means accumulated in long double, one cluster at a time.
inline std::vector<FeatureVector> means(const std::vector<FeatureVector>& x, const std::vector<int>& a, int k)
{
    std::vector<FeatureVector> out(static_cast<std::size_t>(k), FeatureVector{0, 0, 0});
    for (int c = 0; c < k; ++c) {
        long double s[3] = {0, 0, 0};
        long double n = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (a[i] != c) continue;
            for (int d = 0; d < 3; ++d) s[d] += x[i][d];
            n += 1;
        }
        if (n > 0)
            for (int d = 0; d < 3; ++d) out[static_cast<std::size_t>(c)][d] = static_cast<double>(s[d] / n);
    }
    return out;
}

/// J as the double loop over points and clusters with indicator weights.
inline double objective(const std::vector<FeatureVector>& x, const std::vector<int>& a,
                        const std::vector<FeatureVector>& mu)
{
    long double j = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t k = 0; k < mu.size(); ++k) {
            const int w = a[i] == static_cast<int>(k) ? 1 : 0;
            j += w * sq_dist(x[i], mu[k]);
        }
    return static_cast<double>(j);
}

/// Minimum J over every split of x into two non-empty groups.
inline double best_two_partition(const std::vector<FeatureVector>& x)
{
    const std::size_t n = x.size();
    double best = std::numeric_limits<double>::infinity();
    // Point 0 stays in group 0, which enumerates each unordered split once.
    for (std::uint32_t mask = 1; mask < (1u << (n - 1)); ++mask) {
        std::vector<int> a(n, 0);
        for (std::size_t i = 1; i < n; ++i) a[i] = (mask >> (i - 1)) & 1u;
        best = std::min(best, objective(x, a, means(x, a, 2)));
    }
    return best;
}

inline std::vector<FeatureVector> random_features(std::uint64_t seed, std::size_t n)
{
    covmap::Rng rng(seed);
    std::vector<FeatureVector> out(n);
    for (auto& f : out)
        for (auto& v : f) v = covmap::uniform01(rng);
    return out;
}

/// Spherical law of cosines in long double.
inline double slc_distance(const GeoPoint& a, const GeoPoint& b)
{
    const long double r = 6371000.0L;
    const long double k = std::numbers::pi_v<long double> / 180.0L;
    const long double p1 = a.lat * k, p2 = b.lat * k, dl = (b.lon - a.lon) * k;
    long double c = std::sin(p1) * std::sin(p2) + std::cos(p1) * std::cos(p2) * std::cos(dl);
    c = std::clamp(c, -1.0L, 1.0L);
    return static_cast<double>(r * std::acos(c));
}

/// Bearing from the north and east components of the unit vector toward b, projected
/// onto the tangent plane at a.
inline double bearing(const GeoPoint& a, const GeoPoint& b)
{
    const double k = std::numbers::pi / 180.0;
    auto unit = [k](const GeoPoint& p) {
        return std::array<double, 3>{std::cos(p.lat * k) * std::cos(p.lon * k),
                                     std::cos(p.lat * k) * std::sin(p.lon * k), std::sin(p.lat * k)};
    };
    const auto v = unit(b);
    const std::array<double, 3> east{-std::sin(a.lon * k), std::cos(a.lon * k), 0.0};
    const std::array<double, 3> north{-std::sin(a.lat * k) * std::cos(a.lon * k),
                                      -std::sin(a.lat * k) * std::sin(a.lon * k), std::cos(a.lat * k)};
    double e = 0, nn = 0;
    for (int i = 0; i < 3; ++i) {
        e += v[i] * east[i];
        nn += v[i] * north[i];
    }
    double deg = std::atan2(e, nn) / k;
    if (deg < 0) deg += 360.0;
    return deg >= 360.0 ? 0.0 : deg;
}

/// Filter by tag and radius over all points, full sort, truncate. Distances come from
/// the law-of-cosines oracle rather than the library's haversine.
inline std::vector<covmap::geo::CandidateLocation> nearest_stronger(const GeoPoint& user, int user_tag,
                                                                    const std::vector<covmap::geo::TaggedPoint>& pts,
                                                                    double radius, int limit)
{
    std::vector<covmap::geo::CandidateLocation> all;
    for (const auto& p : pts) {
        const double d = slc_distance(user, p.location);
        if (p.strength_tag > user_tag && d <= radius) all.push_back({p.location, p.strength_tag, d, 0.0, p.sample_count});
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        return std::make_tuple(a.distance_m, -a.strength_tag, a.location.lat, a.location.lon) <
               std::make_tuple(b.distance_m, -b.strength_tag, b.location.lat, b.location.lon);
    });
    if (all.size() > static_cast<std::size_t>(limit)) all.resize(static_cast<std::size_t>(limit));
    return all;
}

/// Adjusted Rand index from the pair-counting contingency table.
inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b)
{
    std::map<std::pair<int, int>, double> table;
    std::map<int, double> rows, cols;
    for (std::size_t i = 0; i < a.size(); ++i) {
        table[{a[i], b[i]}] += 1;
        rows[a[i]] += 1;
        cols[b[i]] += 1;
    }
    auto c2 = [](double n) { return n * (n - 1) / 2.0; };
    double sum_ij = 0, sum_a = 0, sum_b = 0;
    for (const auto& [k, v] : table) sum_ij += c2(v);
    for (const auto& [k, v] : rows) sum_a += c2(v);
    for (const auto& [k, v] : cols) sum_b += c2(v);
    const double expected = sum_a * sum_b / c2(static_cast<double>(a.size()));
    const double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) return 1.0;
    return (sum_ij - expected) / (max_index - expected);
}

/// Cell as (floor(lat / h), floor(lon / w(row))) with h = 10 m of latitude and w the
/// 10 m longitude span at the row's middle latitude.
inline std::pair<long long, long long> cell_of(const GeoPoint& p)
{
    const double m_per_deg = 6371000.0 * std::numbers::pi / 180.0;
    const double h = 10.0 / m_per_deg;
    const auto row = static_cast<long long>(std::floor(p.lat / h));
    const double mid = (row + 0.5) * h;
    const double w = 10.0 / (m_per_deg * std::cos(mid * std::numbers::pi / 180.0));
    return {row, static_cast<long long>(std::floor(p.lon / w))};
}

inline std::size_t count_cells(const std::vector<GeoPoint>& pts)
{
    std::set<std::pair<long long, long long>> cells;
    for (const auto& p : pts) cells.insert(cell_of(p));
    return cells.size();
}

} // namespace oracle

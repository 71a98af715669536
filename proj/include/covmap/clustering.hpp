#pragma once

// K-means over (lat, lon, rssi) features, fitted per operator.
//
// Fitting alternates an assignment pass (each point to its nearest centroid by squared
// Euclidean distance) and an update pass (each centroid to the mean of its members)
// until two consecutive assignment vectors are identical. Clusters are then ranked by
// the mean raw RSSI of their members to produce strength tags, 0 = weakest.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "covmap/measurement.hpp"

namespace covmap {

/// (lat_norm, lon_norm, rssi_norm), each in [0, 1].
using FeatureVector = std::array<double, 3>;

inline constexpr int kDefaultK = 5;
inline constexpr int kDefaultMaxIter = 300;

struct DimensionRange
{
    double min = 0.0;
    double max = 0.0;

    friend bool operator==(const DimensionRange&, const DimensionRange&) = default;
};

struct NormalizationParams
{
    DimensionRange lat;
    DimensionRange lon;
    DimensionRange rssi;

    friend bool operator==(const NormalizationParams&, const NormalizationParams&) = default;
};

struct RawPoint
{
    GeoPoint location;
    double rssi_dbm = 0.0;
};

struct NormalizedSet
{
    std::vector<FeatureVector> features;
    NormalizationParams params;
};

class ClusteringError : public std::runtime_error
{
public:
    enum class Code
    {
        EmptyDataset,
        TooFewDistinctPoints,
        InvalidArgument,
    };

    ClusteringError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Code code() const { return code_; }

private:
    Code code_;
};

/// Min-max scaling per dimension. A dimension with max == min maps to 0.5. When params
/// are supplied they are reused and out-of-range values are clamped to [0, 1].
NormalizedSet normalize(std::span<const RawPoint> points,
                        const std::optional<NormalizationParams>& params = std::nullopt);
FeatureVector normalize_one(const RawPoint& p, const NormalizationParams& params);

double squared_distance(const FeatureVector& a, const FeatureVector& b);
std::size_t count_distinct(std::span<const FeatureVector> features);

/// k distinct dataset members, taken in seeded shuffle order.
std::vector<FeatureVector> init_centroids(std::span<const FeatureVector> features, int k,
                                          std::uint64_t seed);

/// Nearest centroid per point; ties go to the lowest index.
std::vector<int> e_step(std::span<const FeatureVector> features,
                        std::span<const FeatureVector> centroids);

/// Member means. An empty cluster is reseeded onto the point farthest from its own
/// cluster's new centroid (distinct points for several empty clusters).
std::vector<FeatureVector> m_step(std::span<const FeatureVector> features,
                                  std::span<const int> assignments, int k);

double objective(std::span<const FeatureVector> features, std::span<const int> assignments,
                 std::span<const FeatureVector> centroids);

/// Mean squared member-to-centroid distance per cluster; 0 for an empty cluster.
std::vector<double> dispersion(std::span<const FeatureVector> features,
                               std::span<const int> assignments,
                               std::span<const FeatureVector> centroids, int k);

struct Cluster
{
    int id = 0;
    FeatureVector centroid{};
    int member_count = 0;
    double mean_rssi_dbm = 0.0;
    double dispersion = 0.0;
    int strength_tag = 0;
};

struct ClusterModel
{
    std::string op;
    int k = 0;
    std::vector<Cluster> clusters;
    std::vector<int> assignments;
    double objective_j = 0.0;
    int iterations = 0;
    bool converged = false;
    NormalizationParams norm;
    std::int64_t trained_at = 0;
    std::uint64_t rng_seed = 0;
    std::uint64_t generation = 0;

    std::vector<FeatureVector> centroids() const;
    const Cluster* find_cluster(int id) const;
};

struct FitOptions
{
    int k = kDefaultK;
    std::uint64_t seed = 0;
    int max_iter = kDefaultMaxIter;
    /// Called with (iteration, J) after every assignment pass, starting at iteration 0.
    std::function<void(int, double)> on_iteration;
};

/// Lloyd iterations from a seeded random start. mean_rssi_dbm comes from raw_rssi_dbm
/// when given (one per feature), otherwise from the normalized rssi coordinate.
/// Tags are assigned before returning.
ClusterModel fit(std::span<const FeatureVector> features, const FitOptions& options,
                 std::span<const double> raw_rssi_dbm = {});

/// Lowest-J model over `restarts` fits seeded seed, seed + 1, ...
ClusterModel fit_best_of(std::span<const FeatureVector> features, const FitOptions& options,
                         int restarts, std::span<const double> raw_rssi_dbm = {});

/// Ranks clusters by ascending mean_rssi_dbm (lower id first on ties) into strength_tag.
void assign_tags(ClusterModel& model);

struct Prediction
{
    int cluster = 0;
    int strength_tag = 0;
};

Prediction predict(const ClusterModel& model, const GeoPoint& location, double rssi_dbm);

/// normalize + fit + tag for one operator's raw points.
ClusterModel train(std::span<const RawPoint> points, std::string op, const FitOptions& options,
                   std::int64_t trained_at);

} // namespace covmap

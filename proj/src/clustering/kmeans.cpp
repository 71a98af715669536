#include "covmap/clustering.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "covmap/random.hpp"

namespace covmap {

namespace {

DimensionRange range_of(std::span<const RawPoint> points, double (*get)(const RawPoint&))
{
    DimensionRange r{get(points.front()), get(points.front())};
    for (const RawPoint& p : points) {
        r.min = std::min(r.min, get(p));
        r.max = std::max(r.max, get(p));
    }
    return r;
}

double scale(double v, const DimensionRange& r)
{
    if (!(r.max > r.min)) return 0.5;
    return std::clamp((v - r.min) / (r.max - r.min), 0.0, 1.0);
}

void check_k(int k)
{
    if (k < 1) throw ClusteringError(ClusteringError::Code::InvalidArgument, "k must be >= 1");
}

} // namespace

NormalizedSet normalize(std::span<const RawPoint> points,
                        const std::optional<NormalizationParams>& params)
{
    if (points.empty())
        throw ClusteringError(ClusteringError::Code::EmptyDataset, "cannot normalize an empty dataset");

    NormalizedSet out;
    if (params) {
        out.params = *params;
    } else {
        out.params.lat = range_of(points, [](const RawPoint& p) { return p.location.lat; });
        out.params.lon = range_of(points, [](const RawPoint& p) { return p.location.lon; });
        out.params.rssi = range_of(points, [](const RawPoint& p) { return p.rssi_dbm; });
    }
    out.features.reserve(points.size());
    for (const RawPoint& p : points) out.features.push_back(normalize_one(p, out.params));
    return out;
}

FeatureVector normalize_one(const RawPoint& p, const NormalizationParams& params)
{
    return {scale(p.location.lat, params.lat), scale(p.location.lon, params.lon),
            scale(p.rssi_dbm, params.rssi)};
}

double squared_distance(const FeatureVector& a, const FeatureVector& b)
{
    const double d0 = a[0] - b[0];
    const double d1 = a[1] - b[1];
    const double d2 = a[2] - b[2];
    return d0 * d0 + d1 * d1 + d2 * d2;
}

std::size_t count_distinct(std::span<const FeatureVector> features)
{
    std::vector<FeatureVector> sorted(features.begin(), features.end());
    std::sort(sorted.begin(), sorted.end());
    return static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
}

std::vector<FeatureVector> init_centroids(std::span<const FeatureVector> features, int k,
                                          std::uint64_t seed)
{
    check_k(k);
    std::vector<std::size_t> order(features.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    shuffle(order.begin(), order.end(), rng);

    std::vector<FeatureVector> centroids;
    centroids.reserve(static_cast<std::size_t>(k));
    for (std::size_t idx : order) {
        const FeatureVector& f = features[idx];
        if (std::find(centroids.begin(), centroids.end(), f) != centroids.end()) continue;
        centroids.push_back(f);
        if (centroids.size() == static_cast<std::size_t>(k)) return centroids;
    }
    throw ClusteringError(ClusteringError::Code::TooFewDistinctPoints,
                          "need at least " + std::to_string(k) + " distinct points, have " +
                              std::to_string(centroids.size()));
}

std::vector<int> e_step(std::span<const FeatureVector> features,
                        std::span<const FeatureVector> centroids)
{
    std::vector<int> assignments(features.size(), 0);
    for (std::size_t i = 0; i < features.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        int best_j = 0;
        for (std::size_t j = 0; j < centroids.size(); ++j) {
            const double d = squared_distance(features[i], centroids[j]);
            if (d < best) {
                best = d;
                best_j = static_cast<int>(j);
            }
        }
        assignments[i] = best_j;
    }
    return assignments;
}

std::vector<FeatureVector> m_step(std::span<const FeatureVector> features,
                                  std::span<const int> assignments, int k)
{
    check_k(k);
    std::vector<FeatureVector> sums(static_cast<std::size_t>(k), FeatureVector{0.0, 0.0, 0.0});
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < features.size(); ++i) {
        const auto c = static_cast<std::size_t>(assignments[i]);
        for (std::size_t d = 0; d < 3; ++d) sums[c][d] += features[i][d];
        ++counts[c];
    }

    std::vector<FeatureVector> centroids(static_cast<std::size_t>(k), FeatureVector{0.0, 0.0, 0.0});
    bool any_empty = false;
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        if (counts[c] == 0) {
            any_empty = true;
            continue;
        }
        for (std::size_t d = 0; d < 3; ++d) centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
    }
    if (!any_empty || features.empty()) return centroids;

    std::vector<double> residual(features.size());
    for (std::size_t i = 0; i < features.size(); ++i)
        residual[i] = squared_distance(features[i], centroids[static_cast<std::size_t>(assignments[i])]);

    std::vector<bool> used(features.size(), false);
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        if (counts[c] != 0) continue;
        std::size_t pick = features.size();
        for (std::size_t i = 0; i < features.size(); ++i) {
            if (used[i]) continue;
            if (pick == features.size() || residual[i] > residual[pick]) pick = i;
        }
        if (pick == features.size()) break; // more empty clusters than points
        used[pick] = true;
        centroids[c] = features[pick];
    }
    return centroids;
}

double objective(std::span<const FeatureVector> features, std::span<const int> assignments,
                 std::span<const FeatureVector> centroids)
{
    double j = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i)
        j += squared_distance(features[i], centroids[static_cast<std::size_t>(assignments[i])]);
    return j;
}

std::vector<double> dispersion(std::span<const FeatureVector> features,
                               std::span<const int> assignments,
                               std::span<const FeatureVector> centroids, int k)
{
    std::vector<double> total(static_cast<std::size_t>(k), 0.0);
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < features.size(); ++i) {
        const auto c = static_cast<std::size_t>(assignments[i]);
        total[c] += squared_distance(features[i], centroids[c]);
        ++counts[c];
    }
    for (std::size_t c = 0; c < total.size(); ++c)
        total[c] = counts[c] ? total[c] / static_cast<double>(counts[c]) : 0.0;
    return total;
}

std::vector<FeatureVector> ClusterModel::centroids() const
{
    std::vector<FeatureVector> out;
    out.reserve(clusters.size());
    for (const Cluster& c : clusters) out.push_back(c.centroid);
    return out;
}

const Cluster* ClusterModel::find_cluster(int id) const
{
    if (id < 0 || static_cast<std::size_t>(id) >= clusters.size()) return nullptr;
    return &clusters[static_cast<std::size_t>(id)];
}

ClusterModel fit(std::span<const FeatureVector> features, const FitOptions& options,
                 std::span<const double> raw_rssi_dbm)
{
    check_k(options.k);
    if (options.max_iter < 1)
        throw ClusteringError(ClusteringError::Code::InvalidArgument, "max_iter must be >= 1");
    if (features.empty())
        throw ClusteringError(ClusteringError::Code::EmptyDataset, "cannot fit an empty dataset");
    if (!raw_rssi_dbm.empty() && raw_rssi_dbm.size() != features.size())
        throw ClusteringError(ClusteringError::Code::InvalidArgument, "raw rssi length mismatch");
    if (count_distinct(features) < static_cast<std::size_t>(options.k))
        throw ClusteringError(ClusteringError::Code::TooFewDistinctPoints,
                              "fewer distinct feature vectors than clusters");

    const int k = options.k;
    std::vector<FeatureVector> centroids = init_centroids(features, k, options.seed);
    std::vector<int> assignments = e_step(features, centroids);
    if (options.on_iteration) options.on_iteration(0, objective(features, assignments, centroids));

    ClusterModel model;
    for (int iter = 1; iter <= options.max_iter; ++iter) {
        centroids = m_step(features, assignments, k);
        std::vector<int> next = e_step(features, centroids);
        if (options.on_iteration) options.on_iteration(iter, objective(features, next, centroids));
        model.iterations = iter;
        const bool unchanged = next == assignments;
        assignments = std::move(next);
        if (unchanged) {
            model.converged = true;
            break;
        }
    }

    model.k = k;
    model.rng_seed = options.seed;
    model.objective_j = objective(features, assignments, centroids);
    const std::vector<double> disp = dispersion(features, assignments, centroids, k);

    std::vector<double> rssi_sum(static_cast<std::size_t>(k), 0.0);
    model.clusters.resize(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < features.size(); ++i) {
        const auto c = static_cast<std::size_t>(assignments[i]);
        ++model.clusters[c].member_count;
        rssi_sum[c] += raw_rssi_dbm.empty() ? features[i][2] : raw_rssi_dbm[i];
    }
    for (std::size_t c = 0; c < model.clusters.size(); ++c) {
        Cluster& cl = model.clusters[c];
        cl.id = static_cast<int>(c);
        cl.centroid = centroids[c];
        cl.dispersion = disp[c];
        cl.mean_rssi_dbm = cl.member_count ? rssi_sum[c] / cl.member_count : 0.0;
    }
    model.assignments = std::move(assignments);
    assign_tags(model);
    return model;
}

ClusterModel fit_best_of(std::span<const FeatureVector> features, const FitOptions& options,
                         int restarts, std::span<const double> raw_rssi_dbm)
{
    if (restarts < 1)
        throw ClusteringError(ClusteringError::Code::InvalidArgument, "restarts must be >= 1");
    std::optional<ClusterModel> best;
    for (int r = 0; r < restarts; ++r) {
        FitOptions opt = options;
        opt.seed = options.seed + static_cast<std::uint64_t>(r);
        ClusterModel m = fit(features, opt, raw_rssi_dbm);
        if (!best || m.objective_j < best->objective_j) best = std::move(m);
    }
    return std::move(*best);
}

void assign_tags(ClusterModel& model)
{
    std::vector<std::size_t> order(model.clusters.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return model.clusters[a].mean_rssi_dbm < model.clusters[b].mean_rssi_dbm;
    });
    for (std::size_t rank = 0; rank < order.size(); ++rank)
        model.clusters[order[rank]].strength_tag = static_cast<int>(rank);
}

Prediction predict(const ClusterModel& model, const GeoPoint& location, double rssi_dbm)
{
    const FeatureVector f = normalize_one(RawPoint{location, rssi_dbm}, model.norm);
    double best = std::numeric_limits<double>::infinity();
    Prediction p;
    for (const Cluster& c : model.clusters) {
        const double d = squared_distance(f, c.centroid);
        if (d < best) {
            best = d;
            p.cluster = c.id;
            p.strength_tag = c.strength_tag;
        }
    }
    return p;
}

ClusterModel train(std::span<const RawPoint> points, std::string op, const FitOptions& options,
                   std::int64_t trained_at)
{
    NormalizedSet set = normalize(points);
    std::vector<double> rssi;
    rssi.reserve(points.size());
    for (const RawPoint& p : points) rssi.push_back(p.rssi_dbm);

    ClusterModel model = fit(set.features, options, rssi);
    model.op = std::move(op);
    model.norm = set.params;
    model.trained_at = trained_at;
    return model;
}

} // namespace covmap

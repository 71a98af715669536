#include "doctest.h"

#include <filesystem>
#include <set>

#include "covmap/clustering.hpp"
#include "covmap/model_io.hpp"
#include "covmap/random.hpp"
#include "oracles.hpp"

using namespace covmap;

namespace {

std::vector<RawPoint> random_raw(std::uint64_t seed, std::size_t n)
{
    Rng rng(seed);
    std::vector<RawPoint> out(n);
    for (auto& p : out) {
        p.location = {12.97 + 0.01 * uniform01(rng), 77.59 + 0.01 * uniform01(rng)};
        p.rssi_dbm = static_cast<double>(static_cast<int>(-120 + 80 * uniform01(rng)));
    }
    return out;
}

ClusterModel fitted(std::uint64_t seed, std::size_t n, int k = 5)
{
    FitOptions opt;
    opt.k = k;
    opt.seed = seed;
    return train(random_raw(seed, n), "op", opt, 0);
}

} // namespace

TEST_CASE("normalize examples")
{
    std::vector<RawPoint> one{{{3.0, 4.0}, -70}};
    CHECK(normalize(one).features[0] == FeatureVector{0.5, 0.5, 0.5});

    std::vector<RawPoint> pts{{{0, 0}, -100}, {{1, 1}, -50}, {{0.5, 0.5}, -75}};
    auto n = normalize(pts);
    CHECK(n.features[0] == FeatureVector{0, 0, 0});
    CHECK(n.features[1] == FeatureVector{1, 1, 1});
    CHECK(n.features[2] == FeatureVector{0.5, 0.5, 0.5});
    CHECK(n.params.rssi == DimensionRange{-100, -50});

    SUBCASE("reused params clamp out-of-range values")
    {
        std::vector<RawPoint> probe{{{2, -1}, -75}};
        CHECK(normalize(probe, n.params).features[0] == FeatureVector{1, 0, 0.5});
    }
    SUBCASE("degenerate dimension maps to one half")
    {
        std::vector<RawPoint> flat{{{5, 1}, -80}, {{5, 2}, -80}};
        auto f = normalize(flat).features;
        CHECK(f[0] == FeatureVector{0.5, 0, 0.5});
        CHECK(f[1] == FeatureVector{0.5, 1, 0.5});
    }
    CHECK_THROWS_AS(normalize(std::span<const RawPoint>{}), ClusteringError);
}

TEST_CASE("init_centroids")
{
    const auto x = oracle::random_features(11, 8);
    auto c = init_centroids(x, 8, 42);
    std::multiset<FeatureVector> a(x.begin(), x.end()), b(c.begin(), c.end());
    CHECK(a == b);
    CHECK(init_centroids(x, 8, 42) == c);
    CHECK(init_centroids(x, 3, 42) != init_centroids(x, 3, 43));

    SUBCASE("duplicates are skipped and too few distinct points fail")
    {
        std::vector<FeatureVector> dup{{0, 0, 0}, {0, 0, 0}, {1, 1, 1}, {0, 0, 0}};
        auto two = init_centroids(dup, 2, 1);
        CHECK(two[0] != two[1]);
        try {
            init_centroids(dup, 3, 1);
            FAIL("expected TooFewDistinctPoints");
        } catch (const ClusteringError& e) {
            CHECK(e.code() == ClusteringError::Code::TooFewDistinctPoints);
        }
    }
}

TEST_CASE("e_step examples")
{
    std::vector<FeatureVector> mu{{0, 0, 0}, {1, 0, 0}, {0.3, 0.3, 0.3}};
    std::vector<FeatureVector> x{{0.3, 0.3, 0.3}};
    CHECK(e_step(x, mu)[0] == 2);

    std::vector<FeatureVector> tie_mu{{0, 0, 0}, {1, 0, 0}};
    std::vector<FeatureVector> mid{{0.5, 0.2, 0.1}};
    CHECK(e_step(mid, tie_mu)[0] == 0);

    const auto pts = oracle::random_features(5, 50);
    const auto cents = oracle::random_features(6, 5);
    CHECK(e_step(pts, cents) == oracle::assign(pts, cents));
}

TEST_CASE("m_step examples")
{
    std::vector<FeatureVector> same{{0.2, 0.4, 0.6}, {0.2, 0.4, 0.6}};
    std::vector<int> zero{0, 0};
    CHECK(m_step(same, zero, 1)[0] == FeatureVector{0.2, 0.4, 0.6});

    std::vector<FeatureVector> two{{0, 0, 0}, {1, 1, 1}};
    CHECK(m_step(two, zero, 1)[0] == FeatureVector{0.5, 0.5, 0.5});

    const auto pts = oracle::random_features(8, 50);
    const auto a = oracle::assign(pts, oracle::random_features(9, 4));
    const auto got = m_step(pts, a, 4);
    const auto want = oracle::means(pts, a, 4);
    for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 3; ++d) CHECK(got[c][d] == doctest::Approx(want[c][d]).epsilon(1e-12));
}

TEST_CASE("m_step reseeds an empty cluster onto the farthest point")
{
    std::vector<FeatureVector> x{{0, 0, 0}, {0.1, 0, 0}, {1, 0, 0}, {0.9, 0.9, 0.9}};
    std::vector<int> a{0, 0, 0, 0};
    // Cluster 0's mean is (0.5, 0.225, 0.225): (0.9, 0.9, 0.9) is farthest, then
    // (0, 0, 0) and (1, 0, 0) tie and the lower index wins.
    auto c = m_step(x, a, 3);
    CHECK(c[1] == FeatureVector{0.9, 0.9, 0.9});
    CHECK(c[2] == FeatureVector{0, 0, 0});
}

TEST_CASE("objective and dispersion examples")
{
    std::vector<FeatureVector> x{{0, 0, 0}, {1, 1, 1}};
    std::vector<int> a{0, 0};
    std::vector<FeatureVector> mu{{0.5, 0.5, 0.5}};
    CHECK(objective(x, a, mu) == doctest::Approx(1.5));
    CHECK(dispersion(x, a, mu, 1)[0] == doctest::Approx(0.75));

    std::vector<FeatureVector> at_centroid{{0.2, 0.2, 0.2}};
    std::vector<int> z{0};
    CHECK(objective(at_centroid, z, at_centroid) == 0.0);
    CHECK(dispersion(at_centroid, z, at_centroid, 1)[0] == 0.0);
}

TEST_CASE("fit examples")
{
    SUBCASE("k = 1 is the global mean")
    {
        const auto x = oracle::random_features(21, 40);
        FitOptions opt;
        opt.k = 1;
        auto m = fit(x, opt);
        CHECK(m.iterations <= 2);
        CHECK(m.converged);
        const auto mean = oracle::means(x, std::vector<int>(x.size(), 0), 1)[0];
        for (int d = 0; d < 3; ++d) CHECK(m.clusters[0].centroid[d] == doctest::Approx(mean[d]).epsilon(1e-12));
    }
    SUBCASE("separated blobs partition exactly")
    {
        Rng rng(4);
        std::vector<FeatureVector> x;
        for (int i = 0; i < 60; ++i) {
            const double base = i < 30 ? 0.05 : 0.85;
            x.push_back({base + 0.1 * uniform01(rng), base + 0.1 * uniform01(rng), base + 0.1 * uniform01(rng)});
        }
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            FitOptions opt;
            opt.k = 2;
            opt.seed = seed;
            auto m = fit(x, opt);
            for (int i = 1; i < 30; ++i) CHECK(m.assignments[i] == m.assignments[0]);
            for (int i = 31; i < 60; ++i) CHECK(m.assignments[i] == m.assignments[30]);
            CHECK(m.assignments[0] != m.assignments[30]);
        }
    }
    SUBCASE("never beats the exhaustive two-partition optimum")
    {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto x = oracle::random_features(100 + seed, 4 + seed % 9);
            FitOptions opt;
            opt.k = 2;
            opt.seed = seed;
            CHECK(fit(x, opt).objective_j >= oracle::best_two_partition(x) - 1e-9);
        }
    }
    SUBCASE("too few distinct points")
    {
        std::vector<FeatureVector> x(10, FeatureVector{0.1, 0.2, 0.3});
        x.push_back({0.4, 0.5, 0.6});
        FitOptions opt;
        opt.k = 3;
        CHECK_THROWS_AS(fit(x, opt), ClusteringError);
    }
}

TEST_CASE("fit invariants on random data")
{
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const auto x = oracle::random_features(seed, 150 + 10 * seed);
        FitOptions opt;
        opt.seed = seed;
        std::vector<double> trace;
        opt.on_iteration = [&](int, double j) { trace.push_back(j); };
        const ClusterModel m = fit(x, opt);
        const auto mu = m.centroids();

        for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-9);

        CHECK(m.objective_j == doctest::Approx(oracle::objective(x, m.assignments, mu)).epsilon(1e-9));
        double weighted = 0;
        for (const auto& c : m.clusters) {
            CHECK(c.member_count >= 1);
            weighted += c.member_count * c.dispersion;
        }
        CHECK(weighted == doctest::Approx(m.objective_j).epsilon(1e-9));

        // No single reassignment lowers J.
        CHECK(m.assignments == oracle::assign(x, mu));
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double own = oracle::sq_dist(x[i], mu[m.assignments[i]]);
            for (const auto& c : mu) CHECK(oracle::sq_dist(x[i], c) >= own);
        }
        // No centroid nudge lowers J.
        for (std::size_t c = 0; c < mu.size(); ++c)
            for (int d = 0; d < 3; ++d)
                for (double delta : {-1e-3, 1e-3}) {
                    auto moved = mu;
                    moved[c][d] += delta;
                    CHECK(oracle::objective(x, m.assignments, moved) >= m.objective_j);
                }

        const ClusterModel again = fit(x, opt);
        CHECK(again.assignments == m.assignments);
        CHECK(again.objective_j == m.objective_j);
        for (std::size_t c = 0; c < m.clusters.size(); ++c) CHECK(again.clusters[c].strength_tag == m.clusters[c].strength_tag);
    }
}

TEST_CASE("assign_tags")
{
    ClusterModel m;
    m.k = 5;
    const double means[5] = {-70, -90, -60, -110, -80};
    for (int i = 0; i < 5; ++i) m.clusters.push_back({i, {}, 1, means[i], 0, 0});
    assign_tags(m);
    const int want[5] = {3, 1, 4, 0, 2};
    for (int i = 0; i < 5; ++i) CHECK(m.clusters[i].strength_tag == want[i]);

    for (auto& c : m.clusters) c.mean_rssi_dbm = -85;
    assign_tags(m);
    for (int i = 0; i < 5; ++i) CHECK(m.clusters[i].strength_tag == i);

    ClusterModel trained = fitted(3, 400);
    std::set<int> tags;
    for (const auto& c : trained.clusters) tags.insert(c.strength_tag);
    CHECK(tags == std::set<int>{0, 1, 2, 3, 4});
}

TEST_CASE("mean rssi uses raw dBm")
{
    const auto raw = random_raw(17, 300);
    const ClusterModel m = train(raw, "op", {}, 0);
    for (const auto& c : m.clusters) {
        double s = 0;
        int n = 0;
        for (std::size_t i = 0; i < raw.size(); ++i)
            if (m.assignments[i] == c.id) {
                s += raw[i].rssi_dbm;
                ++n;
            }
        CHECK(c.mean_rssi_dbm == doctest::Approx(s / n));
    }
}

TEST_CASE("predict")
{
    const auto raw = random_raw(23, 300);
    FitOptions opt;
    opt.seed = 23;
    const ClusterModel m = train(raw, "op", opt, 0);
    REQUIRE(m.converged);
    for (std::size_t i = 0; i < raw.size(); ++i)
        CHECK(predict(m, raw[i].location, raw[i].rssi_dbm).cluster == m.assignments[i]);

    const auto far = predict(m, {-45, 10}, -139);
    CHECK(far.cluster >= 0);
    CHECK(far.cluster < m.k);

    Rng rng(99);
    const auto mu = m.centroids();
    for (int i = 0; i < 100; ++i) {
        const RawPoint probe{{12.96 + 0.012 * uniform01(rng), 77.58 + 0.012 * uniform01(rng)}, -130 + 100 * uniform01(rng)};
        const int want = oracle::assign({normalize_one(probe, m.norm)}, mu)[0];
        const auto got = predict(m, probe.location, probe.rssi_dbm);
        CHECK(got.cluster == want);
        CHECK(got.strength_tag == m.clusters[want].strength_tag);
    }
}

TEST_CASE("fit_best_of picks the lowest objective")
{
    const auto x = oracle::random_features(31, 200);
    FitOptions opt;
    opt.seed = 10;
    const ClusterModel best = fit_best_of(x, opt, 5);
    for (int r = 0; r < 5; ++r) {
        FitOptions o = opt;
        o.seed = 10 + r;
        CHECK(best.objective_j <= fit(x, o).objective_j);
    }
}

TEST_CASE("model persistence")
{
    ClusterModel m = fitted(5, 200);
    m.op = "Carrier A/1";
    m.generation = 7;
    m.trained_at = 1234;

    CHECK(model_file_name(m.op) == "Carrier%20A%2F1.json");
    CHECK(model_file_name("Jio_4G-x") == "Jio_4G-x.json");

    const auto dir = std::filesystem::temp_directory_path() / "covmap_model_io_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const auto path = dir / model_file_name(m.op);
    save_model_atomic(path, m);
    save_model_atomic(path, m);
    CHECK(std::distance(std::filesystem::directory_iterator(dir), {}) == 1);

    const ClusterModel back = load_model(path);
    CHECK(back.op == m.op);
    CHECK(back.generation == 7);
    CHECK(back.assignments == m.assignments);
    CHECK(back.norm == m.norm);
    CHECK(back.objective_j == m.objective_j);
    for (std::size_t c = 0; c < m.clusters.size(); ++c) {
        CHECK(back.clusters[c].centroid == m.clusters[c].centroid);
        CHECK(back.clusters[c].strength_tag == m.clusters[c].strength_tag);
    }
    std::filesystem::remove_all(dir);
}

#include "doctest.h"

#include <set>

#include "covmap/heatmap.hpp"
#include "covmap/simulator.hpp"
#include "oracles.hpp"

using namespace covmap;

namespace {

sim::Scenario city()
{
    sim::Scenario s;
    s.box = {{12.9700, 77.5900}, {12.9760, 77.5970}};
    s.towers = {{{12.9710, 77.5910}, 43, "A"}, {{12.9750, 77.5960}, 43, "A"}};
    s.ue_count = 50;
    s.duration_s = 190;
    s.rng_seed = 4;
    return s;
}

} // namespace

TEST_CASE("empty heatmap")
{
    const auto doc = build_heatmap({}, "A", 5);
    CHECK(doc.points.empty());
    CHECK(to_geojson(doc) == R"({"type":"FeatureCollection","features":[]})");
}

TEST_CASE("one cell keeps the highest tag")
{
    const GeoPoint p{12.97, 77.59};
    const GeoPoint q = geo::offset_m(p, 0.5, 0.5);
    REQUIRE(geo::grid_cell(p) == geo::grid_cell(q));
    std::vector<TaggedMeasurement> pts{{p, 1, -100}, {q, 4, -60}};
    const auto doc = build_heatmap(pts, "A");
    REQUIRE(doc.points.size() == 1);
    CHECK(doc.points[0].strength_tag == 4);
    CHECK(doc.points[0].sample_count == 2);
    CHECK(doc.points[0].mean_rssi_dbm == doctest::Approx(-80));
    CHECK(doc.points[0].location == q);
}

TEST_CASE("tag colors")
{
    CHECK(tag_color(0) == "#d73027");
    CHECK(tag_color(1) == "#fc8d59");
    CHECK(tag_color(2) == "#fee08b");
    CHECK(tag_color(3) == "#91cf60");
    CHECK(tag_color(4) == "#1a9850");
    CHECK(tag_color(9) == "#1a9850");

    HeatmapDocument doc;
    doc.points.push_back({{1, 2}, 4, -70, 3});
    const auto j = nlohmann::json::parse(to_geojson(doc));
    CHECK(j["features"][0]["properties"]["color"] == "#1a9850");
    CHECK(j["features"][0]["geometry"]["coordinates"] == nlohmann::json::array({2.0, 1.0}));
}

TEST_CASE("simulator field: cell count, ordering, parse-back")
{
    const auto s = city();
    std::vector<TaggedMeasurement> pts;
    std::vector<GeoPoint> locs;
    sim::run_scenario(s, [&](const Measurement& m) {
        if (pts.size() >= 1000) return;
        pts.push_back({m.location, static_cast<int>(pts.size() % 5), static_cast<double>(m.rssi_dbm)});
        locs.push_back(m.location);
    });
    REQUIRE(pts.size() == 1000);

    const auto doc = build_heatmap(pts, "A", 77);
    CHECK(doc.points.size() == oracle::count_cells(locs));
    int total = 0;
    for (const auto& p : doc.points) total += p.sample_count;
    CHECK(total == 1000);
    for (std::size_t i = 1; i < doc.points.size(); ++i)
        CHECK(geo::grid_cell(doc.points[i - 1].location) < geo::grid_cell(doc.points[i].location));

    const std::string text = to_geojson(doc);
    CHECK(text == to_geojson(build_heatmap(pts, "A", 77)));

    const auto j = nlohmann::json::parse(text);
    CHECK(j["type"] == "FeatureCollection");
    REQUIRE(j["features"].size() == doc.points.size());
    std::set<std::tuple<double, double, int, int>> emitted, expected;
    for (const auto& f : j["features"]) {
        const auto& c = f["geometry"]["coordinates"];
        const int tag = f["properties"]["strength_tag"].get<int>();
        emitted.insert({c[1].get<double>(), c[0].get<double>(), tag, f["properties"]["sample_count"].get<int>()});
        CHECK(f["properties"]["color"] == std::string(tag_color(tag)));
    }
    for (const auto& p : doc.points) expected.insert({p.location.lat, p.location.lon, p.strength_tag, p.sample_count});
    CHECK(emitted == expected);
}

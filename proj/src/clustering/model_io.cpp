#include "covmap/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace covmap {

using nlohmann::json;

namespace {

json range_json(const DimensionRange& r)
{
    return json{{"min", r.min}, {"max", r.max}};
}

DimensionRange range_from(const json& j)
{
    return {j.at("min").get<double>(), j.at("max").get<double>()};
}

} // namespace

json model_to_json(const ClusterModel& model)
{
    json clusters = json::array();
    for (const Cluster& c : model.clusters) {
        clusters.push_back({{"id", c.id},
                            {"centroid", c.centroid},
                            {"member_count", c.member_count},
                            {"mean_rssi_dbm", c.mean_rssi_dbm},
                            {"dispersion", c.dispersion},
                            {"strength_tag", c.strength_tag}});
    }
    return json{{"operator", model.op},
                {"k", model.k},
                {"generation", model.generation},
                {"trained_at", model.trained_at},
                {"rng_seed", model.rng_seed},
                {"objective_j", model.objective_j},
                {"iterations", model.iterations},
                {"converged", model.converged},
                {"sample_count", model.assignments.size()},
                {"norm",
                 {{"lat", range_json(model.norm.lat)},
                  {"lon", range_json(model.norm.lon)},
                  {"rssi", range_json(model.norm.rssi)}}},
                {"clusters", std::move(clusters)},
                {"assignments", model.assignments}};
}

ClusterModel model_from_json(const json& j)
{
    try {
        ClusterModel m;
        m.op = j.at("operator").get<std::string>();
        m.k = j.at("k").get<int>();
        m.generation = j.value("generation", std::uint64_t{0});
        m.trained_at = j.at("trained_at").get<std::int64_t>();
        m.rng_seed = j.at("rng_seed").get<std::uint64_t>();
        m.objective_j = j.at("objective_j").get<double>();
        m.iterations = j.at("iterations").get<int>();
        m.converged = j.value("converged", false);
        const json& norm = j.at("norm");
        m.norm.lat = range_from(norm.at("lat"));
        m.norm.lon = range_from(norm.at("lon"));
        m.norm.rssi = range_from(norm.at("rssi"));
        for (const json& cj : j.at("clusters")) {
            Cluster c;
            c.id = cj.at("id").get<int>();
            c.centroid = cj.at("centroid").get<FeatureVector>();
            c.member_count = cj.at("member_count").get<int>();
            c.mean_rssi_dbm = cj.at("mean_rssi_dbm").get<double>();
            c.dispersion = cj.at("dispersion").get<double>();
            c.strength_tag = cj.at("strength_tag").get<int>();
            m.clusters.push_back(c);
        }
        m.assignments = j.at("assignments").get<std::vector<int>>();
        if (static_cast<int>(m.clusters.size()) != m.k)
            throw ModelIoError("cluster count does not match k");
        for (std::size_t i = 0; i < m.clusters.size(); ++i)
            if (m.clusters[i].id != static_cast<int>(i)) throw ModelIoError("cluster ids out of order");
        return m;
    } catch (const json::exception& e) {
        throw ModelIoError(std::string("bad model document: ") + e.what());
    }
}

std::string model_file_name(const std::string& op)
{
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : op) {
        const bool plain = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                           c == '_' || c == '-';
        if (plain) {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 0xF];
        }
    }
    return out + ".json";
}

void save_model_atomic(const std::filesystem::path& path, const ClusterModel& model)
{
    const std::string text = model_to_json(model).dump(1) + "\n";
    std::filesystem::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());

    std::FILE* f = std::fopen(tmp.c_str(), "wb");
    if (!f) throw ModelIoError("cannot open " + tmp.string());
    const bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size() && std::fflush(f) == 0 &&
                    ::fsync(::fileno(f)) == 0;
    std::fclose(f);
    if (!ok) {
        std::filesystem::remove(tmp);
        throw ModelIoError("short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw ModelIoError("rename to " + path.string() + " failed: " + ec.message());
    }
}

ClusterModel load_model(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ModelIoError("cannot open " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ModelIoError("unparseable model file " + path.string());
    return model_from_json(j);
}

} // namespace covmap

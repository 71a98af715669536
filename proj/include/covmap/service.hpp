#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "covmap/clustering.hpp"
#include "covmap/config.hpp"
#include "covmap/geo.hpp"
#include "covmap/heatmap.hpp"
#include "covmap/measurement.hpp"
#include "covmap/store.hpp"

namespace httplib {
class Server;
}

namespace covmap {

/// Everything a reader needs for one operator, built from one model and never mutated.
struct OperatorSnapshot
{
    ClusterModel model;
    HeatmapDocument heatmap;
    std::vector<geo::TaggedPoint> candidates;
    std::string geojson;
};

/// Builds the tagged point index for `model` by predicting every stored point.
std::shared_ptr<const OperatorSnapshot> make_snapshot(ClusterModel model,
                                                      std::span<const RawPoint> points);

// operator -> latest snapshot. Publishing swaps a pointer; readers hold their own
// reference, so a reader never sees a half-built model and never blocks a fit.
class ModelRegistry
{
public:
    std::shared_ptr<const OperatorSnapshot> get(const std::string& op) const;
    std::vector<std::shared_ptr<const OperatorSnapshot>> all() const;
    void publish(std::shared_ptr<const OperatorSnapshot> snapshot);

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<const OperatorSnapshot>> models_;
};

struct HttpResult
{
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
    std::vector<std::pair<std::string, std::string>> headers;
};

struct TickReport
{
    std::int64_t started_at = 0;
    std::vector<std::string> retrained;
    std::vector<std::string> skipped;
    std::vector<std::string> failed;
};

inline constexpr const char* kModelGenerationHeader = "X-Model-Generation";

/// Per-operator fit seed: the configured seed mixed with a stable hash of the name.
std::uint64_t operator_seed(std::uint64_t config_seed, const std::string& op);

class Service
{
public:
    using Clock = std::function<std::int64_t()>;
    using PublishHook = std::function<void(const ClusterModel&, const std::filesystem::path&)>;

    explicit Service(ServiceConfig config, Clock clock = {});

    /// Replays the store into memory and loads persisted models. Call once before serving.
    void open();

    HttpResult post_measurement(std::string_view body);
    HttpResult get_heatmap(const std::string& op) const;
    HttpResult get_nearest_strong(const std::string& op, double lat, double lon, double rssi_dbm) const;
    HttpResult get_operators() const;

    /// Refits every operator with enough data. Ticks never overlap.
    TickReport recluster_tick();

    /// Runs after a model file is persisted and before the model becomes visible.
    void set_publish_hook(PublishHook hook);

    const ServiceConfig& config() const { return config_; }
    const ModelRegistry& registry() const { return registry_; }
    std::vector<RawPoint> points_for(const std::string& op) const;
    std::vector<std::string> operators_with_data() const;
    std::uint64_t retrain_count() const { return retrains_.load(); }
    std::size_t stored_count() const;

private:
    ServiceConfig config_;
    Clock clock_;
    ModelRegistry registry_;
    DedupWindow dedup_;
    std::unique_ptr<MeasurementStore> store_;

    mutable std::mutex ingest_mutex_;
    std::map<std::string, std::vector<RawPoint>> points_;
    std::size_t stored_ = 0;

    std::mutex tick_mutex_;
    std::atomic<std::uint64_t> next_generation_{1};
    std::atomic<std::uint64_t> retrains_{0};
    PublishHook publish_hook_;
};

// Runs `task` every interval on a background thread. The first run happens on start();
// a run that overruns the interval pushes the next one back instead of overlapping it.
class Scheduler
{
public:
    Scheduler(std::chrono::milliseconds interval, std::function<void()> task);
    ~Scheduler();

    Scheduler(const Scheduler&) = delete;
    Scheduler& operator=(const Scheduler&) = delete;

    void start();
    void stop();

private:
    void loop();

    std::chrono::milliseconds interval_;
    std::function<void()> task_;
    std::thread thread_;
    std::mutex mutex_;
    std::condition_variable cv_;
    bool stopping_ = false;
};

/// Registers the /v1 routes and permissive CORS headers on `server`.
void mount_routes(httplib::Server& server, Service& service);

} // namespace covmap

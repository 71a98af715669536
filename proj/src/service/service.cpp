#include "covmap/service.hpp"

#include <chrono>

#include <spdlog/spdlog.h>

#include "json.hpp"

#include "covmap/model_io.hpp"
#include "covmap/random.hpp"

namespace covmap {

using nlohmann::json;

std::shared_ptr<const OperatorSnapshot> make_snapshot(ClusterModel model,
                                                      std::span<const RawPoint> points)
{
    auto snap = std::make_shared<OperatorSnapshot>();
    std::vector<TaggedMeasurement> tagged;
    tagged.reserve(points.size());
    for (const RawPoint& p : points)
        tagged.push_back({p.location, predict(model, p.location, p.rssi_dbm).strength_tag, p.rssi_dbm});
    snap->heatmap = build_heatmap(tagged, model.op, model.trained_at);
    snap->candidates = candidate_points(snap->heatmap);
    snap->geojson = to_geojson(snap->heatmap);
    snap->model = std::move(model);
    return snap;
}

std::shared_ptr<const OperatorSnapshot> ModelRegistry::get(const std::string& op) const
{
    std::lock_guard lock(mutex_);
    auto it = models_.find(op);
    return it == models_.end() ? nullptr : it->second;
}

std::vector<std::shared_ptr<const OperatorSnapshot>> ModelRegistry::all() const
{
    std::lock_guard lock(mutex_);
    std::vector<std::shared_ptr<const OperatorSnapshot>> out;
    out.reserve(models_.size());
    for (const auto& [op, snap] : models_) out.push_back(snap);
    return out;
}

void ModelRegistry::publish(std::shared_ptr<const OperatorSnapshot> snapshot)
{
    const std::string op = snapshot->model.op;
    std::lock_guard lock(mutex_);
    models_[op] = std::move(snapshot);
}

std::uint64_t operator_seed(std::uint64_t config_seed, const std::string& op)
{
    return mix_seed(config_seed, stable_hash(op));
}

namespace {

std::int64_t system_seconds()
{
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

HttpResult json_result(int status, const json& body)
{
    return HttpResult{status, body.dump(), "application/json", {}};
}

HttpResult rejected(const Rejection& r)
{
    return json_result(400, {{"status", "rejected"}, {"reason", to_string(r.reason)}, {"detail", r.detail}});
}

HttpResult error(int status, std::string_view reason, std::string_view detail)
{
    return json_result(status, {{"error", reason}, {"detail", detail}});
}

} // namespace

Service::Service(ServiceConfig config, Clock clock)
    : config_(std::move(config)), clock_(clock ? std::move(clock) : Clock(system_seconds)),
      dedup_(config_.dedup_window_s)
{
    validate(config_);
}

void Service::open()
{
    std::filesystem::create_directories(config_.model_dir);

    LoadResult loaded = load_store(config_.data_file);
    if (loaded.skipped_lines)
        spdlog::warn("skipped {} malformed lines in {}", loaded.skipped_lines, config_.data_file.string());
    {
        std::lock_guard lock(ingest_mutex_);
        for (const Measurement& m : loaded.measurements) {
            dedup_.record(m);
            points_[m.op].push_back({m.location, static_cast<double>(m.rssi_dbm)});
        }
        stored_ = loaded.measurements.size();
    }
    store_ = std::make_unique<MeasurementStore>(config_.data_file);
    spdlog::info("replayed {} measurements from {}", loaded.measurements.size(), config_.data_file.string());

    std::uint64_t max_generation = 0;
    for (const auto& entry : std::filesystem::directory_iterator(config_.model_dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        try {
            ClusterModel model = load_model(entry.path());
            max_generation = std::max(max_generation, model.generation);
            const std::vector<RawPoint> pts = points_for(model.op);
            registry_.publish(make_snapshot(std::move(model), pts));
        } catch (const std::exception& e) {
            spdlog::warn("ignoring model file {}: {}", entry.path().string(), e.what());
        }
    }
    next_generation_ = max_generation + 1;
}

HttpResult Service::post_measurement(std::string_view body)
{
    json j = json::parse(body, nullptr, false);
    if (j.is_discarded())
        return rejected({RejectReason::MalformedRecord, "request body is not valid JSON"});

    auto parsed = parse_measurement(j);
    if (auto* r = std::get_if<Rejection>(&parsed)) return rejected(*r);
    auto valid = validate_measurement(std::get<Measurement>(std::move(parsed)),
                                      {clock_(), config_.max_clock_skew_s});
    if (auto* r = std::get_if<Rejection>(&valid)) return rejected(*r);
    const Measurement& m = std::get<Measurement>(valid);

    std::lock_guard lock(ingest_mutex_);
    if (!dedup_.would_admit(m)) {
        json out{{"status", "suppressed"}, {"reason", "DedupWindow"}};
        if (auto last = dedup_.last_admitted(m.device_id, m.op)) out["last_admitted_s"] = *last;
        return json_result(200, out);
    }
    try {
        store_->append(m);
    } catch (const StoreIoError& e) {
        spdlog::error("append failed: {}", e.what());
        return error(500, "IoFailure", e.what());
    }
    dedup_.record(m);
    points_[m.op].push_back({m.location, static_cast<double>(m.rssi_dbm)});
    ++stored_;
    return json_result(200, {{"status", "admitted"}});
}

HttpResult Service::get_heatmap(const std::string& op) const
{
    auto snap = registry_.get(op);
    if (!snap) return error(404, "UnknownOperatorOrUntrained", "no model for operator " + op);
    HttpResult r{200, snap->geojson, "application/geo+json", {}};
    r.headers.emplace_back(kModelGenerationHeader, std::to_string(snap->model.generation));
    return r;
}

HttpResult Service::get_nearest_strong(const std::string& op, double lat, double lon,
                                       double rssi_dbm) const
{
    const GeoPoint user{lat, lon};
    if (!is_valid(user)) return error(400, "BadCoordinates", "lat must be in [-90, 90] and lon in [-180, 180]");
    if (!(rssi_dbm >= kMinRssiDbm && rssi_dbm <= kMaxRssiDbm))
        return error(400, "OutOfRangeRssi", "rssi_dbm outside [-140, -20]");

    auto snap = registry_.get(op);
    if (!snap) return error(404, "UnknownOperatorOrUntrained", "no model for operator " + op);

    const int user_tag = predict(snap->model, user, rssi_dbm).strength_tag;
    const auto found = geo::find_nearest_stronger(user, user_tag, snap->candidates,
                                                  config_.search_radius_m, config_.candidate_limit);
    json candidates = json::array();
    for (const geo::CandidateLocation& c : found) {
        const geo::RoutePolyline route = geo::straight_line_route(user, c.location);
        json waypoints = json::array();
        for (const GeoPoint& w : route.waypoints) waypoints.push_back({w.lat, w.lon});
        candidates.push_back({{"lat", c.location.lat},
                              {"lon", c.location.lon},
                              {"strength_tag", c.strength_tag},
                              {"distance_m", c.distance_m},
                              {"bearing_deg", c.bearing_deg},
                              {"source_measurement_count", c.source_measurement_count},
                              {"route", {{"waypoints", std::move(waypoints)},
                                         {"total_distance_m", route.total_distance_m}}}});
    }
    HttpResult r = json_result(200, {{"operator", op}, {"user_tag", user_tag}, {"candidates", std::move(candidates)}});
    r.headers.emplace_back(kModelGenerationHeader, std::to_string(snap->model.generation));
    return r;
}

HttpResult Service::get_operators() const
{
    json out = json::array();
    for (const auto& snap : registry_.all()) {
        out.push_back({{"operator", snap->model.op},
                       {"trained_at", snap->model.trained_at},
                       {"k", snap->model.k},
                       {"generation", snap->model.generation},
                       {"sample_count", snap->model.assignments.size()}});
    }
    return json_result(200, out);
}

TickReport Service::recluster_tick()
{
    std::lock_guard tick_lock(tick_mutex_);
    TickReport report;
    report.started_at = clock_();

    for (const std::string& op : operators_with_data()) {
        try {
            const std::vector<RawPoint> pts = points_for(op);
            FitOptions opts;
            opts.k = config_.k;
            opts.seed = operator_seed(config_.rng_seed, op);
            opts.max_iter = config_.max_iter;
            ClusterModel model = train(pts, op, opts, clock_());
            model.generation = next_generation_++;

            const std::filesystem::path path = config_.model_dir / model_file_name(op);
            save_model_atomic(path, model);
            auto snap = make_snapshot(std::move(model), pts);
            if (publish_hook_) publish_hook_(snap->model, path);
            registry_.publish(std::move(snap));
            ++retrains_;
            report.retrained.push_back(op);
        } catch (const ClusteringError& e) {
            if (e.code() == ClusteringError::Code::TooFewDistinctPoints) {
                spdlog::info("recluster {}: {}; keeping previous model", op, e.what());
                report.skipped.push_back(op);
            } else {
                spdlog::error("recluster {} failed: {}", op, e.what());
                report.failed.push_back(op);
            }
        } catch (const std::exception& e) {
            spdlog::error("recluster {} failed: {}", op, e.what());
            report.failed.push_back(op);
        }
    }
    spdlog::info("recluster tick: {} retrained, {} skipped, {} failed", report.retrained.size(),
                 report.skipped.size(), report.failed.size());
    return report;
}

void Service::set_publish_hook(PublishHook hook)
{
    std::lock_guard tick_lock(tick_mutex_);
    publish_hook_ = std::move(hook);
}

std::vector<RawPoint> Service::points_for(const std::string& op) const
{
    std::lock_guard lock(ingest_mutex_);
    auto it = points_.find(op);
    return it == points_.end() ? std::vector<RawPoint>{} : it->second;
}

std::vector<std::string> Service::operators_with_data() const
{
    std::lock_guard lock(ingest_mutex_);
    std::vector<std::string> ops;
    for (const auto& [op, pts] : points_) ops.push_back(op);
    return ops;
}

std::size_t Service::stored_count() const
{
    std::lock_guard lock(ingest_mutex_);
    return stored_;
}

Scheduler::Scheduler(std::chrono::milliseconds interval, std::function<void()> task)
    : interval_(interval), task_(std::move(task))
{
}

Scheduler::~Scheduler()
{
    stop();
}

void Scheduler::start()
{
    {
        std::lock_guard lock(mutex_);
        stopping_ = false;
    }
    thread_ = std::thread([this] { loop(); });
}

void Scheduler::stop()
{
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    cv_.notify_all();
    if (thread_.joinable()) thread_.join();
}

void Scheduler::loop()
{
    using clock = std::chrono::steady_clock;
    auto next = clock::now();
    for (;;) {
        {
            std::unique_lock lock(mutex_);
            if (cv_.wait_until(lock, next, [this] { return stopping_; })) return;
        }
        try {
            task_();
        } catch (const std::exception& e) {
            spdlog::error("scheduled task failed: {}", e.what());
        }
        next += interval_;
        if (next < clock::now()) next = clock::now();
    }
}

} // namespace covmap

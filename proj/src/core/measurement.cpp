#include "covmap/measurement.hpp"

#include <cmath>
#include <limits>
#include <type_traits>

namespace covmap {

using nlohmann::json;

bool is_valid(const GeoPoint& p)
{
    return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 && p.lat <= 90.0 &&
           p.lon >= -180.0 && p.lon <= 180.0;
}

std::string_view to_string(ConnectionStatus s)
{
    switch (s) {
    case ConnectionStatus::None: return "none";
    case ConnectionStatus::Primary: return "primary";
    case ConnectionStatus::Secondary: return "secondary";
    case ConnectionStatus::Unknown: return "unknown";
    }
    return "unknown";
}

std::optional<ConnectionStatus> connection_status_from_string(std::string_view s)
{
    if (s == "none") return ConnectionStatus::None;
    if (s == "primary") return ConnectionStatus::Primary;
    if (s == "secondary") return ConnectionStatus::Secondary;
    if (s == "unknown") return ConnectionStatus::Unknown;
    return std::nullopt;
}

std::string_view to_string(RejectReason r)
{
    switch (r) {
    case RejectReason::MalformedRecord: return "MalformedRecord";
    case RejectReason::OutOfRangeRssi: return "OutOfRangeRssi";
    case RejectReason::BadCoordinates: return "BadCoordinates";
    case RejectReason::MissingOperator: return "MissingOperator";
    case RejectReason::ClockSkew: return "ClockSkew";
    case RejectReason::BadCellInfo: return "BadCellInfo";
    case RejectReason::BadExtras: return "BadExtras";
    }
    return "Unknown";
}

namespace {

bool fits_bits(std::optional<std::uint32_t> v, int bits)
{
    return !v || *v < (std::uint32_t{1} << bits);
}

Rejection reject(RejectReason r, std::string detail)
{
    return Rejection{r, std::move(detail)};
}

} // namespace

Validated validate_measurement(Measurement raw, const ValidationPolicy& policy)
{
    if (raw.device_id.empty())
        return reject(RejectReason::MalformedRecord, "device_id is empty");
    if (raw.op.empty())
        return reject(RejectReason::MissingOperator, "operator is empty");
    if (!is_valid(raw.location))
        return reject(RejectReason::BadCoordinates, "lat must be in [-90, 90] and lon in [-180, 180]");
    if (raw.rssi_dbm < kMinRssiDbm || raw.rssi_dbm > kMaxRssiDbm)
        return reject(RejectReason::OutOfRangeRssi,
                      "rssi_dbm " + std::to_string(raw.rssi_dbm) + " outside [-140, -20]");
    if (raw.timestamp_s < 0)
        return reject(RejectReason::ClockSkew, "timestamp_s is negative");
    if (raw.timestamp_s > policy.now_s + policy.max_clock_skew_s)
        return reject(RejectReason::ClockSkew, "timestamp_s is too far in the future");

    if (raw.cell_info) {
        const CellInfo& c = *raw.cell_info;
        if (!fits_bits(c.mci, 28))
            return reject(RejectReason::BadCellInfo, "mci exceeds 28 bits");
        if (!fits_bits(c.mtac, 16))
            return reject(RejectReason::BadCellInfo, "mtac exceeds 16 bits");
        if (!fits_bits(c.mrfnc, 18))
            return reject(RejectReason::BadCellInfo, "mrfnc exceeds 18 bits");
    }
    if (raw.extras && raw.extras->level && (*raw.extras->level < 0 || *raw.extras->level > 4))
        return reject(RejectReason::BadExtras, "level outside [0, 4]");

    return raw;
}

namespace {

struct Malformed
{
    std::string what;
};

const json* field(const json& obj, const char* name)
{
    auto it = obj.find(name);
    if (it == obj.end() || it->is_null()) return nullptr;
    return &*it;
}

double require_number(const json& obj, const char* name)
{
    const json* v = field(obj, name);
    if (!v) throw Malformed{std::string("missing field ") + name};
    if (!v->is_number()) throw Malformed{std::string(name) + " must be a number"};
    return v->get<double>();
}

std::int64_t require_integer(const json& obj, const char* name)
{
    const json* v = field(obj, name);
    if (!v) throw Malformed{std::string("missing field ") + name};
    if (v->is_number_integer()) return v->get<std::int64_t>();
    if (v->is_number_float()) {
        double d = v->get<double>();
        if (std::isfinite(d) && std::trunc(d) == d && std::fabs(d) < 9.0e15)
            return static_cast<std::int64_t>(d);
    }
    throw Malformed{std::string(name) + " must be an integer"};
}

std::string require_string(const json& obj, const char* name)
{
    const json* v = field(obj, name);
    if (!v) throw Malformed{std::string("missing field ") + name};
    if (!v->is_string()) throw Malformed{std::string(name) + " must be a string"};
    return v->get<std::string>();
}

template <typename T>
std::optional<T> optional_integer(const json& obj, const char* name)
{
    const json* v = field(obj, name);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) throw Malformed{std::string(name) + " must be an integer"};
    if constexpr (std::is_unsigned_v<T>) {
        if (v->is_number_unsigned() || v->get<std::int64_t>() >= 0) {
            auto u = v->get<std::uint64_t>();
            if (u > std::numeric_limits<T>::max()) throw Malformed{std::string(name) + " is too large"};
            return static_cast<T>(u);
        }
        throw Malformed{std::string(name) + " must be non-negative"};
    } else {
        auto s = v->get<std::int64_t>();
        if (s < std::numeric_limits<T>::min() || s > std::numeric_limits<T>::max())
            throw Malformed{std::string(name) + " is out of range"};
        return static_cast<T>(s);
    }
}

std::optional<double> optional_number(const json& obj, const char* name)
{
    const json* v = field(obj, name);
    if (!v) return std::nullopt;
    if (!v->is_number()) throw Malformed{std::string(name) + " must be a number"};
    return v->get<double>();
}

std::optional<std::string> optional_string(const json& obj, const char* name)
{
    const json* v = field(obj, name);
    if (!v) return std::nullopt;
    if (!v->is_string()) throw Malformed{std::string(name) + " must be a string"};
    return v->get<std::string>();
}

CellInfo parse_cell_info(const json& j)
{
    if (!j.is_object()) throw Malformed{"cell_info must be an object"};
    CellInfo c;
    c.mci = optional_integer<std::uint32_t>(j, "mci");
    c.mpci = optional_integer<std::uint32_t>(j, "mpci");
    c.mtac = optional_integer<std::uint32_t>(j, "mtac");
    c.mrfnc = optional_integer<std::uint32_t>(j, "mrfnc");
    c.bandwidth_khz = optional_integer<std::int32_t>(j, "bandwidth_khz");
    c.mcc = optional_string(j, "mcc");
    c.mnc = optional_string(j, "mnc");
    c.alpha_long = optional_string(j, "alpha_long");
    c.alpha_short = optional_string(j, "alpha_short");
    if (const json* v = field(j, "registered")) {
        if (!v->is_boolean()) throw Malformed{"registered must be a boolean"};
        c.registered = v->get<bool>();
    }
    c.timestamp_ns = optional_integer<std::int64_t>(j, "timestamp_ns");
    if (auto s = optional_string(j, "connection_status")) {
        c.connection_status = connection_status_from_string(*s);
        if (!c.connection_status) throw Malformed{"unknown connection_status " + *s};
    }
    return c;
}

SignalExtras parse_extras(const json& j)
{
    if (!j.is_object()) throw Malformed{"extras must be an object"};
    SignalExtras e;
    e.rsrp = optional_number(j, "rsrp");
    e.rsrq = optional_number(j, "rsrq");
    e.rssnr = optional_number(j, "rssnr");
    e.cqi = optional_integer<int>(j, "cqi");
    e.ta = optional_integer<int>(j, "ta");
    e.level = optional_integer<int>(j, "level");
    return e;
}

template <typename T>
void put(json& j, const char* name, const std::optional<T>& v)
{
    if (v) j[name] = *v;
}

} // namespace

std::variant<Measurement, Rejection> parse_measurement(const json& j)
{
    if (!j.is_object()) return reject(RejectReason::MalformedRecord, "measurement must be a JSON object");
    try {
        Measurement m;
        m.device_id = require_string(j, "device_id");
        m.timestamp_s = require_integer(j, "timestamp_s");
        m.location.lat = require_number(j, "lat");
        m.location.lon = require_number(j, "lon");
        std::int64_t rssi = require_integer(j, "rssi_dbm");
        if (rssi < std::numeric_limits<int>::min() || rssi > std::numeric_limits<int>::max())
            return reject(RejectReason::OutOfRangeRssi, "rssi_dbm outside [-140, -20]");
        m.rssi_dbm = static_cast<int>(rssi);
        m.op = require_string(j, "operator");
        if (const json* c = field(j, "cell_info")) m.cell_info = parse_cell_info(*c);
        if (const json* e = field(j, "extras")) m.extras = parse_extras(*e);
        return m;
    } catch (const Malformed& e) {
        return reject(RejectReason::MalformedRecord, e.what);
    }
}

json to_json(const Measurement& m)
{
    json j = json::object();
    j["device_id"] = m.device_id;
    j["timestamp_s"] = m.timestamp_s;
    j["lat"] = m.location.lat;
    j["lon"] = m.location.lon;
    j["rssi_dbm"] = m.rssi_dbm;
    j["operator"] = m.op;
    if (m.cell_info) {
        const CellInfo& c = *m.cell_info;
        json cj = json::object();
        put(cj, "mci", c.mci);
        put(cj, "mpci", c.mpci);
        put(cj, "mtac", c.mtac);
        put(cj, "mrfnc", c.mrfnc);
        put(cj, "bandwidth_khz", c.bandwidth_khz);
        put(cj, "mcc", c.mcc);
        put(cj, "mnc", c.mnc);
        put(cj, "alpha_long", c.alpha_long);
        put(cj, "alpha_short", c.alpha_short);
        put(cj, "registered", c.registered);
        put(cj, "timestamp_ns", c.timestamp_ns);
        if (c.connection_status) cj["connection_status"] = std::string(to_string(*c.connection_status));
        j["cell_info"] = std::move(cj);
    }
    if (m.extras) {
        const SignalExtras& e = *m.extras;
        json ej = json::object();
        put(ej, "rsrp", e.rsrp);
        put(ej, "rsrq", e.rsrq);
        put(ej, "rssnr", e.rssnr);
        put(ej, "cqi", e.cqi);
        put(ej, "ta", e.ta);
        put(ej, "level", e.level);
        j["extras"] = std::move(ej);
    }
    return j;
}

std::string to_json_line(const Measurement& m)
{
    return to_json(m).dump() + "\n";
}

bool DedupWindow::admit(const Measurement& m)
{
    std::lock_guard lock(mutex_);
    Key key{m.device_id, m.op};
    auto it = last_.find(key);
    std::optional<std::int64_t> last;
    if (it != last_.end()) last = it->second;
    if (!dedup_admit(m.timestamp_s, last, window_s_)) return false;
    last_[std::move(key)] = m.timestamp_s;
    return true;
}

bool DedupWindow::would_admit(const Measurement& m) const
{
    return dedup_admit(m.timestamp_s, last_admitted(m.device_id, m.op), window_s_);
}

void DedupWindow::record(const Measurement& m)
{
    std::lock_guard lock(mutex_);
    last_[Key{m.device_id, m.op}] = m.timestamp_s;
}

std::optional<std::int64_t> DedupWindow::last_admitted(const std::string& device_id,
                                                       const std::string& op) const
{
    std::lock_guard lock(mutex_);
    auto it = last_.find(Key{device_id, op});
    if (it == last_.end()) return std::nullopt;
    return it->second;
}

} // namespace covmap

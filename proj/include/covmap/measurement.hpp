#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

#include "json.hpp"

namespace covmap {

struct GeoPoint
{
    double lat = 0.0;
    double lon = 0.0;

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

bool is_valid(const GeoPoint& p);

enum class ConnectionStatus
{
    None,
    Primary,
    Secondary,
    Unknown,
};

std::string_view to_string(ConnectionStatus s);
std::optional<ConnectionStatus> connection_status_from_string(std::string_view s);

// Identity and registration details of the serving LTE cell, as reported by the handset.
struct CellInfo
{
    std::optional<std::uint32_t> mci;   // 28 bit cell identity
    std::optional<std::uint32_t> mpci;  // physical cell id
    std::optional<std::uint32_t> mtac;  // 16 bit tracking area code
    std::optional<std::uint32_t> mrfnc; // 18 bit absolute RF channel number
    std::optional<std::int32_t> bandwidth_khz;
    std::optional<std::string> mcc;
    std::optional<std::string> mnc;
    std::optional<std::string> alpha_long;
    std::optional<std::string> alpha_short;
    std::optional<bool> registered;
    std::optional<std::int64_t> timestamp_ns;
    std::optional<ConnectionStatus> connection_status;

    friend bool operator==(const CellInfo&, const CellInfo&) = default;
};

struct SignalExtras
{
    std::optional<double> rsrp;  // dBm
    std::optional<double> rsrq;  // dB
    std::optional<double> rssnr; // dB
    std::optional<int> cqi;
    std::optional<int> ta;
    std::optional<int> level;    // 0..4

    friend bool operator==(const SignalExtras&, const SignalExtras&) = default;
};

struct Measurement
{
    std::string device_id;
    std::int64_t timestamp_s = 0;
    GeoPoint location;
    int rssi_dbm = 0;
    std::string op; // "operator" on the wire
    std::optional<CellInfo> cell_info;
    std::optional<SignalExtras> extras;

    friend bool operator==(const Measurement&, const Measurement&) = default;
};

inline constexpr int kMinRssiDbm = -140;
inline constexpr int kMaxRssiDbm = -20;
inline constexpr std::int64_t kDefaultMaxClockSkewS = 300;
inline constexpr std::int64_t kDefaultDedupWindowS = 10;

enum class RejectReason
{
    MalformedRecord,
    OutOfRangeRssi,
    BadCoordinates,
    MissingOperator,
    ClockSkew,
    BadCellInfo,
    BadExtras,
};

std::string_view to_string(RejectReason r);

struct Rejection
{
    RejectReason reason;
    std::string detail;
};

using Validated = std::variant<Measurement, Rejection>;

struct ValidationPolicy
{
    std::int64_t now_s = 0;
    std::int64_t max_clock_skew_s = kDefaultMaxClockSkewS;
};

/// Checks every record invariant in a fixed order and reports the first one violated.
Validated validate_measurement(Measurement raw, const ValidationPolicy& policy);

/// Structural decode of the wire format. Fails with MalformedRecord only; range checks
/// are left to validate_measurement.
std::variant<Measurement, Rejection> parse_measurement(const nlohmann::json& j);

nlohmann::json to_json(const Measurement& m);
std::string to_json_line(const Measurement& m);

/// Pure admission rule of the per-device window. The boundary gap is admitted.
constexpr bool dedup_admit(std::int64_t timestamp_s,
                           std::optional<std::int64_t> last_admitted_s,
                           std::int64_t window_s = kDefaultDedupWindowS)
{
    return !last_admitted_s || timestamp_s - *last_admitted_s >= window_s;
}

// Admission state for the dedup window, keyed by (device_id, operator).
class DedupWindow
{
public:
    explicit DedupWindow(std::int64_t window_s = kDefaultDedupWindowS) : window_s_(window_s) {}

    /// Check-and-record in one step.
    bool admit(const Measurement& m);

    /// Split form for callers that must persist between the decision and the update.
    bool would_admit(const Measurement& m) const;
    void record(const Measurement& m);

    std::optional<std::int64_t> last_admitted(const std::string& device_id,
                                              const std::string& op) const;
    std::int64_t window_s() const { return window_s_; }

private:
    using Key = std::pair<std::string, std::string>;

    std::int64_t window_s_;
    mutable std::mutex mutex_;
    std::map<Key, std::int64_t> last_;
};

} // namespace covmap

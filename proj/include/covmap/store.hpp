#pragma once

#include <cstddef>
#include <filesystem>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "covmap/measurement.hpp"

namespace covmap {

class StoreIoError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct LoadResult
{
    std::vector<Measurement> measurements;
    std::size_t skipped_lines = 0;
};

/// Reads a JSON-lines measurement file. An absent file is empty; lines that do not
/// decode to a valid measurement (including a torn final line) are counted and skipped.
LoadResult load_store(const std::filesystem::path& path);

// Append-only JSON-lines file. Each record goes out in a single write(2) on an
// O_APPEND descriptor, so a crash loses at most the line being written.
class MeasurementStore
{
public:
    explicit MeasurementStore(std::filesystem::path path);
    ~MeasurementStore();

    MeasurementStore(const MeasurementStore&) = delete;
    MeasurementStore& operator=(const MeasurementStore&) = delete;

    void append(const Measurement& m);
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    int fd_ = -1;
    std::mutex mutex_;
};

} // namespace covmap

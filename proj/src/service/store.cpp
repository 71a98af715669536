#include "covmap/store.hpp"

#include <cerrno>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include <fcntl.h>
#include <unistd.h>

#include <spdlog/spdlog.h>

namespace covmap {

LoadResult load_store(const std::filesystem::path& path)
{
    LoadResult result;
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return result;
    if (std::filesystem::is_directory(path, ec)) throw StoreIoError(path.string() + " is a directory");

    std::ifstream in(path, std::ios::binary);
    if (!in) throw StoreIoError("cannot read " + path.string());

    // Records were validated on admission; only the clock check is relaxed on reload.
    const ValidationPolicy policy{std::numeric_limits<std::int64_t>::max() / 2, 0};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            spdlog::warn("{}:{}: skipping unparseable line", path.string(), line_no);
            ++result.skipped_lines;
            continue;
        }
        auto parsed = parse_measurement(j);
        if (auto* rej = std::get_if<Rejection>(&parsed)) {
            spdlog::warn("{}:{}: skipping record ({})", path.string(), line_no, rej->detail);
            ++result.skipped_lines;
            continue;
        }
        auto valid = validate_measurement(std::get<Measurement>(std::move(parsed)), policy);
        if (auto* rej = std::get_if<Rejection>(&valid)) {
            spdlog::warn("{}:{}: skipping record ({})", path.string(), line_no, rej->detail);
            ++result.skipped_lines;
            continue;
        }
        result.measurements.push_back(std::get<Measurement>(std::move(valid)));
    }
    if (in.bad()) throw StoreIoError("read error on " + path.string());
    return result;
}

namespace {

void write_all(int fd, const char* data, std::size_t size, const std::filesystem::path& path)
{
    while (size > 0) {
        const ssize_t n = ::write(fd, data, size);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw StoreIoError("write to " + path.string() + " failed: " + std::strerror(errno));
        }
        data += n;
        size -= static_cast<std::size_t>(n);
    }
}

} // namespace

MeasurementStore::MeasurementStore(std::filesystem::path path) : path_(std::move(path))
{
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    fd_ = ::open(path_.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) throw StoreIoError("cannot open " + path_.string() + ": " + std::strerror(errno));

    // Terminate a torn final line so the next record starts on a fresh line.
    const off_t size = ::lseek(fd_, 0, SEEK_END);
    if (size > 0) {
        char last = '\n';
        if (::pread(fd_, &last, 1, size - 1) == 1 && last != '\n') write_all(fd_, "\n", 1, path_);
    }
}

MeasurementStore::~MeasurementStore()
{
    if (fd_ >= 0) ::close(fd_);
}

void MeasurementStore::append(const Measurement& m)
{
    const std::string line = to_json_line(m);
    std::lock_guard lock(mutex_);
    write_all(fd_, line.data(), line.size(), path_);
}

} // namespace covmap

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "covmap/clustering.hpp"

namespace covmap {

nlohmann::json model_to_json(const ClusterModel& model);
ClusterModel model_from_json(const nlohmann::json& j);

/// File name for an operator's model. Bytes outside [A-Za-z0-9_-] are %XX-escaped so
/// distinct operator names never collide.
std::string model_file_name(const std::string& op);

class ModelIoError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Writes to a sibling temp file and renames it over `path`.
void save_model_atomic(const std::filesystem::path& path, const ClusterModel& model);
ClusterModel load_model(const std::filesystem::path& path);

} // namespace covmap

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace kdv5 {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kOutDirEnv = "KDV5_OUT_DIR";

/// Writes content to path via a temporary sibling and rename, so readers
/// never observe a partial file.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Explicit directory if non-empty, else $KDV5_OUT_DIR, else ".".
std::filesystem::path resolve_output_dir(const std::string& explicit_dir);

struct RunManifest {
  std::string command;
  nlohmann::json parameters = nlohmann::json::object();
  std::string version = kVersion;
  std::vector<std::string> outputs;
  double wall_seconds = 0.0;
};

nlohmann::json to_json(const RunManifest& manifest);

}  // namespace kdv5

#include "kdv5/io.hpp"

#include <cstdlib>
#include <fstream>
#include <system_error>

#include "kdv5/errors.hpp"

namespace kdv5 {

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error("write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::filesystem::path resolve_output_dir(const std::string& explicit_dir) {
  if (!explicit_dir.empty()) return explicit_dir;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  return ".";
}

nlohmann::json to_json(const RunManifest& m) {
  return {{"command", m.command},
          {"parameters", m.parameters},
          {"version", m.version},
          {"outputs", m.outputs},
          {"wall_seconds", m.wall_seconds}};
}

}  // namespace kdv5

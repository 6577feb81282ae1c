#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace disrec {

inline constexpr const char* kLibraryVersion = "0.1.0";

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

// One per CLI invocation. Everything except the wall-clock time and the
// output digests is known before the run, and the id is derived from those
// parts only, so re-running the same command yields the same id.
struct RunManifest {
  std::vector<std::string> command_line;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json seeds = nlohmann::json::object();
  std::vector<std::pair<std::string, std::string>> inputs;   // path, sha256
  std::vector<std::pair<std::string, std::string>> outputs;  // path, sha256
  double wall_clock_seconds = 0.0;

  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);

  std::string id() const;
  nlohmann::json to_json() const;
  // Writes <dir>/manifest-<id>.json and returns its path.
  std::filesystem::path write(const std::filesystem::path& dir) const;
};

}  // namespace disrec

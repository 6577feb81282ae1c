#include "disrec/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <memory>

#include "disrec/errors.hpp"
#include "disrec/io.hpp"

namespace disrec {

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::string hex;
  hex.reserve(2 * len);
  char buf[3];
  for (unsigned int k = 0; k < len; ++k) {
    std::snprintf(buf, sizeof(buf), "%02x", md[k]);
    hex += buf;
  }
  return hex;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs.emplace_back(path.string(), sha256_file(path));
}

void RunManifest::add_output(const std::filesystem::path& path) {
  outputs.emplace_back(path.string(), sha256_file(path));
}

std::string RunManifest::id() const {
  nlohmann::json key = {{"command_line", command_line}, {"config", config}, {"seeds", seeds}};
  for (const auto& [path, digest] : inputs) key["inputs"].push_back(digest);
  return sha256_hex(key.dump()).substr(0, 16);
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j = {{"id", id()},
                      {"command_line", command_line},
                      {"config", config},
                      {"seeds", seeds},
                      {"library_version", kLibraryVersion},
                      {"wall_clock_seconds", wall_clock_seconds}};
  j["inputs"] = nlohmann::json::array();
  for (const auto& [path, digest] : inputs) j["inputs"].push_back({{"path", path}, {"sha256", digest}});
  j["outputs"] = nlohmann::json::array();
  for (const auto& [path, digest] : outputs) j["outputs"].push_back({{"path", path}, {"sha256", digest}});
  return j;
}

std::filesystem::path RunManifest::write(const std::filesystem::path& dir) const {
  auto path = dir / ("manifest-" + id() + ".json");
  atomic_write(path, to_json().dump(2) + "\n");
  return path;
}

}  // namespace disrec

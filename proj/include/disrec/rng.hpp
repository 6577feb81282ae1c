#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace disrec {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Named substream of a root seed. Stages draw from their own substream
// ("split", "negatives", "init", "sis", "eval", ...) so that changing how
// much randomness one stage consumes never shifts another stage.
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view stream) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : stream) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(root ^ splitmix64(h));
}

inline std::uint64_t derive_seed(std::uint64_t root, std::string_view stream,
                                 std::uint64_t index) {
  return splitmix64(derive_seed(root, stream) + splitmix64(index + 1));
}

inline Rng make_rng(std::uint64_t root, std::string_view stream) {
  return Rng(derive_seed(root, stream));
}

}  // namespace disrec

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "disrec/graph.hpp"
#include "disrec/interactions.hpp"

namespace disrec {

// Planted-community stand-in for a social recommendation dataset: users and
// items are split into blocks, and both interactions and friendships favor
// the own block.
struct SyntheticDatasetSpec {
  std::size_t n_users = 200;
  std::size_t n_items = 300;
  std::size_t n_blocks = 4;
  double in_rate = 0.2;       // P(positive) for a same-block user-item pair
  double cross_rate = 0.01;   // P(positive) across blocks
  double social_rate = 0.1;   // P(friendship) inside a block; scaled by cross/in across blocks
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticDataset {
  SparseGraph social;
  InteractionSet interactions;
  std::vector<std::uint32_t> user_block;  // entity k belongs to block k * B / count
  std::vector<std::uint32_t> item_block;
};

SyntheticDataset gen_synthetic_dataset(const SyntheticDatasetSpec& spec);

// social.txt, interactions.txt, user_blocks.txt, item_blocks.txt
std::vector<std::filesystem::path> write_synthetic_dataset(const SyntheticDataset& ds,
                                                           const std::filesystem::path& dir);

}  // namespace disrec

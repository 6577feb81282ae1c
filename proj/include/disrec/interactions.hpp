#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "disrec/graph.hpp"
#include "disrec/rng.hpp"

namespace disrec {

// Positive user-item interactions over dense indices, deduplicated and
// sorted by (user, item).
struct InteractionSet {
  std::size_t n_users = 0;
  std::size_t n_items = 0;
  std::vector<Interaction> positives;

  static InteractionSet from_pairs(std::vector<Interaction> pairs, std::size_t n_users,
                                   std::size_t n_items);
};

enum class Split { train, validation, test };
std::string to_string(Split s);

// One partition of the positives, tagged with where it came from. Consumers
// that must only see training data check the tag.
class Partition {
 public:
  Partition() = default;
  Partition(Split tag, std::vector<Interaction> pairs, std::size_t n_users);

  Split tag() const { return tag_; }
  std::span<const Interaction> pairs() const { return pairs_; }
  std::span<const ItemId> items_of(UserId u) const {
    return {items_.data() + offsets_[u], offsets_[u + 1] - offsets_[u]};
  }
  std::size_t n_users() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t size() const { return pairs_.size(); }

  void require(Split expected, const char* consumer) const;

 private:
  Split tag_ = Split::train;
  std::vector<Interaction> pairs_;
  std::vector<std::size_t> offsets_;
  std::vector<ItemId> items_;
};

struct SplitRatios {
  double train = 0.7;
  double validation = 0.1;
  double test = 0.2;
};

struct SplitDataset {
  std::size_t n_users = 0;
  std::size_t n_items = 0;
  Partition train;
  Partition validation;
  Partition test;
};

// Per-user random split. A user with n positives sends round(test * n) to
// test and round(validation * n) to validation; users with fewer than three
// positives keep everything in train.
SplitDataset split_dataset(const InteractionSet& data, const SplitRatios& ratios,
                           std::uint64_t seed);

// Uniform draws from the items a user has not interacted with, where
// "interacted" is whatever set of partitions the sampler was built from.
class NegativeSampler {
 public:
  NegativeSampler(std::span<const Partition* const> observed, std::size_t n_users,
                  std::size_t n_items);

  std::size_t unobserved_count(UserId u) const;
  bool observed(UserId u, ItemId i) const;

  // One draw (with replacement across calls).
  ItemId draw(UserId u, Rng& rng) const;
  // `count` distinct draws; fewer if the user has fewer unobserved items.
  std::vector<ItemId> draw_distinct(UserId u, std::size_t count, Rng& rng) const;

 private:
  std::size_t n_items_;
  std::vector<std::vector<ItemId>> seen_;  // sorted per user
};

}  // namespace disrec

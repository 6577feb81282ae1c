#include "disrec/interactions.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "disrec/errors.hpp"

namespace disrec {

InteractionSet InteractionSet::from_pairs(std::vector<Interaction> pairs, std::size_t n_users,
                                          std::size_t n_items) {
  for (const auto& p : pairs) {
    if (p.user >= n_users || p.item >= n_items) {
      throw InputError("interaction (" + std::to_string(p.user) + "," + std::to_string(p.item) +
                       ") outside " + std::to_string(n_users) + " users x " +
                       std::to_string(n_items) + " items");
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return InteractionSet{n_users, n_items, std::move(pairs)};
}

std::string to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "?";
}

Partition::Partition(Split tag, std::vector<Interaction> pairs, std::size_t n_users)
    : tag_(tag), pairs_(std::move(pairs)) {
  std::sort(pairs_.begin(), pairs_.end());
  offsets_.assign(n_users + 1, 0);
  for (const auto& p : pairs_) {
    if (p.user >= n_users) throw InputError("partition: user index out of range");
    ++offsets_[p.user + 1];
  }
  for (std::size_t u = 0; u < n_users; ++u) offsets_[u + 1] += offsets_[u];
  items_.reserve(pairs_.size());
  for (const auto& p : pairs_) items_.push_back(p.item);
}

void Partition::require(Split expected, const char* consumer) const {
  if (tag_ != expected) {
    throw InputError(std::string(consumer) + " expects the " + to_string(expected) +
                     " partition but was handed the " + to_string(tag_) + " partition");
  }
}

SplitDataset split_dataset(const InteractionSet& data, const SplitRatios& ratios,
                           std::uint64_t seed) {
  if (data.positives.empty()) throw InputError("split_dataset: no interactions");
  const double total = ratios.train + ratios.validation + ratios.test;
  if (std::abs(total - 1.0) > 1e-9 || ratios.train < 0 || ratios.validation < 0 || ratios.test < 0) {
    throw InputError("split_dataset: ratios must be non-negative and sum to 1");
  }
  Rng rng(derive_seed(seed, "split"));
  std::vector<Interaction> train, val, test;
  const auto& pos = data.positives;  // sorted by user
  for (std::size_t lo = 0; lo < pos.size();) {
    std::size_t hi = lo;
    while (hi < pos.size() && pos[hi].user == pos[lo].user) ++hi;
    std::vector<Interaction> mine(pos.begin() + static_cast<std::ptrdiff_t>(lo),
                                  pos.begin() + static_cast<std::ptrdiff_t>(hi));
    const std::size_t n = mine.size();
    if (n < 3) {
      train.insert(train.end(), mine.begin(), mine.end());
    } else {
      std::shuffle(mine.begin(), mine.end(), rng);
      auto n_test = static_cast<std::size_t>(std::llround(ratios.test * static_cast<double>(n)));
      auto n_val = static_cast<std::size_t>(std::llround(ratios.validation * static_cast<double>(n)));
      while (n_test + n_val >= n) {  // keep at least one training positive
        if (n_val > 0) --n_val; else --n_test;
      }
      test.insert(test.end(), mine.begin(), mine.begin() + static_cast<std::ptrdiff_t>(n_test));
      val.insert(val.end(), mine.begin() + static_cast<std::ptrdiff_t>(n_test),
                 mine.begin() + static_cast<std::ptrdiff_t>(n_test + n_val));
      train.insert(train.end(), mine.begin() + static_cast<std::ptrdiff_t>(n_test + n_val), mine.end());
    }
    lo = hi;
  }
  SplitDataset out;
  out.n_users = data.n_users;
  out.n_items = data.n_items;
  out.train = Partition(Split::train, std::move(train), data.n_users);
  out.validation = Partition(Split::validation, std::move(val), data.n_users);
  out.test = Partition(Split::test, std::move(test), data.n_users);
  return out;
}

NegativeSampler::NegativeSampler(std::span<const Partition* const> observed, std::size_t n_users,
                                 std::size_t n_items)
    : n_items_(n_items), seen_(n_users) {
  for (const Partition* part : observed) {
    for (UserId u = 0; u < std::min(n_users, part->n_users()); ++u) {
      auto items = part->items_of(u);
      seen_[u].insert(seen_[u].end(), items.begin(), items.end());
    }
  }
  for (auto& s : seen_) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
  }
}

std::size_t NegativeSampler::unobserved_count(UserId u) const { return n_items_ - seen_[u].size(); }

bool NegativeSampler::observed(UserId u, ItemId i) const {
  return std::binary_search(seen_[u].begin(), seen_[u].end(), i);
}

ItemId NegativeSampler::draw(UserId u, Rng& rng) const {
  const std::size_t free = unobserved_count(u);
  if (free == 0) throw InputError("negative sampling: user " + std::to_string(u) + " has seen every item");
  if (free * 2 >= n_items_) {
    std::uniform_int_distribution<ItemId> pick(0, static_cast<ItemId>(n_items_ - 1));
    for (;;) {
      ItemId i = pick(rng);
      if (!observed(u, i)) return i;
    }
  }
  // dense user: pick the k-th unobserved item directly
  std::uniform_int_distribution<std::size_t> pick(0, free - 1);
  std::size_t k = pick(rng);
  ItemId candidate = static_cast<ItemId>(k);
  for (ItemId s : seen_[u]) {
    if (s <= candidate) ++candidate;
    else break;
  }
  return candidate;
}

std::vector<ItemId> NegativeSampler::draw_distinct(UserId u, std::size_t count, Rng& rng) const {
  const std::size_t free = unobserved_count(u);
  std::vector<ItemId> out;
  if (count * 4 <= free) {
    out.reserve(count);
    while (out.size() < count) {
      ItemId i = draw(u, rng);
      if (std::find(out.begin(), out.end(), i) == out.end()) out.push_back(i);
    }
    return out;
  }
  std::vector<ItemId> pool;
  pool.reserve(free);
  for (ItemId i = 0; i < n_items_; ++i) {
    if (!observed(u, i)) pool.push_back(i);
  }
  const std::size_t take = std::min(count, pool.size());
  for (std::size_t k = 0; k < take; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, pool.size() - 1);
    std::swap(pool[k], pool[pick(rng)]);
  }
  pool.resize(take);
  return pool;
}

}  // namespace disrec

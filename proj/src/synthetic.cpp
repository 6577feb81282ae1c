#include "disrec/synthetic.hpp"

#include <random>
#include <sstream>

#include "disrec/errors.hpp"
#include "disrec/io.hpp"
#include "disrec/rng.hpp"

namespace disrec {

void SyntheticDatasetSpec::validate() const {
  auto rate = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (!rate(in_rate) || !rate(cross_rate) || !rate(social_rate)) {
    throw InputError("synthetic dataset: rates must lie in [0, 1]");
  }
  if (n_blocks < 1 || n_blocks > n_users || n_blocks > n_items) {
    throw InputError("synthetic dataset: need 1 <= n_blocks <= min(n_users, n_items)");
  }
}

namespace {

std::vector<std::uint32_t> assign_blocks(std::size_t count, std::size_t blocks) {
  std::vector<std::uint32_t> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = static_cast<std::uint32_t>(k * blocks / count);
  return out;
}

}  // namespace

SyntheticDataset gen_synthetic_dataset(const SyntheticDatasetSpec& spec) {
  spec.validate();
  SyntheticDataset ds;
  ds.user_block = assign_blocks(spec.n_users, spec.n_blocks);
  ds.item_block = assign_blocks(spec.n_items, spec.n_blocks);

  Rng rng(derive_seed(spec.seed, "synthetic-interactions"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Interaction> positives;
  for (UserId u = 0; u < spec.n_users; ++u) {
    for (ItemId i = 0; i < spec.n_items; ++i) {
      const double p = ds.user_block[u] == ds.item_block[i] ? spec.in_rate : spec.cross_rate;
      if (unit(rng) < p) positives.push_back({u, i});
    }
  }
  ds.interactions = InteractionSet::from_pairs(std::move(positives), spec.n_users, spec.n_items);

  Rng social_rng(derive_seed(spec.seed, "synthetic-social"));
  const double cross_social = spec.in_rate > 0.0 ? spec.social_rate * spec.cross_rate / spec.in_rate : 0.0;
  std::vector<Edge> edges;
  for (NodeId u = 0; u < spec.n_users; ++u) {
    for (NodeId v = u + 1; v < spec.n_users; ++v) {
      const double p = ds.user_block[u] == ds.user_block[v] ? spec.social_rate : cross_social;
      if (unit(social_rng) < p) edges.push_back({u, v});
    }
  }
  ds.social = from_sorted_unique(edges, spec.n_users);
  return ds;
}

std::vector<std::filesystem::path> write_synthetic_dataset(const SyntheticDataset& ds,
                                                           const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  auto social = dir / "social.txt";
  write_edge_list(social, ds.social);
  written.push_back(social);

  std::ostringstream inter;
  inter << "# user item\n";
  for (const auto& p : ds.interactions.positives) inter << p.user << ' ' << p.item << '\n';
  auto inter_path = dir / "interactions.txt";
  atomic_write(inter_path, inter.str());
  written.push_back(inter_path);

  auto blocks = [&](const char* name, const std::vector<std::uint32_t>& b) {
    std::ostringstream os;
    os << "# index block\n";
    for (std::size_t k = 0; k < b.size(); ++k) os << k << ' ' << b[k] << '\n';
    auto path = dir / name;
    atomic_write(path, os.str());
    written.push_back(path);
  };
  blocks("user_blocks.txt", ds.user_block);
  blocks("item_blocks.txt", ds.item_block);
  return written;
}

}  // namespace disrec

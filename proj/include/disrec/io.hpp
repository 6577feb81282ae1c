#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "disrec/diffnet.hpp"
#include "disrec/graph.hpp"
#include "disrec/interactions.hpp"
#include "disrec/spectral.hpp"

namespace disrec {

namespace fs = std::filesystem;
using OriginalId = std::uint64_t;

// Write to `path.tmp` then rename over `path`.
void atomic_write(const fs::path& path, const std::string& contents);
std::string read_file(const fs::path& path);

struct LoadReport {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t duplicates_dropped = 0;
  std::size_t self_loops_dropped = 0;
  double lcc_fraction = 0.0;

  nlohmann::json to_json() const;
};

struct LoadedGraph {
  SparseGraph graph;
  std::vector<OriginalId> original_ids;  // dense index -> id in the file
  LoadReport report;
};

// Edge list: two whitespace-separated non-negative integer IDs per line,
// '#' comments. IDs are compacted to 0..n-1 in ascending order.
LoadedGraph read_edge_list(const fs::path& path);
LoadedGraph parse_edge_list(const std::string& text, const std::string& source = "<memory>");

// Optional third column carries a per-edge score.
std::string format_edge_list(std::span<const Edge> edges, std::span<const double> scores = {},
                             std::span<const OriginalId> ids = {});
void write_edge_list(const fs::path& path, const SparseGraph& g);

// "dense_index original_id" per line.
void write_remap(const fs::path& path, std::span<const OriginalId> original_ids);

struct RawInteraction {
  OriginalId user = 0;
  OriginalId item = 0;
  bool positive = true;
};

// "user item" or "user item rating"; with a rating column only rows with
// rating >= threshold are positives. Every row still registers its user and
// item as entities.
std::vector<RawInteraction> read_interactions(const fs::path& path, double rating_threshold = 4.0);
std::vector<RawInteraction> parse_interactions(const std::string& text, double rating_threshold,
                                               const std::string& source = "<memory>");

// Feature CSV: optional header, then "id,f1,...,fF" per row. Every entity
// in `ids` needs exactly one row and no unknown ids may appear.
Matrix read_features(const fs::path& path, std::span<const OriginalId> ids);
Matrix parse_features(const std::string& text, std::span<const OriginalId> ids,
                      const std::string& source = "<memory>");

struct Dataset {
  SparseGraph social;
  InteractionSet interactions;
  FeatureSet features;
  std::vector<OriginalId> user_ids;
  std::vector<OriginalId> item_ids;
  LoadReport social_report;
  std::vector<std::string> warnings;
};

struct DatasetOptions {
  double rating_threshold = 4.0;
  std::optional<fs::path> user_features;
  std::optional<fs::path> item_features;
  std::size_t random_feature_dim = 8;  // used when a feature file is absent
  std::uint64_t seed = 0;
};

// Users appearing only in interactions become isolated social nodes (with a
// warning), appended after the social-file users.
Dataset load_dataset(const fs::path& social, const fs::path& interactions, const DatasetOptions& opts);

// Binary checkpoint: magic, JSON header (hyperparameters, seed, shapes),
// then every tensor row-major as little-endian float64.
struct Checkpoint {
  HyperParams hyper;
  FeatureSet features;
  ModelParams params;
};

void save_checkpoint(const fs::path& path, const DiffNet& model);
std::string encode_checkpoint(const HyperParams& hp, const FeatureSet& features,
                              const ModelParams& params);
Checkpoint load_checkpoint(const fs::path& path);
Checkpoint decode_checkpoint(const std::string& bytes);

nlohmann::json hyperparams_to_json(const HyperParams& hp);
HyperParams hyperparams_from_json(const nlohmann::json& j);

}  // namespace disrec

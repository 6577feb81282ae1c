#include "disrec/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "disrec/errors.hpp"

namespace disrec {

void atomic_write(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw InputError("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json LoadReport::to_json() const {
  return {{"nodes", nodes},
          {"edges", edges},
          {"duplicates_dropped", duplicates_dropped},
          {"self_loops_dropped", self_loops_dropped},
          {"lcc_fraction", lcc_fraction}};
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line, bool commas) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  auto sep = [&](char c) { return c == ' ' || c == '\t' || c == '\r' || (commas && c == ','); };
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && !sep(line[j])) ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
    if (commas && i < line.size() && line[i] == ',') ++i;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
  // from_chars for double is missing from older standard libraries
  std::string tmp(s);
  char* end = nullptr;
  out = std::strtod(tmp.c_str(), &end);
  return !tmp.empty() && end == tmp.c_str() + tmp.size();
}

std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line);
}

// Iterate non-blank, non-comment lines with 1-based line numbers.
template <typename F>
void for_each_line(const std::string& text, F&& f) {
  std::size_t lineno = 0, pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string_view line(text.data() + pos, nl - pos);
    ++lineno;
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first != std::string_view::npos && line[first] != '#') f(line, lineno);
    pos = nl + 1;
  }
}

std::vector<OriginalId> sorted_unique(std::vector<OriginalId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

NodeId dense_index(const std::vector<OriginalId>& ids, OriginalId id) {
  auto it = std::lower_bound(ids.begin(), ids.end(), id);
  if (it == ids.end() || *it != id) return kNoNode;
  return static_cast<NodeId>(it - ids.begin());
}

std::string list_first(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t k = 0; k < items.size() && k < 10; ++k) {
    if (k) out += ", ";
    out += items[k];
  }
  if (items.size() > 10) out += ", ... (" + std::to_string(items.size()) + " total)";
  return out;
}

}  // namespace

LoadedGraph parse_edge_list(const std::string& text, const std::string& source) {
  std::vector<std::pair<OriginalId, OriginalId>> raw;
  for_each_line(text, [&](std::string_view line, std::size_t lineno) {
    auto fields = split_fields(line, false);
    OriginalId a = 0, b = 0;
    if (fields.size() < 2 || !parse_number(fields[0], a) || !parse_number(fields[1], b)) {
      throw InputError(where(source, lineno) + ": expected two non-negative integer node ids, got '" +
                       std::string(line) + "'");
    }
    raw.emplace_back(a, b);
  });
  std::vector<OriginalId> ids;
  ids.reserve(raw.size() * 2);
  for (auto [a, b] : raw) {
    ids.push_back(a);
    ids.push_back(b);
  }
  LoadedGraph out;
  out.original_ids = sorted_unique(std::move(ids));
  std::vector<Edge> edges;
  edges.reserve(raw.size());
  for (auto [a, b] : raw) edges.push_back({dense_index(out.original_ids, a), dense_index(out.original_ids, b)});
  BuildReport br;
  out.graph = build_graph(edges, out.original_ids.size(), &br);
  out.report.nodes = out.graph.num_nodes();
  out.report.edges = out.graph.num_edges();
  out.report.duplicates_dropped = br.duplicates_dropped;
  out.report.self_loops_dropped = br.self_loops_dropped;
  if (out.graph.num_nodes() > 0) {
    out.report.lcc_fraction = static_cast<double>(extract_lcc(out.graph).graph.num_nodes()) /
                              static_cast<double>(out.graph.num_nodes());
  }
  return out;
}

LoadedGraph read_edge_list(const fs::path& path) { return parse_edge_list(read_file(path), path.string()); }

std::string format_edge_list(std::span<const Edge> edges, std::span<const double> scores,
                             std::span<const OriginalId> ids) {
  std::ostringstream os;
  os.precision(12);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const Edge& e = edges[k];
    if (ids.empty()) {
      os << e.u << ' ' << e.v;
    } else {
      os << ids[e.u] << ' ' << ids[e.v];
    }
    if (!scores.empty()) os << ' ' << scores[k];
    os << '\n';
  }
  return os.str();
}

void write_edge_list(const fs::path& path, const SparseGraph& g) {
  const auto edges = g.edges();
  atomic_write(path, "# nodes " + std::to_string(g.num_nodes()) + " edges " +
                         std::to_string(g.num_edges()) + "\n" + format_edge_list(edges));
}

void write_remap(const fs::path& path, std::span<const OriginalId> original_ids) {
  std::ostringstream os;
  os << "# dense_index original_id\n";
  for (std::size_t k = 0; k < original_ids.size(); ++k) os << k << ' ' << original_ids[k] << '\n';
  atomic_write(path, os.str());
}

std::vector<RawInteraction> parse_interactions(const std::string& text, double rating_threshold,
                                               const std::string& source) {
  std::vector<RawInteraction> rows;
  for_each_line(text, [&](std::string_view line, std::size_t lineno) {
    auto fields = split_fields(line, false);
    RawInteraction r;
    if (fields.size() < 2 || fields.size() > 3 || !parse_number(fields[0], r.user) ||
        !parse_number(fields[1], r.item)) {
      throw InputError(where(source, lineno) + ": expected 'user item [rating]', got '" +
                       std::string(line) + "'");
    }
    if (fields.size() == 3) {
      double rating = 0.0;
      if (!parse_double(fields[2], rating)) {
        throw InputError(where(source, lineno) + ": rating '" + std::string(fields[2]) + "' is not a number");
      }
      r.positive = rating >= rating_threshold;
    }
    rows.push_back(r);
  });
  return rows;
}

std::vector<RawInteraction> read_interactions(const fs::path& path, double rating_threshold) {
  return parse_interactions(read_file(path), rating_threshold, path.string());
}

Matrix parse_features(const std::string& text, std::span<const OriginalId> ids, const std::string& source) {
  std::vector<std::pair<OriginalId, std::size_t>> sorted;
  sorted.reserve(ids.size());
  for (std::size_t k = 0; k < ids.size(); ++k) sorted.emplace_back(ids[k], k);
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<OriginalId, std::vector<double>>> rows;
  std::vector<std::string> ragged, malformed;
  std::optional<std::size_t> width;
  bool first = true;
  for_each_line(text, [&](std::string_view line, std::size_t lineno) {
    auto fields = split_fields(line, true);
    OriginalId id = 0;
    const bool numeric_id = !fields.empty() && parse_number(fields[0], id);
    if (first && !numeric_id) {  // header row
      first = false;
      return;
    }
    first = false;
    if (!numeric_id) {
      malformed.push_back(where(source, lineno));
      return;
    }
    std::vector<double> values(fields.size() - 1);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      if (!parse_double(fields[k], values[k - 1]) || !std::isfinite(values[k - 1])) {
        malformed.push_back(where(source, lineno));
        return;
      }
    }
    if (!width) width = values.size();
    if (values.size() != *width) {
      ragged.push_back(where(source, lineno) + " (" + std::to_string(values.size()) + " columns, expected " +
                       std::to_string(*width) + ")");
      return;
    }
    rows.emplace_back(id, std::move(values));
  });
  if (!malformed.empty()) throw InputError("malformed feature rows: " + list_first(malformed));
  if (!ragged.empty()) throw InputError("ragged feature rows: " + list_first(ragged));

  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(ids.size()),
                            static_cast<Eigen::Index>(width.value_or(0)));
  std::vector<char> seen(ids.size(), 0);
  std::vector<std::string> unknown, duplicate, missing;
  for (auto& [id, values] : rows) {
    auto it = std::lower_bound(sorted.begin(), sorted.end(), std::make_pair(id, std::size_t{0}));
    if (it == sorted.end() || it->first != id) {
      unknown.push_back(std::to_string(id));
      continue;
    }
    const std::size_t pos = it->second;  // rows follow the caller's id order
    if (seen[pos]) {
      duplicate.push_back(std::to_string(id));
      continue;
    }
    seen[pos] = 1;
    for (std::size_t k = 0; k < values.size(); ++k) {
      out(static_cast<Eigen::Index>(pos), static_cast<Eigen::Index>(k)) = values[k];
    }
  }
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (!seen[k]) missing.push_back(std::to_string(ids[k]));
  }
  if (!unknown.empty()) throw InputError(source + ": feature rows for unknown ids: " + list_first(unknown));
  if (!duplicate.empty()) throw InputError(source + ": duplicate feature rows for ids: " + list_first(duplicate));
  if (!missing.empty()) throw InputError(source + ": no feature row for ids: " + list_first(missing));
  return out;
}

Matrix read_features(const fs::path& path, std::span<const OriginalId> ids) {
  return parse_features(read_file(path), ids, path.string());
}

Dataset load_dataset(const fs::path& social_path, const fs::path& interactions_path,
                     const DatasetOptions& opts) {
  Dataset ds;
  LoadedGraph social = read_edge_list(social_path);
  ds.social_report = social.report;
  const auto rows = read_interactions(interactions_path, opts.rating_threshold);
  if (rows.empty()) throw InputError(interactions_path.string() + ": no interactions");

  std::vector<OriginalId> new_users, items;
  for (const auto& r : rows) {
    if (dense_index(social.original_ids, r.user) == kNoNode) new_users.push_back(r.user);
    items.push_back(r.item);
  }
  new_users = sorted_unique(std::move(new_users));
  ds.item_ids = sorted_unique(std::move(items));
  ds.user_ids = social.original_ids;
  ds.user_ids.insert(ds.user_ids.end(), new_users.begin(), new_users.end());
  if (!new_users.empty()) {
    std::vector<std::string> shown;
    for (auto id : new_users) shown.push_back(std::to_string(id));
    ds.warnings.push_back(std::to_string(new_users.size()) +
                          " interaction users are absent from the social graph and were added as "
                          "isolated nodes: " + list_first(shown));
  }
  ds.social = new_users.empty() ? std::move(social.graph)
                                : build_graph(social.graph.edges(), ds.user_ids.size());

  const std::size_t m_social = social.original_ids.size();
  std::vector<Interaction> positives;
  for (const auto& r : rows) {
    if (!r.positive) continue;
    NodeId u = dense_index(social.original_ids, r.user);
    if (u == kNoNode) u = static_cast<NodeId>(m_social + dense_index(new_users, r.user));
    positives.push_back({u, dense_index(ds.item_ids, r.item)});
  }
  if (positives.empty()) {
    throw InputError(interactions_path.string() + ": no positive interactions at rating threshold " +
                     std::to_string(opts.rating_threshold));
  }
  ds.interactions = InteractionSet::from_pairs(std::move(positives), ds.user_ids.size(), ds.item_ids.size());

  const std::size_t m = ds.user_ids.size(), n = ds.item_ids.size();
  const std::size_t dim = opts.random_feature_dim;
  ds.features = FeatureSet::random(m, n, opts.user_features ? 0 : dim, opts.item_features ? 0 : dim, opts.seed);
  if (opts.user_features) ds.features.users = read_features(*opts.user_features, ds.user_ids);
  if (opts.item_features) ds.features.items = read_features(*opts.item_features, ds.item_ids);
  if (opts.user_features || opts.item_features) {
    ds.features.source = std::string("file(users=") +
                         (opts.user_features ? opts.user_features->string() : "random") +
                         ", items=" + (opts.item_features ? opts.item_features->string() : "random") + ")";
  }
  return ds;
}

}  // namespace disrec

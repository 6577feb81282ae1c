#include "doctest.h"

#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "disrec/errors.hpp"
#include "disrec/io.hpp"
#include "disrec/manifest.hpp"
#include "disrec/synthetic.hpp"

using namespace disrec;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("disrec_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return path / name;
  }
};

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("edge list parsing compacts ids and reports cleanup") {
  LoadedGraph g = parse_edge_list("# comment\n10 20\n20 10\n30 30\n\n20\t40\n100 200\n", "f.txt");
  CHECK(g.original_ids == std::vector<OriginalId>{10, 20, 30, 40, 100, 200});
  CHECK(g.graph.num_edges() == 3);
  CHECK(g.graph.has_edge(0, 1));
  CHECK(g.graph.has_edge(1, 3));
  CHECK(g.report.duplicates_dropped == 1);
  CHECK(g.report.self_loops_dropped == 1);
  CHECK(g.report.lcc_fraction == doctest::Approx(3.0 / 6.0));
  auto j = g.report.to_json();
  CHECK(j["nodes"] == 6);
  CHECK(j["edges"] == 3);
}

TEST_CASE("edge list errors name the line") {
  CHECK(error_of([] { parse_edge_list("1 2\n3 x\n", "g.txt"); }).find("g.txt:2") != std::string::npos);
  CHECK(error_of([] { parse_edge_list("1 2\n\n# c\n5\n", "g.txt"); }).find("g.txt:4") != std::string::npos);
  // trailing columns (scores, timestamps) are ignored
  CHECK(parse_edge_list("1 2 0.5 99\n").graph.num_edges() == 1);
  CHECK(error_of([] { parse_edge_list("-1 2\n", "g.txt"); }).find("g.txt:1") != std::string::npos);
  CHECK_THROWS_AS(read_edge_list("/nonexistent/file.txt"), InputError);
}

TEST_CASE("edge list with scores and id mapping") {
  std::vector<Edge> e{{0, 1}, {1, 2}};
  std::vector<double> s{0.5, 0.25};
  std::vector<OriginalId> ids{7, 8, 9};
  CHECK(format_edge_list(e, s, ids) == "7 8 0.5\n8 9 0.25\n");
  CHECK(format_edge_list(e) == "0 1\n1 2\n");
}

TEST_CASE("interactions") {
  auto rows = parse_interactions("1 10 5\n1 11 3\n2 10 4\n", 4.0);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].positive);
  CHECK_FALSE(rows[1].positive);
  CHECK(rows[2].positive);
  auto plain = parse_interactions("# u i\n1 10\n2 11\n", 4.0);
  CHECK(plain.size() == 2);
  CHECK(plain[1].positive);
  CHECK(error_of([] { parse_interactions("1\n", 4.0, "r.txt"); }).find("r.txt:1") != std::string::npos);
  CHECK(error_of([] { parse_interactions("1 2 abc\n", 4.0, "r.txt"); }).find("r.txt:1") != std::string::npos);
}

TEST_CASE("feature files") {
  std::vector<OriginalId> ids{5, 3, 9};
  Matrix m = parse_features("id,a,b\n3,1,2\n5,3,4\n9,5,6\n", ids);
  CHECK(m.rows() == 3);
  CHECK(m.cols() == 2);
  CHECK(m(0, 0) == 3.0);  // row order follows ids
  CHECK(m(1, 1) == 2.0);
  Matrix ws = parse_features("3 1 2\n5 3 4\n9 5 6\n", ids);
  CHECK(ws == m);

  CHECK(error_of([&] { parse_features("3,1,2\n5,3\n9,5,6\n", ids, "x.csv"); }).find("ragged") != std::string::npos);
  CHECK(error_of([&] { parse_features("3,1,2\n5,3,4\n9,5,6\n11,0,0\n", ids, "x.csv"); }).find("unknown ids: 11") !=
        std::string::npos);
  CHECK(error_of([&] { parse_features("3,1,2\n3,1,2\n5,3,4\n9,5,6\n", ids, "x.csv"); }).find("duplicate") !=
        std::string::npos);
  CHECK(error_of([&] { parse_features("3,1,2\n", ids, "x.csv"); }).find("no feature row for ids: 5, 9") !=
        std::string::npos);
  CHECK(error_of([&] { parse_features("3,1,q\n5,3,4\n9,5,6\n", ids, "x.csv"); }).find("malformed") !=
        std::string::npos);

  // only the first ten offenders are listed
  std::vector<OriginalId> many;
  for (OriginalId k = 0; k < 25; ++k) many.push_back(k);
  const std::string msg = error_of([&] { parse_features("0,1\n", many, "y.csv"); });
  CHECK(msg.find(" 10") != std::string::npos);
  CHECK(msg.find(" 11,") == std::string::npos);
  CHECK(msg.find("24 total") != std::string::npos);
}

TEST_CASE("dataset loading") {
  TempDir dir;
  auto social = dir.write("social.txt", "1 2\n2 3\n");
  auto inter = dir.write("inter.txt", "1 100 5\n3 101 4\n7 100 5\n2 102 1\n");
  Dataset ds = load_dataset(social, inter, {});
  CHECK(ds.user_ids == std::vector<OriginalId>{1, 2, 3, 7});
  CHECK(ds.item_ids == std::vector<OriginalId>{100, 101, 102});
  CHECK(ds.social.num_nodes() == 4);
  CHECK(ds.social.degree(3) == 0);
  CHECK(ds.warnings.size() == 1);
  CHECK(ds.interactions.positives.size() == 3);
  CHECK(ds.features.users.rows() == 4);
  CHECK(ds.features.items.rows() == 3);

  auto empty = dir.write("empty.txt", "# nothing\n");
  CHECK_THROWS_AS(load_dataset(social, empty, {}), InputError);

  auto uf = dir.write("uf.csv", "1,0.5\n2,0.5\n3,0.5\n");
  DatasetOptions opts;
  opts.user_features = uf;
  CHECK(error_of([&] { load_dataset(social, inter, opts); }).find("no feature row for ids: 7") != std::string::npos);
}

TEST_CASE("checkpoint round trip is exact") {
  SparseGraph social = build_graph(std::vector<Edge>{{0, 1}}, 3);
  Partition train(Split::train, {{0, 0}, {2, 1}}, 3);
  HyperParams hp;
  hp.dim = 4;
  hp.depth = 2;
  hp.alpha = Alpha::finite(-2.5);
  hp.pooling = Pooling::max;
  hp.seed = 99;
  FeatureSet f = FeatureSet::random(3, 2, 2, 5, 1);
  DiffNet model(social, f, train, 2, hp);
  model.initialize(3);
  model.params().P(0, 0) = 1.0 / 3.0;  // not representable in short decimal
  const std::string bytes = encode_checkpoint(hp, f, model.params());
  Checkpoint ck = decode_checkpoint(bytes);
  CHECK(hyperparams_to_json(ck.hyper) == hyperparams_to_json(hp));
  CHECK(ck.features.users == f.users);
  CHECK(ck.features.items == f.items);
  auto a = ck.params.tensors();
  auto b = model.params().tensors();
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(*a[k].second == *b[k].second);
  CHECK(encode_checkpoint(ck.hyper, ck.features, ck.params) == bytes);

  TempDir dir;
  save_checkpoint(dir.path / "m.ckpt", model);
  CHECK(read_file(dir.path / "m.ckpt") == bytes);
  CHECK_FALSE(fs::exists(dir.path / "m.ckpt.tmp"));

  CHECK_THROWS_AS(decode_checkpoint("NOTMAGIC"), InputError);
  CHECK_THROWS_AS(decode_checkpoint(bytes.substr(0, bytes.size() - 3)), InputError);
  CHECK_THROWS_AS(decode_checkpoint(bytes + "x"), InputError);
}

TEST_CASE("sha256 and manifest ids") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  TempDir dir;
  auto in = dir.write("in.txt", "1 2\n");
  RunManifest m;
  m.command_line = {"gen", "--kind", "er"};
  m.config = {{"k", 1}};
  m.add_input(in);
  RunManifest same = m;
  same.wall_clock_seconds = 123.0;
  CHECK(same.id() == m.id());
  RunManifest other = m;
  other.command_line.push_back("--quiet");
  CHECK(other.id() != m.id());
  auto out = dir.write("out.txt", "hello");
  m.add_output(out);
  auto path = m.write(dir.path);
  auto j = nlohmann::json::parse(read_file(path));
  CHECK(j["outputs"][0]["sha256"] == sha256_hex("hello"));
  CHECK(j["inputs"][0]["sha256"] == sha256_hex("1 2\n"));
  CHECK(j["library_version"] == kLibraryVersion);
}

TEST_CASE("synthetic dataset") {
  double mean_positives = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SyntheticDatasetSpec spec;
    spec.seed = seed;
    mean_positives += gen_synthetic_dataset(spec).interactions.positives.size() / 5.0;
  }
  // 200 * (75 * 0.2 + 225 * 0.01) = 3450
  CHECK(std::abs(mean_positives - 3450.0) < 150.0);

  SyntheticDatasetSpec iso;
  iso.cross_rate = 0.0;
  SyntheticDataset d = gen_synthetic_dataset(iso);
  std::size_t comps = 0;
  component_labels(combine(build_graph(std::vector<Edge>{}, 200), d.interactions.positives, 300).base, &comps);
  CHECK(comps >= 4);
  for (const auto& p : d.interactions.positives) CHECK(d.user_block[p.user] == d.item_block[p.item]);

  SyntheticDatasetSpec one;
  one.n_blocks = 1;
  one.in_rate = 0.05;
  SyntheticDataset u = gen_synthetic_dataset(one);
  CHECK(std::abs(static_cast<double>(u.interactions.positives.size()) - 3000.0) < 5 * std::sqrt(3000.0));

  SyntheticDatasetSpec a;
  a.seed = 3;
  CHECK(gen_synthetic_dataset(a).interactions.positives == gen_synthetic_dataset(a).interactions.positives);
  CHECK(gen_synthetic_dataset(a).social.edges() == gen_synthetic_dataset(a).social.edges());

  SyntheticDatasetSpec bad;
  bad.in_rate = 1.5;
  CHECK_THROWS_AS(bad.validate(), InputError);
  bad.in_rate = 0.2;
  bad.n_blocks = 0;
  CHECK_THROWS_AS(bad.validate(), InputError);

  TempDir dir;
  auto files = write_synthetic_dataset(gen_synthetic_dataset(a), dir.path);
  CHECK(files.size() == 4);
  for (const auto& f : files) CHECK(fs::exists(f));
}

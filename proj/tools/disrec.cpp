#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "disrec/errors.hpp"
#include "disrec/eval.hpp"
#include "disrec/generators.hpp"
#include "disrec/io.hpp"
#include "disrec/manifest.hpp"
#include "disrec/rng.hpp"
#include "disrec/sis.hpp"
#include "disrec/spectral.hpp"
#include "disrec/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace disrec;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string manifest_dir = ".";
  bool quiet = false;
};

// Per-invocation state: the manifest being assembled plus logging.
class Context {
 public:
  Context(const Globals& g, std::vector<std::string> argv) : globals(g) {
    manifest.command_line = std::move(argv);
    manifest.seeds["root"] = g.seed;
  }

  void log(const std::string& msg) const {
    if (!globals.quiet) std::cerr << msg << '\n';
  }
  void input(const fs::path& p) { manifest.add_input(p); }
  std::string id() const { return manifest.id(); }

  void write(const fs::path& path, const std::string& contents) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    atomic_write(path, contents);
    written_.push_back(path);
  }
  void wrote(const fs::path& path) { written_.push_back(path); }

  void finish(double seconds) {
    for (const auto& p : written_) manifest.add_output(p);
    manifest.wall_clock_seconds = seconds;
    fs::create_directories(globals.manifest_dir);
    auto path = manifest.write(globals.manifest_dir);
    log("manifest: " + path.string());
  }

  const Globals& globals;
  RunManifest manifest;

 private:
  std::vector<fs::path> written_;
};

std::string csv_preamble(const Context& ctx) { return "# manifest " + ctx.id() + "\n"; }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

// Emits a JSON document to stdout and, when given, to a file.
void emit_json(Context& ctx, json doc, const std::string& out) {
  doc["manifest_id"] = ctx.id();
  const std::string text = doc.dump(2) + "\n";
  if (!out.empty()) ctx.write(out, text);
  std::cout << text;
}

struct GraphInput {
  std::string path;
  bool lcc = false;
};

struct PreparedGraph {
  SparseGraph graph;
  std::vector<OriginalId> ids;
  LoadReport report;
};

PreparedGraph prepare_graph(Context& ctx, const GraphInput& in) {
  ctx.input(in.path);
  LoadedGraph lg = read_edge_list(in.path);
  PreparedGraph out{std::move(lg.graph), std::move(lg.original_ids), lg.report};
  if (in.lcc) {
    Subgraph sub = extract_lcc(out.graph);
    std::vector<OriginalId> ids;
    for (NodeId old : sub.new_to_old) ids.push_back(out.ids[old]);
    out.graph = std::move(sub.graph);
    out.ids = std::move(ids);
  }
  ctx.log(in.path + ": " + std::to_string(out.graph.num_nodes()) + " nodes, " +
          std::to_string(out.graph.num_edges()) + " edges" + (in.lcc ? " (LCC)" : ""));
  return out;
}

void add_graph_flags(CLI::App* cmd, GraphInput& in) {
  cmd->add_option("--graph", in.path, "edge list file")->required();
  cmd->add_flag("--lcc", in.lcc, "restrict to the largest connected component");
}

void add_power_flags(CLI::App* cmd, PowerIterationOptions& p) {
  cmd->add_option("--tol", p.tol, "power iteration tolerance")->capture_default_str();
  cmd->add_option("--max-iter", p.max_iter, "power iteration cap")->capture_default_str();
}

json power_json(const PowerIterationOptions& p) { return {{"tol", p.tol}, {"max_iter", p.max_iter}}; }

// ---- gen ----

struct GenArgs {
  std::string kind;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::string out;
};

void run_gen(Context& ctx, const GenArgs& a) {
  GenSpec spec{parse_gen_kind(a.kind), a.nodes, a.edges, derive_seed(ctx.globals.seed, "gen")};
  ctx.manifest.config = {{"command", "gen"}, {"kind", to_string(spec.kind)}, {"nodes", a.nodes},
                         {"edges", a.edges}, {"out", a.out}};
  SparseGraph g = generate(spec);
  std::string text = csv_preamble(ctx) + "# kind " + to_string(spec.kind) + "\n" + "# nodes " +
                     std::to_string(g.num_nodes()) + " edges " + std::to_string(g.num_edges()) + "\n";
  const auto edges = g.edges();
  text += format_edge_list(edges);
  ctx.write(a.out, text);
  ctx.log("generated " + to_string(spec.kind) + " with " + std::to_string(g.num_edges()) + " edges");
}

// ---- spectral / analyze ----

struct SpectralArgs {
  GraphInput graph;
  PowerIterationOptions power;
  std::string out;
};

void run_spectral(Context& ctx, SpectralArgs a) {
  ctx.manifest.config = {{"command", "spectral"}, {"graph", a.graph.path}, {"lcc", a.graph.lcc},
                         {"power", power_json(a.power)}, {"out", a.out}};
  a.power.seed = derive_seed(ctx.globals.seed, "power");
  PreparedGraph pg = prepare_graph(ctx, a.graph);
  SpectralResult r = power_iteration(pg.graph, a.power);
  emit_json(ctx,
            {{"lambda1", r.lambda1},
             {"iterations", r.iterations},
             {"residual", r.residual},
             {"connected", r.connected},
             {"nodes", pg.graph.num_nodes()},
             {"edges", pg.graph.num_edges()}},
            a.out);
}

void run_analyze(Context& ctx, SpectralArgs a) {
  ctx.manifest.config = {{"command", "analyze"}, {"graph", a.graph.path}, {"lcc", a.graph.lcc},
                         {"power", power_json(a.power)}, {"out", a.out}};
  a.power.seed = derive_seed(ctx.globals.seed, "power");
  PreparedGraph pg = prepare_graph(ctx, a.graph);
  const SparseGraph& g = pg.graph;
  std::size_t n_components = 0;
  component_labels(g, &n_components);
  json hist = json::array();
  for (auto [degree, count] : degree_histogram(g)) hist.push_back({degree, count});
  json doc = {{"load", pg.report.to_json()},
              {"nodes", g.num_nodes()},
              {"edges", g.num_edges()},
              {"components", n_components},
              {"max_degree", g.max_degree()},
              {"average_degree", g.average_degree()},
              {"degree_histogram", hist}};
  if (g.num_edges() > 0) {
    SpectralResult r = power_iteration(g, a.power);
    doc["lambda1"] = r.lambda1;
    doc["iterations"] = r.iterations;
    doc["residual"] = r.residual;
    doc["lower_bound"] = std::max(std::sqrt(static_cast<double>(g.max_degree())), g.average_degree());
    doc["upper_bound"] = static_cast<double>(g.max_degree());
  } else {
    doc["lambda1"] = 0.0;
  }
  emit_json(ctx, doc, a.out);
}

// ---- sis ----

struct SisArgs {
  GraphInput graph;
  SisConfig cfg;
  std::string out;
};

void run_sis(Context& ctx, SisArgs a) {
  ctx.manifest.config = {{"command", "sis"}, {"graph", a.graph.path}, {"lcc", a.graph.lcc},
                         {"tau", a.cfg.tau}, {"gamma", a.cfg.gamma}, {"rho", a.cfg.rho},
                         {"t_max", a.cfg.t_max}, {"runs", a.cfg.n_runs}, {"dt", a.cfg.sample_dt},
                         {"out", a.out}};
  a.cfg.seed = derive_seed(ctx.globals.seed, "sis");
  ctx.manifest.seeds["sis"] = a.cfg.seed;
  a.cfg.validate();
  PreparedGraph pg = prepare_graph(ctx, a.graph);
  SisTrace t = simulate_sis(pg.graph, a.cfg, ctx.globals.threads);
  std::string text = csv_preamble(ctx) + "# tau " + fmt(a.cfg.tau) + " gamma " + fmt(a.cfg.gamma) +
                     " rho " + fmt(a.cfg.rho) + " t_max " + fmt(a.cfg.t_max) + " runs " +
                     std::to_string(a.cfg.n_runs) + " dt " + fmt(a.cfg.sample_dt) + "\n" +
                     "time,mean_fraction,std_fraction\n";
  for (std::size_t k = 0; k < t.times.size(); ++k) {
    text += fmt(t.times[k]) + ',' + fmt(t.mean_fraction[k]) + ',' + fmt(t.std_fraction[k]) + '\n';
  }
  ctx.write(a.out, text);
  ctx.log("final mean fraction " + fmt(t.mean_fraction.back()));
}

// ---- gel ----

struct GelArgs {
  GraphInput graph;
  GellingOptions opts;
  std::string out;
  std::string trace;
};

void run_gel(Context& ctx, GelArgs a) {
  ctx.manifest.config = {{"command", "gel"}, {"graph", a.graph.path}, {"lcc", a.graph.lcc},
                         {"k", a.opts.k}, {"batch", a.opts.batch}, {"power", power_json(a.opts.power)},
                         {"out", a.out}, {"trace", a.trace}};
  a.opts.power.seed = derive_seed(ctx.globals.seed, "power");
  PreparedGraph pg = prepare_graph(ctx, a.graph);
  GellingSuggestion s = gelling_suggest(pg.graph, a.opts);
  for (const auto& w : s.warnings) ctx.log("warning: " + w);
  std::vector<Edge> edges;
  std::vector<double> scores;
  for (const auto& se : s.edges) {
    edges.push_back(se.edge);
    scores.push_back(se.score);
  }
  ctx.write(a.out, csv_preamble(ctx) + "# u v score\n" + format_edge_list(edges, scores, pg.ids));
  if (!a.trace.empty()) {
    std::string text = csv_preamble(ctx) + "edges_added,lambda1\n";
    for (auto [added, lambda] : s.lambda_trace) text += std::to_string(added) + ',' + fmt(lambda) + '\n';
    ctx.write(a.trace, text);
  }
  ctx.log("lambda1 " + fmt(s.lambda_trace.front().second) + " -> " + fmt(s.lambda_trace.back().second));
}

// ---- training and evaluation ----

struct DataArgs {
  std::string social;
  std::string interactions;
  std::string features_user;
  std::string features_item;
  std::size_t feature_dim = 8;
  double rating_threshold = 4.0;
};

struct ModelArgs {
  HyperParams hp;
  std::string pooling = "mean";
  std::string activation = "sigmoid";
  std::string alpha = "-inf";
};

struct ProtocolArgs {
  std::size_t eval_users = 1000;
  std::size_t eval_neg = 99;
  std::size_t top_n = 10;
  double threshold = 0.5;
  bool full_scan = false;
};

void add_data_flags(CLI::App* cmd, DataArgs& d) {
  cmd->add_option("--social", d.social, "social edge list")->required();
  cmd->add_option("--interactions", d.interactions, "user item [rating] rows")->required();
  cmd->add_option("--features-user", d.features_user, "user feature CSV");
  cmd->add_option("--features-item", d.features_item, "item feature CSV");
  cmd->add_option("--feature-dim", d.feature_dim, "random feature width when no file is given")
      ->capture_default_str();
  cmd->add_option("--rating-threshold", d.rating_threshold, "minimum rating counted as positive")
      ->capture_default_str();
}

void add_model_flags(CLI::App* cmd, ModelArgs& m) {
  cmd->add_option("--d", m.hp.dim, "embedding dimension")->capture_default_str();
  cmd->add_option("--k", m.hp.depth, "diffusion depth")->capture_default_str();
  cmd->add_option("--pooling", m.pooling, "mean or max")->capture_default_str();
  cmd->add_option("--activation", m.activation, "identity, relu, sigmoid or tanh")->capture_default_str();
  cmd->add_option("--alpha", m.alpha, "dissemination weight, or -inf")->capture_default_str();
  cmd->add_option("--lr", m.hp.lr, "SGD step size")->capture_default_str();
  cmd->add_option("--epochs", m.hp.epochs)->capture_default_str();
  cmd->add_option("--batch-size", m.hp.batch_size)->capture_default_str();
  cmd->add_option("--neg", m.hp.neg_per_user, "negatives per user per epoch")->capture_default_str();
  cmd->add_option("--eval-interval", m.hp.eval_interval, "validate every n epochs, 0 = never")
      ->capture_default_str();
}

void add_protocol_flags(CLI::App* cmd, ProtocolArgs& p) {
  cmd->add_option("--eval-users", p.eval_users)->capture_default_str();
  cmd->add_option("--eval-neg", p.eval_neg, "negatives per held-out positive")->capture_default_str();
  cmd->add_option("--top-n", p.top_n)->capture_default_str();
  cmd->add_option("--threshold", p.threshold, "raw score above which an edge is added")
      ->capture_default_str();
  cmd->add_flag("--full-scan", p.full_scan, "augment with every test-user/item pair");
}

json data_json(const DataArgs& d) {
  return {{"social", d.social},
          {"interactions", d.interactions},
          {"features_user", d.features_user},
          {"features_item", d.features_item},
          {"feature_dim", d.feature_dim},
          {"rating_threshold", d.rating_threshold}};
}

json protocol_json(const ProtocolArgs& p) {
  return {{"eval_users", p.eval_users}, {"eval_neg", p.eval_neg}, {"top_n", p.top_n},
          {"threshold", p.threshold}, {"full_scan", p.full_scan}};
}

HyperParams finish_hyper(const ModelArgs& m, std::uint64_t seed) {
  HyperParams hp = m.hp;
  hp.pooling = parse_pooling(m.pooling);
  hp.activation = parse_activation(m.activation);
  hp.alpha = Alpha::parse(m.alpha);
  hp.seed = seed;
  hp.validate();
  return hp;
}

EvalProtocol make_protocol(const ProtocolArgs& p, std::uint64_t seed) {
  if (p.top_n == 0) throw InputError("--top-n must be at least 1");
  if (p.eval_neg + 1 < p.top_n) throw InputError("--eval-neg + 1 must be at least --top-n");
  return {p.eval_users, p.eval_neg, p.top_n, seed};
}

struct LoadedData {
  Dataset ds;
  SplitDataset split;
};

// The split depends only on the training seed, so eval can rebuild it from
// the seed stored in a checkpoint.
LoadedData load_and_split(Context& ctx, const DataArgs& d, std::uint64_t train_seed) {
  DatasetOptions opts;
  opts.rating_threshold = d.rating_threshold;
  opts.random_feature_dim = d.feature_dim;
  opts.seed = train_seed;
  ctx.input(d.social);
  ctx.input(d.interactions);
  if (!d.features_user.empty()) {
    opts.user_features = d.features_user;
    ctx.input(d.features_user);
  }
  if (!d.features_item.empty()) {
    opts.item_features = d.features_item;
    ctx.input(d.features_item);
  }
  LoadedData out{load_dataset(d.social, d.interactions, opts), {}};
  for (const auto& w : out.ds.warnings) ctx.log("warning: " + w);
  const std::uint64_t split_seed = derive_seed(train_seed, "split");
  ctx.manifest.seeds["split"] = split_seed;
  out.split = split_dataset(out.ds.interactions, {}, split_seed);
  ctx.log("users " + std::to_string(out.split.n_users) + ", items " + std::to_string(out.split.n_items) +
          ", train/validation/test " + std::to_string(out.split.train.size()) + "/" +
          std::to_string(out.split.validation.size()) + "/" + std::to_string(out.split.test.size()) +
          ", features " + out.ds.features.source);
  return out;
}

std::string train_log_csv(const Context& ctx, const std::vector<TrainLogEntry>& log) {
  std::string text = csv_preamble(ctx) + "epoch,train_loss,val_hr,val_ndcg\n";
  for (const auto& e : log) {
    text += std::to_string(e.epoch) + ',' + fmt(e.train_loss) + ',' +
            (e.val_hr ? fmt(*e.val_hr) : std::string()) + ',' +
            (e.val_ndcg ? fmt(*e.val_ndcg) : std::string()) + '\n';
  }
  return text;
}

Validator make_validator(const SplitDataset& split, const EvalProtocol& protocol) {
  return [&split, protocol](const DiffNet& model) {
    Metrics m = validation_metrics(model, split, protocol);
    return std::pair{m.hr, m.ndcg};
  };
}

struct TrainArgs {
  DataArgs data;
  ModelArgs model;
  std::string checkpoint;
  std::string log;
};

void run_train(Context& ctx, const TrainArgs& a) {
  const HyperParams hp = finish_hyper(a.model, ctx.globals.seed);
  ctx.manifest.config = {{"command", "train"}, {"data", data_json(a.data)},
                         {"hyper", hyperparams_to_json(hp)}, {"checkpoint", a.checkpoint},
                         {"log", a.log}};
  LoadedData ld = load_and_split(ctx, a.data, hp.seed);
  TrainingData td{ld.ds.social, ld.ds.features, ld.split.train, ld.split.n_items};
  TrainResult tr = train(td, hp, make_validator(ld.split, EvalProtocol{1000, 99, 10, derive_seed(hp.seed, "validation")}));
  if (!tr.log.empty()) ctx.log("final train loss " + fmt(tr.log.back().train_loss));
  if (a.checkpoint.empty()) throw InputError("--checkpoint is required");
  fs::path ck(a.checkpoint);
  if (ck.has_parent_path()) fs::create_directories(ck.parent_path());
  save_checkpoint(ck, tr.model);
  ctx.wrote(ck);
  if (!a.log.empty()) ctx.write(a.log, train_log_csv(ctx, tr.log));
}

// Every item for every test user, one candidate row per user.
std::vector<Candidate> full_scan_candidates(const SplitDataset& split) {
  std::vector<Candidate> out;
  for (UserId u = 0; u < split.n_users; ++u) {
    auto items = split.test.items_of(u);
    if (items.empty()) continue;
    Candidate c{u, items.front(), {}};
    for (ItemId i = 0; i < split.n_items; ++i) {
      if (i != c.positive) c.negatives.push_back(i);
    }
    out.push_back(std::move(c));
  }
  return out;
}

json report_json(const EvalReport& r, const ProtocolArgs& p) {
  return {{"hr", r.metrics.hr},
          {"ndcg", r.metrics.ndcg},
          {"edges_added", r.augment.edges_added},
          {"lambda1_before", r.augment.lambda1_before},
          {"lambda1_after", r.augment.lambda1_after},
          {"users", r.metrics.users},
          {"positives", r.metrics.positives},
          {"protocol", protocol_json(p)}};
}

EvalReport evaluate_with(const DiffNet& model, const SplitDataset& split, const EvalProtocol& protocol,
                         const ProtocolArgs& p) {
  EvalReport report = evaluate_model(model, split, protocol, p.threshold);
  if (p.full_scan) {
    const ScoreTable table = model.scores();
    Scorer scorer = [&table](UserId u, ItemId i) { return table(u, i); };
    report.augment = augment_graph(scorer, full_scan_candidates(split), model.social(), split.n_items,
                                   p.threshold);
  }
  return report;
}

struct EvalArgs {
  DataArgs data;
  std::string checkpoint;
  ProtocolArgs protocol;
  std::string out;
};

void run_eval(Context& ctx, const EvalArgs& a) {
  ctx.manifest.config = {{"command", "eval"}, {"data", data_json(a.data)}, {"checkpoint", a.checkpoint},
                         {"protocol", protocol_json(a.protocol)}, {"out", a.out}};
  ctx.input(a.checkpoint);
  Checkpoint ck = load_checkpoint(a.checkpoint);
  ctx.manifest.seeds["train"] = ck.hyper.seed;
  LoadedData ld = load_and_split(ctx, a.data, ck.hyper.seed);
  if (static_cast<std::size_t>(ck.features.users.rows()) != ld.split.n_users ||
      static_cast<std::size_t>(ck.features.items.rows()) != ld.split.n_items) {
    throw InputError("checkpoint was trained on " + std::to_string(ck.features.users.rows()) + " users / " +
                     std::to_string(ck.features.items.rows()) + " items, dataset has " +
                     std::to_string(ld.split.n_users) + " / " + std::to_string(ld.split.n_items));
  }
  DiffNet model(ld.ds.social, ck.features, ld.split.train, ld.split.n_items, ck.hyper);
  model.params() = ck.params;
  const EvalProtocol protocol = make_protocol(a.protocol, derive_seed(ctx.globals.seed, "eval"));
  ctx.manifest.seeds["eval"] = protocol.seed;
  ctx.log("eval negatives per positive: " + std::to_string(protocol.neg_per_positive));
  emit_json(ctx, report_json(evaluate_with(model, ld.split, protocol, a.protocol), a.protocol), a.out);
}

struct ParetoArgs {
  DataArgs data;
  ModelArgs model;
  ProtocolArgs protocol;
  std::string alphas = "3,2,1,0,-1,-2,-3,-inf";
  std::string out = "pareto.csv";
  std::string checkpoint_dir;
};

std::vector<Alpha> parse_alphas(const std::string& text) {
  std::vector<Alpha> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok.erase(0, tok.find_first_not_of(" \t"));
    tok.erase(tok.find_last_not_of(" \t") + 1);
    if (!tok.empty()) out.push_back(Alpha::parse(tok));
  }
  if (out.empty()) throw InputError("--alphas lists no values");
  return out;
}

void run_pareto(Context& ctx, const ParetoArgs& a) {
  const HyperParams hp = finish_hyper(a.model, ctx.globals.seed);
  const auto alphas = parse_alphas(a.alphas);
  ctx.manifest.config = {{"command", "pareto"}, {"data", data_json(a.data)},
                         {"hyper", hyperparams_to_json(hp)}, {"alphas", a.alphas},
                         {"protocol", protocol_json(a.protocol)}, {"out", a.out},
                         {"checkpoint_dir", a.checkpoint_dir}};
  LoadedData ld = load_and_split(ctx, a.data, hp.seed);
  const EvalProtocol protocol = make_protocol(a.protocol, derive_seed(ctx.globals.seed, "eval"));
  ctx.manifest.seeds["eval"] = protocol.seed;
  TrainingData td{ld.ds.social, ld.ds.features, ld.split.train, ld.split.n_items};

  std::vector<ParetoPoint> points;
  for (const Alpha& alpha : alphas) {
    HyperParams h = hp;
    h.alpha = alpha;
    TrainResult tr = train(td, h);
    EvalReport r = evaluate_with(tr.model, ld.split, protocol, a.protocol);
    points.push_back({alpha, r.augment.edges_added, r.metrics.hr, r.metrics.ndcg, r.augment.lambda1_after});
    ctx.log("alpha " + alpha.to_string() + ": hr " + fmt(r.metrics.hr) + ", edges " +
            std::to_string(r.augment.edges_added) + ", lambda1 " + fmt(r.augment.lambda1_after));
    if (!a.checkpoint_dir.empty()) {
      fs::create_directories(a.checkpoint_dir);
      fs::path ck = fs::path(a.checkpoint_dir) / ("alpha_" + alpha.to_string() + ".ckpt");
      save_checkpoint(ck, tr.model);
      ctx.wrote(ck);
    }
  }
  ctx.write(a.out, pareto_csv(points, ctx.id()));
}

// ---- synth-data ----

struct SynthArgs {
  SyntheticDatasetSpec spec;
  std::string out_dir;
};

void run_synth(Context& ctx, SynthArgs a) {
  ctx.manifest.config = {{"command", "synth-data"}, {"users", a.spec.n_users}, {"items", a.spec.n_items},
                         {"blocks", a.spec.n_blocks}, {"in_rate", a.spec.in_rate},
                         {"cross_rate", a.spec.cross_rate}, {"social_rate", a.spec.social_rate},
                         {"out_dir", a.out_dir}};
  a.spec.seed = derive_seed(ctx.globals.seed, "synthetic");
  SyntheticDataset ds = gen_synthetic_dataset(a.spec);
  fs::create_directories(a.out_dir);
  for (const auto& p : write_synthetic_dataset(ds, a.out_dir)) ctx.wrote(p);
  ctx.log(std::to_string(ds.interactions.positives.size()) + " positives, " +
          std::to_string(ds.social.num_edges()) + " social edges");
}

// ---- fetch-instructions ----

void run_fetch(Context& ctx, const std::vector<std::string>& check) {
  ctx.manifest.config = {{"command", "fetch-instructions"}, {"check", check}};
  std::cout <<
      "Real datasets are not bundled and are never downloaded by this tool.\n"
      "\n"
      "Yelp social recommendation data\n"
      "  Obtain the Yelp dataset from the Yelp Open Dataset program under its own license.\n"
      "  Convert it to:\n"
      "    social.txt        one friendship per line: <user_id> <user_id>\n"
      "    interactions.txt  one rating per line: <user_id> <business_id> <stars>\n"
      "  Ratings >= --rating-threshold (default 4) count as positives.\n"
      "\n"
      "CA-HepTh collaboration network\n"
      "  Obtain ca-HepTh.txt from the SNAP collection (Stanford Large Network Dataset Collection).\n"
      "  The file is already in the edge-list format read by --graph; use --lcc.\n"
      "\n"
      "No reference digests are published with this tool. Pass --check FILE to print the\n"
      "SHA-256 of local copies so runs can be pinned in their manifests.\n";
  for (const auto& f : check) {
    ctx.input(f);
    std::cout << sha256_file(f) << "  " << f << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"disrec: dissemination-aware social recommendation and graph spectral tools"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals globals;
  app.add_option("--seed", globals.seed, "root seed for every random substream")->capture_default_str();
  app.add_option("--threads", globals.threads, "worker threads for simulation")->capture_default_str();
  app.add_option("--manifest-dir", globals.manifest_dir, "where the run manifest is written")
      ->capture_default_str();
  app.add_flag("--quiet", globals.quiet, "suppress progress messages");

  std::function<void(Context&)> action;

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic graph");
  gen_cmd->add_option("--kind", gen.kind, "stars, next_k, erdos_renyi or barabasi_albert")->required();
  gen_cmd->add_option("--nodes", gen.nodes)->required();
  gen_cmd->add_option("--edges", gen.edges)->required();
  gen_cmd->add_option("--out", gen.out, "edge list output")->required();
  gen_cmd->callback([&] { action = [&](Context& c) { run_gen(c, gen); }; });

  SpectralArgs spec;
  auto* spec_cmd = app.add_subcommand("spectral", "largest adjacency eigenvalue of a graph");
  add_graph_flags(spec_cmd, spec.graph);
  add_power_flags(spec_cmd, spec.power);
  spec_cmd->add_option("--out", spec.out, "also write the JSON here");
  spec_cmd->callback([&] { action = [&](Context& c) { run_spectral(c, spec); }; });

  SpectralArgs an;
  auto* an_cmd = app.add_subcommand("analyze", "degree histogram, components and lambda1");
  add_graph_flags(an_cmd, an.graph);
  add_power_flags(an_cmd, an.power);
  an_cmd->add_option("--out", an.out, "also write the JSON here");
  an_cmd->callback([&] { action = [&](Context& c) { run_analyze(c, an); }; });

  SisArgs sis;
  auto* sis_cmd = app.add_subcommand("sis", "SIS epidemic simulation");
  add_graph_flags(sis_cmd, sis.graph);
  sis_cmd->add_option("--tau", sis.cfg.tau)->capture_default_str();
  sis_cmd->add_option("--gamma", sis.cfg.gamma)->capture_default_str();
  sis_cmd->add_option("--rho", sis.cfg.rho, "initially infected fraction")->capture_default_str();
  sis_cmd->add_option("--t-max", sis.cfg.t_max)->capture_default_str();
  sis_cmd->add_option("--runs", sis.cfg.n_runs)->capture_default_str();
  sis_cmd->add_option("--dt", sis.cfg.sample_dt, "sampling interval")->capture_default_str();
  sis_cmd->add_option("--out", sis.out, "CSV output")->required();
  sis_cmd->callback([&] { action = [&](Context& c) { run_sis(c, sis); }; });

  GelArgs gel;
  auto* gel_cmd = app.add_subcommand("gel", "suggest edges that raise lambda1");
  add_graph_flags(gel_cmd, gel.graph);
  gel_cmd->add_option("--k", gel.opts.k, "edges to suggest")->capture_default_str();
  gel_cmd->add_option("--batch", gel.opts.batch, "edges per eigenvector refresh")->capture_default_str();
  add_power_flags(gel_cmd, gel.opts.power);
  gel_cmd->add_option("--out", gel.out, "suggested edges with scores")->required();
  gel_cmd->add_option("--trace", gel.trace, "CSV of lambda1 against edges added");
  gel_cmd->callback([&] { action = [&](Context& c) { run_gel(c, gel); }; });

  TrainArgs tr;
  auto* tr_cmd = app.add_subcommand("train", "train the recommender");
  add_data_flags(tr_cmd, tr.data);
  add_model_flags(tr_cmd, tr.model);
  tr_cmd->add_option("--checkpoint", tr.checkpoint, "model output")->required();
  tr_cmd->add_option("--log", tr.log, "per-epoch CSV");
  tr_cmd->callback([&] { action = [&](Context& c) { run_train(c, tr); }; });

  EvalArgs ev;
  auto* ev_cmd = app.add_subcommand("eval", "rank held-out positives and augment the graph");
  add_data_flags(ev_cmd, ev.data);
  ev_cmd->add_option("--checkpoint", ev.checkpoint)->required();
  add_protocol_flags(ev_cmd, ev.protocol);
  ev_cmd->add_option("--out", ev.out, "also write the JSON report here");
  ev_cmd->callback([&] { action = [&](Context& c) { run_eval(c, ev); }; });

  ParetoArgs pa;
  auto* pa_cmd = app.add_subcommand("pareto", "train and evaluate one model per alpha");
  add_data_flags(pa_cmd, pa.data);
  add_model_flags(pa_cmd, pa.model);
  add_protocol_flags(pa_cmd, pa.protocol);
  pa_cmd->add_option("--alphas", pa.alphas, "comma separated, -inf allowed")->capture_default_str();
  pa_cmd->add_option("--out", pa.out, "CSV output")->capture_default_str();
  pa_cmd->add_option("--checkpoint-dir", pa.checkpoint_dir, "write one checkpoint per alpha");
  pa_cmd->callback([&] { action = [&](Context& c) { run_pareto(c, pa); }; });

  SynthArgs sy;
  auto* sy_cmd = app.add_subcommand("synth-data", "write a planted-block recommendation dataset");
  sy_cmd->add_option("--users", sy.spec.n_users)->capture_default_str();
  sy_cmd->add_option("--items", sy.spec.n_items)->capture_default_str();
  sy_cmd->add_option("--blocks", sy.spec.n_blocks)->capture_default_str();
  sy_cmd->add_option("--in-rate", sy.spec.in_rate)->capture_default_str();
  sy_cmd->add_option("--cross-rate", sy.spec.cross_rate)->capture_default_str();
  sy_cmd->add_option("--social-rate", sy.spec.social_rate)->capture_default_str();
  sy_cmd->add_option("--out-dir", sy.out_dir)->required();
  sy_cmd->callback([&] { action = [&](Context& c) { run_synth(c, sy); }; });

  std::vector<std::string> check;
  auto* fe_cmd = app.add_subcommand("fetch-instructions", "where to obtain the real datasets");
  fe_cmd->add_option("--check", check, "print the SHA-256 of local files");
  fe_cmd->callback([&] { action = [&](Context& c) { run_fetch(c, check); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const auto start = std::chrono::steady_clock::now();
  try {
    Context ctx(globals, std::vector<std::string>(argv + 1, argv + argc));
    action(ctx);
    ctx.finish(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << " (last residual " << e.last_residual() << ")\n";
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

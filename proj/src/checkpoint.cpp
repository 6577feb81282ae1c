#include <bit>
#include <cstring>

#include "disrec/errors.hpp"
#include "disrec/io.hpp"

namespace disrec {
namespace {

constexpr char kMagic[8] = {'D', 'I', 'S', 'R', 'E', 'C', 'K', '1'};

void put_u64(std::string& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

std::uint64_t get_u64(const std::string& in, std::size_t& pos) {
  if (pos + 8 > in.size()) throw InputError("checkpoint truncated");
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= std::uint64_t{static_cast<unsigned char>(in[pos + b])} << (8 * b);
  pos += 8;
  return v;
}

void put_matrix(std::string& out, const Matrix& m) {
  for (Eigen::Index k = 0; k < m.size(); ++k) put_u64(out, std::bit_cast<std::uint64_t>(m.data()[k]));
}

Matrix get_matrix(const std::string& in, std::size_t& pos, std::size_t rows, std::size_t cols) {
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = std::bit_cast<double>(get_u64(in, pos));
  return m;
}

}  // namespace

nlohmann::json hyperparams_to_json(const HyperParams& hp) {
  return {{"dim", hp.dim},
          {"depth", hp.depth},
          {"pooling", to_string(hp.pooling)},
          {"activation", to_string(hp.activation)},
          {"alpha", hp.alpha.to_string()},
          {"lr", hp.lr},
          {"epochs", hp.epochs},
          {"batch_size", hp.batch_size},
          {"neg_per_user", hp.neg_per_user},
          {"seed", hp.seed},
          {"eval_interval", hp.eval_interval}};
}

HyperParams hyperparams_from_json(const nlohmann::json& j) {
  HyperParams hp;
  try {
    hp.dim = j.at("dim").get<std::size_t>();
    hp.depth = j.at("depth").get<std::size_t>();
    hp.pooling = parse_pooling(j.at("pooling").get<std::string>());
    hp.activation = parse_activation(j.at("activation").get<std::string>());
    hp.alpha = Alpha::parse(j.at("alpha").get<std::string>());
    hp.lr = j.at("lr").get<double>();
    hp.epochs = j.at("epochs").get<std::size_t>();
    hp.batch_size = j.at("batch_size").get<std::size_t>();
    hp.neg_per_user = j.at("neg_per_user").get<std::size_t>();
    hp.seed = j.at("seed").get<std::uint64_t>();
    hp.eval_interval = j.value("eval_interval", std::size_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad hyperparameter block: ") + e.what());
  }
  return hp;
}

std::string encode_checkpoint(const HyperParams& hp, const FeatureSet& features,
                              const ModelParams& params) {
  nlohmann::json tensors = nlohmann::json::array();
  std::vector<const Matrix*> order{&features.users, &features.items};
  tensors.push_back({{"name", "X"}, {"rows", features.users.rows()}, {"cols", features.users.cols()}});
  tensors.push_back({{"name", "Y"}, {"rows", features.items.rows()}, {"cols", features.items.cols()}});
  for (const auto& [name, m] : params.tensors()) {
    tensors.push_back({{"name", name}, {"rows", m->rows()}, {"cols", m->cols()}});
    order.push_back(m);
  }
  nlohmann::json header = {{"format", 1},
                           {"hyper", hyperparams_to_json(hp)},
                           {"seed", hp.seed},
                           {"feature_source", features.source},
                           {"tensors", tensors}};
  const std::string h = header.dump();
  std::string out(kMagic, sizeof(kMagic));
  put_u64(out, h.size());
  out += h;
  for (const Matrix* m : order) put_matrix(out, *m);
  return out;
}

void save_checkpoint(const fs::path& path, const DiffNet& model) {
  atomic_write(path, encode_checkpoint(model.hyper(), model.features(), model.params()));
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw InputError("not a checkpoint file (bad magic)");
  }
  std::size_t pos = sizeof(kMagic);
  const std::uint64_t hlen = get_u64(bytes, pos);
  if (pos + hlen > bytes.size()) throw InputError("checkpoint header truncated");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(pos, hlen));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("checkpoint header is not valid JSON: ") + e.what());
  }
  pos += hlen;
  Checkpoint ck;
  ck.hyper = hyperparams_from_json(header.at("hyper"));
  ck.features.source = header.value("feature_source", std::string("checkpoint"));
  for (const auto& t : header.at("tensors")) {
    const auto name = t.at("name").get<std::string>();
    Matrix m = get_matrix(bytes, pos, t.at("rows").get<std::size_t>(), t.at("cols").get<std::size_t>());
    if (name == "X") ck.features.users = std::move(m);
    else if (name == "Y") ck.features.items = std::move(m);
    else if (name == "P") ck.params.P = std::move(m);
    else if (name == "Q") ck.params.Q = std::move(m);
    else if (name == "W_user") ck.params.W_user = std::move(m);
    else if (name == "W_item") ck.params.W_item = std::move(m);
    else if (name.rfind("W_diff", 0) == 0) ck.params.W_diff.push_back(std::move(m));
    else throw InputError("checkpoint has unknown tensor '" + name + "'");
  }
  if (pos != bytes.size()) throw InputError("checkpoint has trailing bytes");
  if (ck.params.W_diff.size() != ck.hyper.depth) throw InputError("checkpoint depth mismatch");
  return ck;
}

Checkpoint load_checkpoint(const fs::path& path) { return decode_checkpoint(read_file(path)); }

}  // namespace disrec

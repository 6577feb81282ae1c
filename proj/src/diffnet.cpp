#include "disrec/diffnet.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <sstream>

#include "disrec/errors.hpp"
#include "disrec/rng.hpp"

namespace disrec {

Pooling parse_pooling(std::string_view name) {
  if (name == "mean") return Pooling::mean;
  if (name == "max") return Pooling::max;
  throw InputError("unknown pooling '" + std::string(name) + "' (mean|max)");
}

Activation parse_activation(std::string_view name) {
  if (name == "identity") return Activation::identity;
  if (name == "relu") return Activation::relu;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "tanh") return Activation::tanh;
  throw InputError("unknown nonlinearity '" + std::string(name) + "' (identity|relu|sigmoid|tanh)");
}

std::string to_string(Pooling p) { return p == Pooling::mean ? "mean" : "max"; }

std::string to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
  }
  return "?";
}

Alpha Alpha::finite(double value) {
  if (!std::isfinite(value)) throw InputError("alpha must be finite or the -inf sentinel");
  Alpha a;
  a.neg_inf_ = false;
  a.value_ = value;
  return a;
}

Alpha Alpha::parse(std::string_view text) {
  if (text == "-inf" || text == "-Inf" || text == "-INF" || text == "neg_inf") return neg_inf();
  std::string s(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw InputError("cannot parse alpha '" + s + "'");
  return finite(v);
}

std::string Alpha::to_string() const {
  if (neg_inf_) return "-inf";
  std::ostringstream os;
  os.precision(17);
  os << value_;
  return os.str();
}

double dissemination_factor(Alpha alpha, double lambda) {
  if (alpha.is_neg_inf()) return 1.0;
  const double a = alpha.value();
  if (a > 0.0) {
    // divide through by e^alpha to stay finite for large alpha
    const double w = std::exp(-a);
    return (w + lambda) / (w + 1.0);
  }
  const double e = std::exp(a);
  return (1.0 + lambda * e) / (1.0 + e);
}

void HyperParams::validate() const {
  if (dim < 1) throw InputError("embedding dimension D must be >= 1");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw InputError("learning rate must be finite and >= 0");
  if (batch_size < 1) throw InputError("batch size must be >= 1");
}

FeatureSet FeatureSet::random(std::size_t n_users, std::size_t n_items, std::size_t user_dim,
                              std::size_t item_dim, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "features"));
  std::normal_distribution<double> normal(0.0, 1.0);
  FeatureSet f;
  f.users.resize(static_cast<Eigen::Index>(n_users), static_cast<Eigen::Index>(user_dim));
  f.items.resize(static_cast<Eigen::Index>(n_items), static_cast<Eigen::Index>(item_dim));
  for (Eigen::Index k = 0; k < f.users.size(); ++k) f.users.data()[k] = normal(rng);
  for (Eigen::Index k = 0; k < f.items.size(); ++k) f.items.data()[k] = normal(rng);
  f.source = "random(seed=" + std::to_string(seed) + ", user_dim=" + std::to_string(user_dim) +
             ", item_dim=" + std::to_string(item_dim) + ")";
  return f;
}

std::vector<std::pair<std::string, Matrix*>> ModelParams::tensors() {
  std::vector<std::pair<std::string, Matrix*>> out{
      {"P", &P}, {"Q", &Q}, {"W_user", &W_user}, {"W_item", &W_item}};
  for (std::size_t k = 0; k < W_diff.size(); ++k) out.emplace_back("W_diff" + std::to_string(k), &W_diff[k]);
  return out;
}

std::vector<std::pair<std::string, const Matrix*>> ModelParams::tensors() const {
  std::vector<std::pair<std::string, const Matrix*>> out;
  for (auto& [name, ptr] : const_cast<ModelParams*>(this)->tensors()) out.emplace_back(name, ptr);
  return out;
}

double ScoreTable::operator()(UserId a, ItemId i) const {
  if (a >= U.rows() || i >= V.rows()) {
    throw InputError("predict: unknown user " + std::to_string(a) + " or item " + std::to_string(i));
  }
  return V.row(i).dot(U.row(a));
}

namespace {

void activate(Matrix& m, Activation g) {
  switch (g) {
    case Activation::identity: break;
    case Activation::relu: m = m.cwiseMax(0.0); break;
    case Activation::sigmoid: m = (1.0 + (-m.array()).exp()).inverse().matrix(); break;
    case Activation::tanh: m = m.array().tanh().matrix(); break;
  }
}

// Elementwise derivative, expressed through the activation output.
Matrix derivative_from_output(const Matrix& out, Activation g) {
  switch (g) {
    case Activation::identity: return Matrix::Ones(out.rows(), out.cols());
    case Activation::relu: return (out.array() > 0.0).cast<double>().matrix();
    case Activation::sigmoid: return (out.array() * (1.0 - out.array())).matrix();
    case Activation::tanh: return (1.0 - out.array().square()).matrix();
  }
  return {};
}

Matrix concat_cols(const Matrix& left, const Matrix& right) {
  Matrix out(left.rows(), left.cols() + right.cols());
  out.leftCols(left.cols()) = left;
  out.rightCols(right.cols()) = right;
  return out;
}

void xavier(Matrix& w, Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> u(-bound, bound);
  w.resize(rows, cols);
  for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = u(rng);
}

void gaussian(Matrix& w, Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 0.1);
  w.resize(rows, cols);
  for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = normal(rng);
}

}  // namespace

struct DiffNet::Forward {
  Matrix user_in;               // [X | P]
  Matrix item_in;               // [Y | Q]
  Matrix V;                     // fused items
  std::vector<Matrix> h;        // h[0] fused users ... h[K]
  std::vector<Matrix> concat;   // per layer: [pooled | h[k]]
  std::vector<std::vector<NodeId>> argmax;  // max pooling winners, row-major M x D
  Matrix U;
};

DiffNet::DiffNet(SparseGraph social, FeatureSet features, const Partition& train,
                 std::size_t n_items, HyperParams hp)
    : social_(std::move(social)), features_(std::move(features)), n_items_(n_items), hp_(std::move(hp)) {
  hp_.validate();
  train.require(Split::train, "DiffNet");
  const std::size_t m = social_.num_nodes();
  if (train.n_users() != m) throw InputError("DiffNet: training partition and social graph disagree on M");
  if (static_cast<std::size_t>(features_.users.rows()) != m ||
      static_cast<std::size_t>(features_.items.rows()) != n_items) {
    throw InputError("DiffNet: feature rows do not match user/item counts");
  }
  history_.resize(m);
  for (UserId u = 0; u < m; ++u) {
    auto items = train.items_of(u);
    history_[u].assign(items.begin(), items.end());
    for (ItemId i : items) {
      if (i >= n_items) throw InputError("DiffNet: training item index out of range");
    }
  }
  const auto D = static_cast<Eigen::Index>(hp_.dim);
  params_.P = Matrix::Zero(static_cast<Eigen::Index>(m), D);
  params_.Q = Matrix::Zero(static_cast<Eigen::Index>(n_items), D);
  params_.W_user = Matrix::Zero(features_.users.cols() + D, D);
  params_.W_item = Matrix::Zero(features_.items.cols() + D, D);
  params_.W_diff.assign(hp_.depth, Matrix::Zero(2 * D, D));
}

void DiffNet::initialize(std::uint64_t seed) {
  Rng rng(seed);
  const auto D = static_cast<Eigen::Index>(hp_.dim);
  gaussian(params_.P, params_.P.rows(), D, rng);
  gaussian(params_.Q, params_.Q.rows(), D, rng);
  xavier(params_.W_user, params_.W_user.rows(), D, rng);
  xavier(params_.W_item, params_.W_item.rows(), D, rng);
  for (auto& w : params_.W_diff) xavier(w, 2 * D, D, rng);
}

DiffNet::Forward DiffNet::forward() const {
  const auto& p = params_;
  const auto D = static_cast<Eigen::Index>(hp_.dim);
  const Eigen::Index M = p.P.rows();
  Forward f;
  f.user_in = concat_cols(features_.users, p.P);
  f.item_in = concat_cols(features_.items, p.Q);
  f.h.push_back(f.user_in * p.W_user);
  activate(f.h.back(), hp_.activation);
  f.V = f.item_in * p.W_item;
  activate(f.V, hp_.activation);

  for (std::size_t k = 0; k < hp_.depth; ++k) {
    const Matrix& hk = f.h.back();
    Matrix pooled = Matrix::Zero(M, D);  // empty trusted set pools to zero
    std::vector<NodeId> winners;
    if (hp_.pooling == Pooling::max) winners.assign(static_cast<std::size_t>(M * D), kNoNode);
    for (NodeId a = 0; a < M; ++a) {
      auto nb = social_.neighbors(a);
      if (nb.empty()) continue;
      if (hp_.pooling == Pooling::mean) {
        for (NodeId b : nb) pooled.row(a) += hk.row(b);
        pooled.row(a) /= static_cast<double>(nb.size());
      } else {
        for (Eigen::Index d = 0; d < D; ++d) {
          NodeId best = nb[0];
          for (NodeId b : nb) {
            if (hk(b, d) > hk(best, d)) best = b;
          }
          pooled(a, d) = hk(best, d);
          winners[static_cast<std::size_t>(a * D + d)] = best;
        }
      }
    }
    f.concat.push_back(concat_cols(pooled, hk));
    f.argmax.push_back(std::move(winners));
    Matrix next = f.concat.back() * p.W_diff[k];
    activate(next, hp_.activation);
    f.h.push_back(std::move(next));
  }

  f.U = f.h.back();
  for (NodeId a = 0; a < M; ++a) {
    const auto& hist = history_[a];
    if (hist.empty()) continue;
    Eigen::RowVectorXd avg = Eigen::RowVectorXd::Zero(D);
    for (ItemId i : hist) avg += f.V.row(i);
    f.U.row(a) += avg / static_cast<double>(hist.size());
  }
  return f;
}

ScoreTable DiffNet::scores() const {
  Forward f = forward();
  return ScoreTable{std::move(f.U), std::move(f.V)};
}

double DiffNet::predict(UserId a, ItemId i) const {
  if (a >= n_users() || i >= n_items_) {
    throw InputError("predict: unknown user " + std::to_string(a) + " or item " + std::to_string(i));
  }
  return scores()(a, i);
}

LossAndGrads DiffNet::loss_and_grads(std::span<const Sample> batch, const DisseminationScores* lambda,
                                     std::size_t batch_index) const {
  if (!hp_.alpha.is_neg_inf() && lambda == nullptr) {
    throw InputError("loss_and_grads: finite alpha needs dissemination scores");
  }
  if (batch.empty()) throw InputError("loss_and_grads: empty batch");
  const Forward f = forward();
  const auto D = static_cast<Eigen::Index>(hp_.dim);
  const Eigen::Index M = params_.P.rows();
  const double inv_b = 1.0 / static_cast<double>(batch.size());

  Matrix dU = Matrix::Zero(M, D);
  Matrix dV = Matrix::Zero(params_.Q.rows(), D);
  std::vector<char> touched(static_cast<std::size_t>(M), 0);
  double loss = 0.0;
  for (const Sample& s : batch) {
    if (s.user >= M || s.item >= n_items_) {
      throw InputError("loss_and_grads: sample (" + std::to_string(s.user) + "," +
                       std::to_string(s.item) + ") out of range");
    }
    const double r = f.V.row(s.item).dot(f.U.row(s.user));
    const double w = hp_.alpha.is_neg_inf() ? 1.0 : dissemination_factor(hp_.alpha, (*lambda)(s.user, s.item));
    const double err = s.label - r;
    loss += 0.5 * w * err * err;
    const double coef = -w * err * inv_b;
    dU.row(s.user) += coef * f.V.row(s.item);
    dV.row(s.item) += coef * f.U.row(s.user);
    touched[s.user] = 1;
  }
  loss *= inv_b;
  if (!std::isfinite(loss)) {
    throw NumericalError("non-finite loss in batch " + std::to_string(batch_index));
  }

  // u_a = h_a^K + mean of v_j over R_a
  for (NodeId a = 0; a < M; ++a) {
    if (!touched[a] || history_[a].empty()) continue;
    const Eigen::RowVectorXd share = dU.row(a) / static_cast<double>(history_[a].size());
    for (ItemId j : history_[a]) dV.row(j) += share;
  }

  LossAndGrads out;
  out.loss = loss;
  auto& g = out.grads;
  g.W_diff.resize(hp_.depth);

  Matrix dH = std::move(dU);
  for (std::size_t k = hp_.depth; k-- > 0;) {
    const Matrix dZ = dH.cwiseProduct(derivative_from_output(f.h[k + 1], hp_.activation));
    g.W_diff[k] = f.concat[k].transpose() * dZ;
    const Matrix dC = dZ * params_.W_diff[k].transpose();
    Matrix dPrev = dC.rightCols(D);
    if (hp_.pooling == Pooling::mean) {
      for (NodeId a = 0; a < M; ++a) {
        auto nb = social_.neighbors(a);
        if (nb.empty()) continue;
        const Eigen::RowVectorXd share = dC.row(a).leftCols(D) / static_cast<double>(nb.size());
        for (NodeId b : nb) dPrev.row(b) += share;
      }
    } else {
      const auto& winners = f.argmax[k];
      for (NodeId a = 0; a < M; ++a) {
        for (Eigen::Index d = 0; d < D; ++d) {
          NodeId b = winners[static_cast<std::size_t>(a * D + d)];
          if (b != kNoNode) dPrev(b, d) += dC(a, d);
        }
      }
    }
    dH = std::move(dPrev);
  }

  const Matrix dZu = dH.cwiseProduct(derivative_from_output(f.h[0], hp_.activation));
  g.W_user = f.user_in.transpose() * dZu;
  g.P = (dZu * params_.W_user.transpose()).rightCols(D);
  const Matrix dZi = dV.cwiseProduct(derivative_from_output(f.V, hp_.activation));
  g.W_item = f.item_in.transpose() * dZi;
  g.Q = (dZi * params_.W_item.transpose()).rightCols(D);
  return out;
}

TrainResult train(const TrainingData& data, const HyperParams& hp, const Validator& validate) {
  data.train.require(Split::train, "train");
  TrainResult result{DiffNet(data.social, data.features, data.train, data.n_items, hp), {}};
  DiffNet& model = result.model;
  model.initialize(derive_seed(hp.seed, "init"));

  std::optional<DisseminationScores> lambda;
  if (!hp.alpha.is_neg_inf()) {
    lambda = dissemination_scores(combine(data.social, data.train.pairs(), data.n_items));
  }

  const std::size_t m = data.social.num_nodes();
  const Partition* observed[] = {&data.train};
  NegativeSampler sampler(observed, m, data.n_items);
  std::vector<UserId> active;
  for (UserId u = 0; u < m; ++u) {
    if (!data.train.items_of(u).empty() && sampler.unobserved_count(u) > 0) active.push_back(u);
  }

  std::vector<Sample> samples;
  for (std::size_t epoch = 1; epoch <= hp.epochs; ++epoch) {
    samples.clear();
    for (const auto& p : data.train.pairs()) samples.push_back({p.user, p.item, 1.0});
    Rng neg_rng(derive_seed(hp.seed, "negatives", epoch));
    for (UserId u : active) {
      for (ItemId i : sampler.draw_distinct(u, hp.neg_per_user, neg_rng)) samples.push_back({u, i, 0.0});
    }
    Rng shuffle_rng(derive_seed(hp.seed, "shuffle", epoch));
    std::shuffle(samples.begin(), samples.end(), shuffle_rng);

    double total = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t lo = 0; lo < samples.size(); lo += hp.batch_size, ++batch_index) {
      const std::size_t hi = std::min(samples.size(), lo + hp.batch_size);
      std::span<const Sample> batch(samples.data() + lo, hi - lo);
      LossAndGrads lg;
      try {
        lg = model.loss_and_grads(batch, lambda ? &*lambda : nullptr, batch_index);
      } catch (const NumericalError& e) {
        throw NumericalError("training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
      }
      total += lg.loss * static_cast<double>(batch.size());
      auto params = model.params().tensors();
      auto grads = lg.grads.tensors();
      for (std::size_t t = 0; t < params.size(); ++t) *params[t].second -= hp.lr * *grads[t].second;
    }
    TrainLogEntry entry;
    entry.epoch = epoch;
    entry.train_loss = samples.empty() ? 0.0 : total / static_cast<double>(samples.size());
    if (validate && hp.eval_interval > 0 && epoch % hp.eval_interval == 0) {
      auto [hr, ndcg] = validate(model);
      entry.val_hr = hr;
      entry.val_ndcg = ndcg;
    }
    result.log.push_back(entry);
  }
  return result;
}

}  // namespace disrec

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "disrec/graph.hpp"
#include "disrec/interactions.hpp"
#include "disrec/spectral.hpp"

namespace disrec {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Pooling { mean, max };
enum class Activation { identity, relu, sigmoid, tanh };

Pooling parse_pooling(std::string_view name);
Activation parse_activation(std::string_view name);
std::string to_string(Pooling p);
std::string to_string(Activation a);

// Dissemination weight exponent. Negative infinity is a distinct state, not
// a large negative number, so the vanilla objective is reproduced exactly.
class Alpha {
 public:
  static Alpha neg_inf() { return Alpha(); }
  static Alpha finite(double value);
  static Alpha parse(std::string_view text);  // "-inf" or a decimal number

  bool is_neg_inf() const { return neg_inf_; }
  double value() const { return value_; }
  std::string to_string() const;

  friend bool operator==(const Alpha&, const Alpha&) = default;

 private:
  Alpha() = default;
  bool neg_inf_ = true;
  double value_ = 0.0;
};

// S_alpha(lambda) = (1 + lambda e^alpha) / (1 + e^alpha).
double dissemination_factor(Alpha alpha, double lambda);

struct HyperParams {
  std::size_t dim = 16;
  std::size_t depth = 2;
  Pooling pooling = Pooling::mean;
  Activation activation = Activation::sigmoid;
  Alpha alpha = Alpha::neg_inf();
  double lr = 0.005;
  std::size_t epochs = 500;
  std::size_t batch_size = 512;
  std::size_t neg_per_user = 8;
  std::uint64_t seed = 0;
  std::size_t eval_interval = 0;  // validation every n epochs, 0 = never

  void validate() const;
};

// Fixed side information. Rows follow dense user / item order.
struct FeatureSet {
  Matrix users;
  Matrix items;
  std::string source = "none";

  static FeatureSet random(std::size_t n_users, std::size_t n_items, std::size_t user_dim,
                           std::size_t item_dim, std::uint64_t seed);
};

struct ModelParams {
  Matrix P;       // M x D
  Matrix Q;       // N x D
  Matrix W_user;  // (F_u + D) x D
  Matrix W_item;  // (F_i + D) x D
  std::vector<Matrix> W_diff;  // K of (2D) x D

  // Every tensor with a stable name, in checkpoint order.
  std::vector<std::pair<std::string, Matrix*>> tensors();
  std::vector<std::pair<std::string, const Matrix*>> tensors() const;
};

struct Sample {
  UserId user = 0;
  ItemId item = 0;
  double label = 0.0;
};

// Final representations: r(a, i) = V.row(i) . U.row(a).
struct ScoreTable {
  Matrix U;
  Matrix V;

  double operator()(UserId a, ItemId i) const;
};

struct LossAndGrads {
  double loss = 0.0;
  ModelParams grads;
};

class DiffNet {
 public:
  // `train` supplies R_a for the prediction layer and must be the training
  // partition.
  DiffNet(SparseGraph social, FeatureSet features, const Partition& train, std::size_t n_items,
          HyperParams hp);

  std::size_t n_users() const { return social_.num_nodes(); }
  std::size_t n_items() const { return n_items_; }
  const HyperParams& hyper() const { return hp_; }
  const SparseGraph& social() const { return social_; }
  const FeatureSet& features() const { return features_; }
  ModelParams& params() { return params_; }
  const ModelParams& params() const { return params_; }

  // Xavier-uniform weights, N(0, 0.1) free embeddings.
  void initialize(std::uint64_t seed);

  ScoreTable scores() const;
  double predict(UserId a, ItemId i) const;

  // Mean over the batch of 0.5 * S_alpha * (y - r)^2 and its gradient.
  // `lambda` may be null only when alpha is -inf.
  LossAndGrads loss_and_grads(std::span<const Sample> batch, const DisseminationScores* lambda,
                              std::size_t batch_index = 0) const;

 private:
  struct Forward;
  Forward forward() const;

  SparseGraph social_;
  FeatureSet features_;
  std::size_t n_items_;
  HyperParams hp_;
  std::vector<std::vector<ItemId>> history_;  // R_a
  ModelParams params_;
};

struct TrainLogEntry {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  std::optional<double> val_hr;
  std::optional<double> val_ndcg;
};

using Validator = std::function<std::pair<double, double>(const DiffNet&)>;

struct TrainingData {
  const SparseGraph& social;
  const FeatureSet& features;
  const Partition& train;
  std::size_t n_items;
};

struct TrainResult {
  DiffNet model;
  std::vector<TrainLogEntry> log;
};

// Mini-batch SGD. Negatives (neg_per_user distinct unobserved items per user
// with training positives) are redrawn every epoch. Dissemination scores come
// from the social graph combined with the training positives only.
TrainResult train(const TrainingData& data, const HyperParams& hp, const Validator& validate = {});

}  // namespace disrec

#include "doctest.h"

#include <cmath>
#include <random>

#include "disrec/diffnet.hpp"
#include "disrec/errors.hpp"
#include "disrec/eval.hpp"
#include "disrec/synthetic.hpp"
#include "support/oracles.hpp"

using namespace disrec;

namespace {

Partition train_part(std::vector<Interaction> pairs, std::size_t m) {
  return Partition(Split::train, std::move(pairs), m);
}

FeatureSet no_features(std::size_t m, std::size_t n) {
  FeatureSet f;
  f.users = Matrix::Zero(static_cast<Eigen::Index>(m), 0);
  f.items = Matrix::Zero(static_cast<Eigen::Index>(n), 0);
  return f;
}

HyperParams hyper(std::size_t dim, std::size_t depth, Activation act, Pooling pool = Pooling::mean) {
  HyperParams hp;
  hp.dim = dim;
  hp.depth = depth;
  hp.activation = act;
  hp.pooling = pool;
  return hp;
}

Matrix eye(Eigen::Index d) { return Matrix::Identity(d, d); }

// 5 users, 6 items, D = 3 toy used by the gradient check.
struct Toy {
  SparseGraph social = build_graph(std::vector<Edge>{{0, 1}, {1, 2}, {2, 3}, {0, 2}}, 5);  // user 4 isolated
  FeatureSet features = FeatureSet::random(5, 6, 2, 3, 77);
  Partition train = train_part({{0, 0}, {0, 3}, {1, 1}, {2, 5}, {3, 2}, {3, 4}}, 5);
  std::vector<Sample> batch{{0, 0, 1}, {0, 1, 0}, {1, 1, 1}, {2, 4, 0}, {3, 2, 1}, {4, 5, 0}, {4, 0, 1}, {1, 3, 0}};
};

DisseminationScores toy_scores(const Toy& t) {
  return dissemination_scores(combine(t.social, t.train.pairs(), 6));
}

double total_loss(const DiffNet& m, const std::vector<Sample>& batch, const DisseminationScores* s) {
  return m.loss_and_grads(batch, s).loss;
}

}  // namespace

TEST_CASE("alpha parsing") {
  CHECK(Alpha::parse("-inf").is_neg_inf());
  CHECK(Alpha::parse("-3").value() == -3.0);
  CHECK(Alpha::parse("2.5").to_string() == "2.5");
  CHECK(Alpha::neg_inf().to_string() == "-inf");
  CHECK_THROWS_AS(Alpha::parse("abc"), InputError);
  CHECK_THROWS_AS(Alpha::parse("3x"), InputError);
  CHECK_THROWS_AS(Alpha::finite(INFINITY), InputError);
}

TEST_CASE("S_alpha algebra") {
  for (double lam : {0.0, 0.1, 0.5, 0.99, 1.0}) CHECK(dissemination_factor(Alpha::neg_inf(), lam) == 1.0);
  for (int k = 0; k <= 40; ++k) {
    const double a = -20.0 + k;
    CHECK(dissemination_factor(Alpha::finite(a), 1.0) == 1.0);
  }
  CHECK(dissemination_factor(Alpha::finite(0.0), 0.0) == 0.5);
  for (double lam : {0.0, 0.25, 0.7, 1.0}) {
    CHECK(std::abs(dissemination_factor(Alpha::finite(20.0), lam) - lam) < 1e-6);
  }
  double prev = INFINITY;
  for (int k = 0; k <= 40; ++k) {
    const double s = dissemination_factor(Alpha::finite(-10.0 + 0.5 * k), 0.25);
    CHECK(s < prev);
    prev = s;
  }
  // large alpha stays finite
  CHECK(std::isfinite(dissemination_factor(Alpha::finite(800.0), 0.3)));
}

TEST_CASE("hyperparameter validation") {
  HyperParams hp;
  hp.dim = 0;
  CHECK_THROWS_AS(hp.validate(), InputError);
  hp.dim = 4;
  hp.lr = -1;
  CHECK_THROWS_AS(hp.validate(), InputError);
}

TEST_CASE("fusion layer examples") {
  const std::size_t m = 3, n = 2;
  FeatureSet f = FeatureSet::random(m, n, 2, 2, 1);
  SparseGraph social = build_graph({}, m);
  Partition empty = train_part({}, m);
  DiffNet model(social, f, empty, n, hyper(2, 0, Activation::identity));
  model.initialize(5);
  // zero block on features, identity on the embedding
  model.params().W_user.setZero();
  model.params().W_user.bottomRows(2) = eye(2);
  ScoreTable t = model.scores();
  CHECK(t.U.isApprox(model.params().P));

  DiffNet relu(social, f, empty, n, hyper(2, 0, Activation::relu));
  relu.initialize(5);
  relu.params().W_user = -Matrix::Ones(4, 2);
  relu.params().P = Matrix::Ones(3, 2);
  relu.features().users;  // features may be negative; force positive inputs instead
  FeatureSet pos = f;
  pos.users = pos.users.cwiseAbs();
  DiffNet relu2(social, pos, empty, n, hyper(2, 0, Activation::relu));
  relu2.params() = relu.params();
  CHECK(relu2.scores().U.isZero());

  DiffNet sig(social, f, empty, n, hyper(4, 1, Activation::sigmoid));
  sig.initialize(9);
  ScoreTable s = sig.scores();
  CHECK((s.U.array() > 0).all());
  CHECK((s.U.array() < 1).all());
  CHECK((s.V.array() > 0).all());
  CHECK((s.V.array() < 1).all());
}

TEST_CASE("diffusion layer examples") {
  SparseGraph pair = build_graph(std::vector<Edge>{{0, 1}}, 3);  // user 2 has no neighbors
  Partition empty = train_part({}, 3);
  DiffNet model(pair, no_features(3, 1), empty, 1, hyper(2, 1, Activation::identity));
  model.initialize(3);
  model.params().W_user = eye(2);
  model.params().W_diff[0].setZero();
  model.params().W_diff[0].topRows(2) = eye(2);  // [I | 0]: copy the pooled neighbor
  ScoreTable t = model.scores();
  CHECK(t.U.row(0).isApprox(model.params().P.row(1)));
  CHECK(t.U.row(1).isApprox(model.params().P.row(0)));
  CHECK(t.U.row(2).isZero());  // empty neighborhood pools to zero

  HyperParams hp = hyper(2, 1, Activation::identity, Pooling::max);
  SparseGraph star = build_graph(std::vector<Edge>{{0, 1}, {0, 2}}, 3);
  DiffNet mx(star, no_features(3, 1), empty, 1, hp);
  mx.initialize(1);
  mx.params().W_user = eye(2);
  mx.params().W_diff[0] = model.params().W_diff[0];
  mx.params().P << 0, 0, 1, -2, -3, 4;
  ScoreTable u = mx.scores();
  CHECK(u.U(0, 0) == 1.0);
  CHECK(u.U(0, 1) == 4.0);
}

TEST_CASE("prediction layer examples") {
  SparseGraph social = build_graph({}, 3);
  // 3 x 3 with identity fusions and K = 0: r = (P + mean of Q over R_a) Q^T
  Partition train = train_part({{0, 0}, {0, 1}, {2, 2}}, 3);
  DiffNet model(social, no_features(3, 3), train, 3, hyper(2, 0, Activation::identity));
  model.initialize(0);
  model.params().W_user = eye(2);
  model.params().W_item = eye(2);
  model.params().P << 1, 0, 0, 1, 1, 1;
  model.params().Q << 1, 2, 0, 1, -1, 0;
  ScoreTable t = model.scores();
  // user 0: (1,0) + ((1,2)+(0,1))/2 = (1.5, 1.5); user 1: (0,1); user 2: (1,1)+(-1,0) = (0,1)
  const double expect[3][3] = {{4.5, 1.5, -1.5}, {2.0, 1.0, 0.0}, {2.0, 1.0, 0.0}};
  for (UserId a = 0; a < 3; ++a) {
    for (ItemId i = 0; i < 3; ++i) CHECK(t(a, i) == doctest::Approx(expect[a][i]));
  }
  CHECK(model.predict(0, 0) == doctest::Approx(4.5));
  CHECK_THROWS_AS(model.predict(3, 0), InputError);
  CHECK_THROWS_AS(model.predict(0, 3), InputError);

  model.params().Q.row(1).setZero();
  for (UserId a = 0; a < 3; ++a) CHECK(model.scores()(a, 1) == 0.0);
}

TEST_CASE("constructor checks") {
  SparseGraph social = build_graph({}, 2);
  Partition test(Split::test, {{0, 0}}, 2);
  CHECK_THROWS_AS(DiffNet(social, no_features(2, 1), test, 1, HyperParams{}), InputError);
  CHECK_THROWS_AS(DiffNet(social, no_features(3, 1), train_part({}, 2), 1, HyperParams{}), InputError);
  CHECK_THROWS_AS(DiffNet(social, no_features(2, 1), train_part({}, 3), 1, HyperParams{}), InputError);
}

TEST_CASE("loss examples") {
  SparseGraph social = build_graph({}, 1);
  Partition train = train_part({}, 1);
  HyperParams hp = hyper(1, 0, Activation::identity);
  hp.alpha = Alpha::finite(0.0);
  DiffNet model(social, no_features(1, 1), train, 1, hp);
  model.initialize(0);
  model.params().W_item.setZero();  // v = 0 so r = 0
  SpectralResult zero;
  zero.z = {0.0, 0.0};
  DisseminationScores lam(zero, 1, 1);
  std::vector<Sample> one{{0, 0, 1.0}};
  CHECK(model.loss_and_grads(one, &lam).loss == 0.25);
  CHECK_THROWS_AS(model.loss_and_grads(one, nullptr), InputError);
  CHECK_THROWS_AS(model.loss_and_grads({}, &lam), InputError);
}

TEST_CASE("vanilla loss is plain MSE / 2 bit for bit; alpha 20 approaches the lambda weighting") {
  Toy t;
  HyperParams hp = hyper(3, 2, Activation::tanh);
  DiffNet vanilla(t.social, t.features, t.train, 6, hp);
  vanilla.initialize(12);
  ScoreTable s = vanilla.scores();
  double mse = 0.0;
  for (const auto& x : t.batch) {
    const double e = x.label - s.V.row(x.item).dot(s.U.row(x.user));
    mse += 0.5 * 1.0 * e * e;
  }
  mse *= 1.0 / static_cast<double>(t.batch.size());
  const DisseminationScores lam = toy_scores(t);
  CHECK(vanilla.loss_and_grads(t.batch, &lam).loss == mse);
  CHECK(vanilla.loss_and_grads(t.batch, nullptr).loss == mse);

  hp.alpha = Alpha::finite(20.0);
  DiffNet heavy(t.social, t.features, t.train, 6, hp);
  heavy.params() = vanilla.params();
  double limit = 0.0;
  for (const auto& x : t.batch) {
    const double e = x.label - s.V.row(x.item).dot(s.U.row(x.user));
    limit += 0.5 * lam(x.user, x.item) * e * e;
  }
  limit /= static_cast<double>(t.batch.size());
  const double got = heavy.loss_and_grads(t.batch, &lam).loss;
  CHECK(std::abs(got - limit) < 1e-6 * std::max(std::abs(limit), 1e-300));
}

TEST_CASE("gradient check against central differences") {
  Toy t;
  const DisseminationScores lam = toy_scores(t);
  double worst = 0.0;
  for (Pooling pool : {Pooling::mean, Pooling::max}) {
    for (Activation act : {Activation::identity, Activation::relu, Activation::sigmoid, Activation::tanh}) {
      for (std::size_t depth : {0, 1, 2}) {
        for (Alpha alpha : {Alpha::neg_inf(), Alpha::finite(0.7)}) {
          HyperParams hp = hyper(3, depth, act, pool);
          hp.alpha = alpha;
          DiffNet model(t.social, t.features, t.train, 6, hp);
          model.initialize(31 + depth);
          const LossAndGrads lg = model.loss_and_grads(t.batch, &lam);
          auto params = model.params().tensors();
          auto grads = lg.grads.tensors();
          REQUIRE(params.size() == grads.size());
          for (std::size_t p = 0; p < params.size(); ++p) {
            Matrix& w = *params[p].second;
            const Matrix& g = *grads[p].second;
            REQUIRE(g.rows() == w.rows());
            REQUIRE(g.cols() == w.cols());
            for (Eigen::Index k = 0; k < w.size(); ++k) {
              const double keep = w.data()[k];
              const double h = 1e-5;
              w.data()[k] = keep + h;
              const double up = total_loss(model, t.batch, &lam);
              w.data()[k] = keep - h;
              const double down = total_loss(model, t.batch, &lam);
              w.data()[k] = keep;
              const double fd = (up - down) / (2 * h);
              const double an = g.data()[k];
              const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6});
              if (rel > worst) worst = rel;
              if (rel >= 1e-4) {
                FAIL_CHECK(params[p].first << " entry " << k << " pool " << to_string(pool) << " act "
                                           << to_string(act) << " K " << depth << ": analytic " << an
                                           << " numeric " << fd);
              }
            }
          }
        }
      }
    }
  }
  MESSAGE("worst relative gradient error " << worst);
}

TEST_CASE("non-finite loss names the batch") {
  Toy t;
  DiffNet model(t.social, t.features, t.train, 6, hyper(3, 0, Activation::identity));
  model.initialize(1);
  model.params().P.setConstant(1e200);
  model.params().Q.setConstant(1e200);
  try {
    model.loss_and_grads(t.batch, nullptr, 7);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("batch 7") != std::string::npos);
  }
}

TEST_CASE("single pair converges to one") {
  SparseGraph social = build_graph(std::vector<Edge>{}, 1);
  FeatureSet f = no_features(1, 1);
  Partition part = train_part({{0, 0}}, 1);
  HyperParams hp = hyper(1, 0, Activation::identity);
  hp.lr = 0.05;
  hp.epochs = 1000;
  hp.seed = 4;
  TrainResult r = train({social, f, part, 1}, hp);
  CHECK(std::abs(r.model.predict(0, 0) - 1.0) < 1e-3);
  CHECK(r.log.size() == 1000);
}

TEST_CASE("zero learning rate leaves parameters at their initial values") {
  Toy t;
  HyperParams hp = hyper(3, 2, Activation::tanh);
  hp.lr = 0.0;
  hp.epochs = 5;
  hp.seed = 8;
  TrainResult r = train({t.social, t.features, t.train, 6}, hp);
  DiffNet fresh(t.social, t.features, t.train, 6, hp);
  fresh.initialize(derive_seed(8, "init"));
  auto a = r.model.params().tensors();
  auto b = fresh.params().tensors();
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(*a[k].second == *b[k].second);
}

TEST_CASE("K = 0 ignores the social graph") {
  Toy t;
  HyperParams hp = hyper(3, 0, Activation::sigmoid);
  DiffNet a(t.social, t.features, t.train, 6, hp);
  a.initialize(3);
  SparseGraph other = build_graph(std::vector<Edge>{{0, 4}, {1, 3}, {2, 4}}, 5);
  DiffNet b(other, t.features, t.train, 6, hp);
  b.params() = a.params();
  CHECK(a.scores().U == b.scores().U);
  // and with diffusion it does matter
  hp.depth = 1;
  DiffNet c(t.social, t.features, t.train, 6, hp);
  c.initialize(3);
  DiffNet d(other, t.features, t.train, 6, hp);
  d.params() = c.params();
  CHECK(c.scores().U != d.scores().U);
}

TEST_CASE("seeded training is deterministic") {
  Toy t;
  HyperParams hp = hyper(3, 2, Activation::tanh);
  hp.alpha = Alpha::finite(1.0);
  hp.epochs = 20;
  hp.batch_size = 3;
  hp.lr = 0.1;
  hp.seed = 5;
  TrainResult a = train({t.social, t.features, t.train, 6}, hp);
  TrainResult b = train({t.social, t.features, t.train, 6}, hp);
  auto pa = a.model.params().tensors();
  auto pb = b.model.params().tensors();
  for (std::size_t k = 0; k < pa.size(); ++k) CHECK(*pa[k].second == *pb[k].second);
  hp.seed = 6;
  TrainResult c = train({t.social, t.features, t.train, 6}, hp);
  CHECK(c.model.params().P != a.model.params().P);
}

TEST_CASE("training beats initialization on the planted-block data") {
  double hr_init = 0.0, hr_trained = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SyntheticDatasetSpec spec;
    spec.seed = seed;
    SyntheticDataset ds = gen_synthetic_dataset(spec);
    SplitDataset split = split_dataset(ds.interactions, {}, derive_seed(seed, "split"));
    FeatureSet f = FeatureSet::random(200, 300, 8, 8, seed);
    HyperParams hp = hyper(16, 2, Activation::tanh);
    hp.lr = 0.5;
    hp.epochs = 200;
    hp.seed = seed;
    EvalProtocol protocol;
    protocol.seed = seed;
    DiffNet init(ds.social, f, split.train, 300, hp);
    init.initialize(derive_seed(seed, "init"));
    hr_init += evaluate_model(init, split, protocol).metrics.hr / 5;
    TrainResult r = train({ds.social, f, split.train, 300}, hp);
    hr_trained += evaluate_model(r.model, split, protocol).metrics.hr / 5;
  }
  MESSAGE("HR@10 init " << hr_init << " trained " << hr_trained);
  CHECK(hr_trained >= 2 * hr_init);
}

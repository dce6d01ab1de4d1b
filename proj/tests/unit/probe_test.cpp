#include <cmath>

#include <gtest/gtest.h>

#include "normprobe/error.hpp"
#include "normprobe/probe.hpp"
#include "support/oracles.hpp"

using namespace normprobe;
using namespace normprobe::probe;

namespace {

Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

struct Sample {
  Matrix x;
  std::vector<LabelId> y;
};

Sample random_sample(std::size_t n, std::size_t dim, std::size_t k, std::uint64_t seed) {
  SeededRng rng(seed);
  Sample s{Matrix(n, dim), std::vector<LabelId>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) s.x(i, j) = rng.standard_normal();
    s.y[i] = static_cast<LabelId>(i % k);
  }
  return s;
}

}  // namespace

TEST(ProbeConfig, Defaults) {
  ProbeConfig c;
  EXPECT_EQ(c.hidden_size, 100u);
  EXPECT_EQ(c.activation, Activation::relu);
  EXPECT_EQ(c.max_epochs, 200u);
  EXPECT_EQ(c.learning_rate, 0.001);
  EXPECT_FALSE(c.early_stopping);
  EXPECT_EQ(c.beta1, 0.9);
  EXPECT_EQ(c.beta2, 0.999);
  EXPECT_EQ(c.epsilon, 1e-8);
  EXPECT_EQ(c.batch_size(50), 50u);
  EXPECT_EQ(c.batch_size(5000), 200u);
  c.early_stopping = true;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Init, GlorotBounds) {
  SeededRng rng(1);
  auto p = init_parameters(30, 100, 2, rng);
  EXPECT_EQ(p.w1.rows(), 30);
  EXPECT_EQ(p.w1.cols(), 100);
  EXPECT_EQ(p.w2.cols(), 1);
  const double b1 = std::sqrt(6.0 / 130.0), b2 = std::sqrt(6.0 / 101.0);
  EXPECT_LE(p.w1.cwiseAbs().maxCoeff(), b1);
  EXPECT_LE(p.b1.cwiseAbs().maxCoeff(), b1);
  EXPECT_LE(p.w2.cwiseAbs().maxCoeff(), b2);
  EXPECT_GT(p.w1.cwiseAbs().maxCoeff(), 0.9 * b1);
  EXPECT_EQ(output_width(2), 1u);
  EXPECT_EQ(output_width(6), 6u);
}

TEST(GradientCheck, SoftmaxAndLogistic) {
  ProbeConfig cfg;
  cfg.hidden_size = 8;
  for (std::size_t k : {2u, 3u, 5u}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto s = random_sample(8, 6, k, 100 + seed);
      cfg.seed = seed;
      EXPECT_LT(gradient_check(cfg, s.x, s.y, k), 1e-4) << "k=" << k << " seed=" << seed;
    }
  }
}

TEST(Gradients, ZeroInputGivesZeroFirstLayerWeightGrad) {
  SeededRng rng(4);
  auto p = init_parameters(5, 7, 3, rng);
  Matrix x = Matrix::Zero(4, 5);
  std::vector<LabelId> y{0, 1, 2, 1};
  Parameters g;
  loss_and_gradients(p, x, y, 3, &g);
  EXPECT_EQ(g.w1.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Gradients, LossScaleIsLinear) {
  SeededRng rng(5);
  auto p = init_parameters(4, 6, 2, rng);
  auto s = random_sample(6, 4, 2, 9);
  Parameters g1, g2;
  const double l1 = loss_and_gradients(p, s.x, s.y, 2, &g1);
  const double l2 = loss_and_gradients(p, s.x, s.y, 2, &g2, 2.0);
  EXPECT_NEAR(l2, 2 * l1, 1e-14);
  for (std::size_t k = 0; k < g1.count(); ++k) EXPECT_NEAR(g2.at(k), 2 * g1.at(k), 1e-14);
}

TEST(Train, SeparableBlobsAndHeldOutAccuracy) {
  auto blobs = normprobe::testing::make_blobs(200, 4, 4.0, 1);
  ProbeConfig cfg;
  cfg.seed = 3;
  auto probe = train(to_matrix(blobs.x), blobs.y, 2, cfg);
  ASSERT_EQ(probe.loss_trace().size(), 200u);
  EXPECT_LT(probe.loss_trace().back(), 0.1);
  EXPECT_TRUE(probe.parameters().all_finite());

  auto fresh = normprobe::testing::make_blobs(400, 4, 4.0, 2);
  auto scores = predict_scores(probe, to_matrix(fresh.x));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < fresh.y.size(); ++i) {
    const LabelId pred = scores(i, 1) > scores(i, 0) ? 1 : 0;
    correct += pred == fresh.y[i];
  }
  EXPECT_GT(static_cast<double>(correct) / fresh.y.size(), 0.95);
}

TEST(Train, ConstantFeaturesPredictPrior) {
  Matrix x = Matrix::Constant(100, 3, 0.7);
  std::vector<LabelId> y(100);
  for (std::size_t i = 0; i < 100; ++i) y[i] = i % 2;
  ProbeConfig cfg;
  cfg.seed = 11;
  auto probe = train(x, y, 2, cfg);
  auto s = predict_scores(probe, x);
  for (Eigen::Index i = 0; i < s.rows(); ++i) EXPECT_NEAR(s(i, 1), 0.5, 0.05);
}

TEST(Train, Deterministic) {
  auto s = random_sample(120, 5, 3, 21);
  ProbeConfig cfg;
  cfg.max_epochs = 20;
  cfg.seed = 8;
  auto a = train(s.x, s.y, 3, cfg);
  auto b = train(s.x, s.y, 3, cfg);
  EXPECT_EQ(a.parameters().w1, b.parameters().w1);
  EXPECT_EQ(a.parameters().w2, b.parameters().w2);
  EXPECT_EQ(a.parameters().b1, b.parameters().b1);
  EXPECT_EQ(a.parameters().b2, b.parameters().b2);
  EXPECT_EQ(a.loss_trace(), b.loss_trace());
  cfg.seed = 9;
  EXPECT_NE(train(s.x, s.y, 3, cfg).parameters().w1, a.parameters().w1);
}

TEST(Train, Errors) {
  auto s = random_sample(10, 3, 2, 1);
  std::vector<LabelId> one(10, 1);
  EXPECT_THROW(train(s.x, one, 2, ProbeConfig{}), DataError);
  std::vector<LabelId> short_labels(5, 0);
  EXPECT_THROW(train(s.x, short_labels, 2, ProbeConfig{}), DataError);

  ProbeConfig wild;
  wild.learning_rate = 1e300;
  wild.max_epochs = 50;
  Matrix big = s.x * 1e150;
  try {
    train(big, s.y, 2, wild);
    FAIL() << "expected divergence";
  } catch (const ComputeError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

TEST(Predict, RowsAreDistributions) {
  auto s = random_sample(50, 4, 4, 2);
  ProbeConfig cfg;
  cfg.max_epochs = 5;
  auto probe = train(s.x, s.y, 4, cfg);
  Matrix wild = s.x * 1e3;
  auto scores = predict_scores(probe, wild);
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    EXPECT_NEAR(scores.row(i).sum(), 1.0, 1e-6);
    EXPECT_GE(scores.row(i).minCoeff(), 0.0);
  }
  EXPECT_THROW(predict_scores(probe, Matrix::Zero(2, 5)), DataError);
}

TEST(Predict, ZeroOutputLayerIsUniform) {
  SeededRng rng(1);
  for (std::size_t k : {2u, 5u}) {
    auto p = init_parameters(3, 4, k, rng);
    p.w2.setZero();
    p.b2.setZero();
    auto s = predict_scores(p, k, Matrix::Random(7, 3));
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      for (Eigen::Index c = 0; c < s.cols(); ++c) EXPECT_DOUBLE_EQ(s(i, c), 1.0 / k);
    }
  }
}

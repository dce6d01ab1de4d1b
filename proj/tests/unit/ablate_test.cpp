#include <cmath>

#include <gtest/gtest.h>

#include "normprobe/ablate.hpp"
#include "normprobe/error.hpp"
#include "support/oracles.hpp"

using namespace normprobe;
using namespace normprobe::ablate;

namespace {

AblationSpec spec(AblationKind kind, NormOrder order = NormOrder::l2, Range norm = {1, 1},
                  Range dims = {-1, 1}) {
  return AblationSpec{kind, order, norm, dims};
}

EmbeddingVector vec(std::vector<double> v) { return EmbeddingVector(std::move(v)); }

EmbeddingVector random_input(std::size_t dim, SeededRng& rng) {
  std::vector<double> v(dim);
  for (auto& x : v) x = rng.standard_normal();
  return EmbeddingVector(std::move(v));
}

}  // namespace

TEST(AblateDims, PreservesL2OnTriangle) {
  SeededRng rng(1);
  auto out = ablate_dimensions(vec({3, 4}), spec(AblationKind::ablate_dims), rng);
  EXPECT_EQ(out.dim(), 2u);
  EXPECT_NEAR(out.l2(), 5.0, 5e-9);
}

TEST(AblateDims, PreservesL1) {
  SeededRng rng(2);
  auto v = vec({1, -2, 3, 0.5});
  auto out = ablate_dimensions(v, spec(AblationKind::ablate_dims, NormOrder::l1), rng);
  EXPECT_NEAR(out.l1(), v.l1(), 1e-9 * v.l1());
}

TEST(AblateDims, DirectionIsRandom) {
  // Axis vector in 300 dims: the output's cosine with it centres on 0.
  std::vector<double> e(300, 0.0);
  e[0] = 1.0;
  const auto v = vec(e);
  double sum_abs = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    SeededRng rng(s);
    auto out = ablate_dimensions(v, spec(AblationKind::ablate_dims), rng);
    EXPECT_NEAR(out.l2(), 1.0, 1e-9);
    sum_abs += std::abs(cosine(v, out));
  }
  EXPECT_LT(sum_abs / 1000, 0.1);
}

TEST(AblateDims, ExhaustedResamplesIsError) {
  SeededRng rng(1);
  EXPECT_THROW(ablate_dimensions(vec({1, 1}), spec(AblationKind::ablate_dims, NormOrder::l2, {1, 1}, {0, 0}), rng),
               ComputeError);
}

TEST(AblateNorm, ScalesToDrawnNorm) {
  SeededRng rng(1);
  auto out = ablate_norm(vec({3, 4}), spec(AblationKind::ablate_norm, NormOrder::l2, {10, 10}), rng);
  EXPECT_NEAR(out[0], 6.0, 1e-12);
  EXPECT_NEAR(out[1], 8.0, 1e-12);
  auto l1 = ablate_norm(vec({1, 1}), spec(AblationKind::ablate_norm, NormOrder::l1, {4, 4}), rng);
  EXPECT_NEAR(l1[0], 2.0, 1e-12);
  EXPECT_NEAR(l1[1], 2.0, 1e-12);
}

TEST(AblateNorm, KeepsDirectionLandsInRange) {
  SeededRng rng(3);
  const auto s = spec(AblationKind::ablate_norm, NormOrder::l2, {2.0041, 8.0359});
  for (int i = 0; i < 500; ++i) {
    auto v = random_input(20, rng);
    auto out = ablate_norm(v, s, rng);
    EXPECT_NEAR(cosine(v, out), 1.0, 1e-9);
    EXPECT_GE(out.l2(), 2.0041 * (1 - 1e-12));
    EXPECT_LE(out.l2(), 8.0359 * (1 + 1e-12));
  }
}

TEST(AblateNorm, ZeroInputIsError) {
  SeededRng rng(1);
  EXPECT_THROW(ablate_norm(vec({0, 0}), spec(AblationKind::ablate_norm), rng), ComputeError);
  EXPECT_THROW(normalize(vec({0, 0}), spec(AblationKind::normalize)), ComputeError);
}

TEST(AblateBoth, IndependentOfInput) {
  const auto s = spec(AblationKind::ablate_both, NormOrder::l2, {2, 8}, {-2.5, 3.2});
  SeededRng a(17), b(17), c(17);
  auto x = ablate_both(vec({1, 2, 3}), s, a);
  auto y = ablate_both(vec({-9, 0.1, 7}), s, b);
  EXPECT_EQ(x, y);
  auto rv = s;
  rv.kind = AblationKind::random_vector;
  EXPECT_EQ(x, random_vector(3, rv, c));
  EXPECT_GE(x.l2(), 2.0);
  EXPECT_LE(x.l2(), 8.0);
}

TEST(AblateBoth, NormUniformOverRange) {
  const auto s = spec(AblationKind::ablate_both, NormOrder::l2, {2.0, 8.0}, {-1, 1});
  SeededRng rng(5);
  std::vector<double> norms;
  const auto v = vec({1, 1, 1, 1});
  for (int i = 0; i < 10000; ++i) norms.push_back(ablate_both(v, s, rng).l2());
  auto ks = normprobe::testing::ks_one_sample(norms, [](double x) { return std::clamp((x - 2.0) / 6.0, 0.0, 1.0); });
  EXPECT_GT(ks.p, 0.01) << "D=" << ks.d;
}

TEST(RandomVector, SmallDimAndDeterminism) {
  const auto s = spec(AblationKind::random_vector, NormOrder::l2, {3, 4}, {-1, 1});
  SeededRng a(8), b(8);
  auto x = random_vector(2, s, a);
  EXPECT_EQ(x, random_vector(2, s, b));
  EXPECT_EQ(x.dim(), 2u);
  EXPECT_GE(x.l2(), 3.0);
  EXPECT_LE(x.l2(), 4.0);
}

TEST(Normalize, Examples) {
  auto a = normalize(vec({3, 4}), spec(AblationKind::normalize));
  EXPECT_NEAR(a[0], 0.6, 1e-15);
  EXPECT_NEAR(a[1], 0.8, 1e-15);
  auto b = normalize(vec({2, 2}), spec(AblationKind::normalize, NormOrder::l1));
  EXPECT_EQ(b[0], 0.5);
  EXPECT_EQ(b[1], 0.5);
}

TEST(Spec, Validation) {
  EXPECT_THROW(spec(AblationKind::ablate_norm, NormOrder::l2, {0, 1}).validate(), ConfigError);
  EXPECT_THROW(spec(AblationKind::ablate_norm, NormOrder::l2, {3, 2}).validate(), ConfigError);
  EXPECT_THROW(spec(AblationKind::ablate_dims, NormOrder::l2, {1, 1}, {1, -1}).validate(), ConfigError);
  EXPECT_NO_THROW(spec(AblationKind::ablate_both, NormOrder::l2, {2, 2}, {0.5, 0.5}).validate());
  EXPECT_EQ(parse_kind("ablate_dims"), AblationKind::ablate_dims);
  EXPECT_FALSE(parse_kind("nope"));
}

TEST(Apply, KindMismatchIsConfigError) {
  SeededRng rng(1);
  EXPECT_THROW(ablate_norm(vec({1, 2}), spec(AblationKind::ablate_dims), rng), ConfigError);
}

TEST(ApplyCondition, SetLevel) {
  SeededRng rng(9);
  embed::SentenceEmbeddingSet set{10, {}, "p"};
  for (int i = 0; i < 200; ++i) set.vectors.push_back(random_input(10, rng));

  auto same = apply_condition(set, spec(AblationKind::vanilla), 1);
  EXPECT_EQ(same, set);

  auto an = apply_condition(set, spec(AblationKind::ablate_norm, NormOrder::l2, {1, 5}), 2);
  for (std::size_t i = 0; i < set.size(); ++i) EXPECT_NEAR(cosine(set.vectors[i], an.vectors[i]), 1.0, 1e-9);

  for (auto order : {NormOrder::l1, NormOrder::l2}) {
    auto ad = apply_condition(set, spec(AblationKind::ablate_dims, order, {1, 1}, {-3, 3}), 3);
    for (std::size_t i = 0; i < set.size(); ++i) {
      const double n = set.vectors[i].norm(order);
      EXPECT_LT(std::abs(ad.vectors[i].norm(order) - n) / n, 1e-9);
      EXPECT_EQ(ad.vectors[i].dim(), 10u);
    }
  }

  auto x = apply_condition(set, spec(AblationKind::ablate_both, NormOrder::l2, {1, 2}), 4);
  auto y = apply_condition(set, spec(AblationKind::ablate_both, NormOrder::l2, {1, 2}), 4);
  EXPECT_EQ(x, y);
  // Element i depends only on (seed, i).
  auto sub = apply_condition(set.subset(std::vector<std::size_t>{0, 1, 2}),
                             spec(AblationKind::ablate_both, NormOrder::l2, {1, 2}), 4);
  EXPECT_EQ(sub.vectors[2], x.vectors[2]);
}

TEST(ApplyCondition, ErrorCarriesIndex) {
  embed::SentenceEmbeddingSet set{2, {}, ""};
  set.vectors.push_back(vec({1, 1}));
  set.vectors.push_back(vec({0, 0}));
  try {
    apply_condition(set, spec(AblationKind::ablate_norm, NormOrder::l2, {1, 2}), 1);
    FAIL();
  } catch (const ComputeError& e) {
    EXPECT_NE(std::string(e.what()).find("1"), std::string::npos);
  }
}

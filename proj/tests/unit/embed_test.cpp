#include <cmath>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "normprobe/embed.hpp"
#include "normprobe/error.hpp"
#include "normprobe/rng.hpp"
#include "support/oracles.hpp"

using namespace normprobe;
using namespace normprobe::embed;

namespace {

WordEmbeddingTable table_ab() {
  std::istringstream in("a 1.0 2.0\nb 3.0 4.0\n");
  return parse_word_table(in);
}

std::vector<double> values(const EmbeddingVector& v) { return {v.values().begin(), v.values().end()}; }

}  // namespace

TEST(WordTable, TwoLines) {
  auto t = table_ab();
  EXPECT_EQ(t.dim(), 2u);
  EXPECT_EQ(t.size(), 2u);
  ASSERT_NE(t.find("b"), nullptr);
  EXPECT_EQ(*t.find("b"), (std::vector<double>{3.0, 4.0}));
}

TEST(WordTable, DimensionMismatchNamesLine) {
  std::istringstream in("a 1.0 2.0\nb 3.0 4.0\nc 1.0\n");
  try {
    parse_word_table(in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(WordTable, BadFloatAndDuplicates) {
  std::istringstream bad("a 1.0 x2\n");
  EXPECT_THROW(parse_word_table(bad), ParseError);
  std::istringstream nan("a 1.0 nan\n");
  EXPECT_THROW(parse_word_table(nan), ParseError);
  std::istringstream dup("a 1 2\na 3 4\n");
  EXPECT_THROW(parse_word_table(dup), ParseError);
}

TEST(WordTable, Word2VecHeaderAndVocabularyFilter) {
  std::istringstream in("3 2\na 1 2\nb 3 4\nc -5 9\n");
  std::unordered_set<std::string> vocab{"a"};
  auto t = parse_word_table(in, &vocab);
  EXPECT_EQ(t.size(), 1u);
  EXPECT_EQ(t.find("b"), nullptr);
  // Ranges still cover every row of the file.
  EXPECT_EQ(t.component_min()[0], -5.0);
  EXPECT_EQ(t.component_max()[1], 9.0);
}

TEST(WordTable, LoadFromFile) {
  normprobe::testing::TempDir dir("table");
  std::ofstream(dir / "t.txt") << "x 0.5 0.25 1\ny 1 1 1\n";
  auto t = load_word_table(dir / "t.txt");
  EXPECT_EQ(t.dim(), 3u);
  EXPECT_THROW(load_word_table(dir / "none.txt"), DataError);
}

TEST(Pool, MeanOfTwoAndIdempotentMean) {
  auto t = table_ab();
  SeededRng rng(1);
  EXPECT_EQ(values(pool_sentence(t, "a b", rng)), (std::vector<double>{2.0, 3.0}));
  EXPECT_EQ(values(pool_sentence(t, "a a a", rng)), (std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(values(pool_sentence(t, "A  B", rng)), (std::vector<double>{2.0, 3.0}));
}

TEST(Pool, InVocabularyConsumesNoRandomness) {
  auto t = table_ab();
  SeededRng a(7), b(7);
  pool_sentence(t, "b a b", a);
  EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Pool, PermutationInvariant) {
  auto t = table_ab();
  SeededRng rng(1);
  auto x = pool_sentence(t, "a b b a b", rng);
  auto y = pool_sentence(t, "b b b a a", rng);
  for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(x[k], y[k], 1e-15);
}

TEST(Pool, OovIsSeededAndInsideObservedRange) {
  auto t = table_ab();
  SeededRng r1(42), r2(42);
  PoolCounts c;
  auto x = pool_sentence(t, "zzz", r1, &c);
  auto y = pool_sentence(t, "zzz", r2);
  EXPECT_EQ(x, y);
  EXPECT_EQ(c.tokens, 1u);
  EXPECT_EQ(c.oov, 1u);
  EXPECT_GE(x[0], 1.0);
  EXPECT_LE(x[0], 3.0);
  EXPECT_GE(x[1], 2.0);
  EXPECT_LE(x[1], 4.0);
}

TEST(Pool, OovDrawnPerOccurrence) {
  auto t = table_ab();
  SeededRng rng(3);
  auto two = pool_sentence(t, "q q", rng);
  SeededRng rng2(3);
  auto one = pool_sentence(t, "q", rng2);
  EXPECT_NE(two, one);
}

TEST(Pool, EmptySentenceIsError) {
  auto t = table_ab();
  SeededRng rng(1);
  EXPECT_THROW(pool_sentence(t, "   ", rng), DataError);
}

TEST(Pool, NormCachesMatchRecomputation) {
  auto t = table_ab();
  SeededRng rng(5);
  for (const char* s : {"a", "a b zz", "q r s t u"}) {
    auto v = pool_sentence(t, s, rng);
    double l1 = 0, l2 = 0;
    for (double x : v.values()) {
      l1 += std::abs(x);
      l2 += x * x;
    }
    l2 = std::sqrt(l2);
    EXPECT_NEAR(v.l1(), l1, 1e-9 * l1);
    EXPECT_NEAR(v.l2(), l2, 1e-9 * l2);
    EXPECT_LE(v.l2(), v.l1() * (1 + 1e-12));
    EXPECT_LE(v.l1(), std::sqrt(2.0) * v.l2() * (1 + 1e-12));
  }
}

TEST(Pool, DatasetIsIndexSeeded) {
  auto t = table_ab();
  auto ds = corpus::parse_probing_text("tr\tx\ta oov\ntr\ty\tb\nte\tx\toov2 b\nte\ty\ta\n", "t");
  auto p1 = pool_dataset(t, ds, 9, "test");
  auto p2 = pool_dataset(t, ds, 9, "test");
  EXPECT_EQ(p1.set, p2.set);
  EXPECT_EQ(p1.counts.oov, 2u);
  EXPECT_EQ(p1.counts.tokens, 6u);
  SeededRng rng(derive_seed(9, std::uint64_t{2}));
  EXPECT_EQ(p1.set.vectors[2], pool_sentence(t, "oov2 b", rng));
}

TEST(Interchange, RoundTripIsExact) {
  SentenceEmbeddingSet set{3, {}, "unit test"};
  SeededRng rng(11);
  for (int i = 0; i < 20; ++i) {
    set.vectors.emplace_back(std::vector<double>{rng.standard_normal(), 1e-300 * rng.uniform(0, 1), -1.0 / 3.0});
  }
  std::ostringstream out;
  write_sentence_embeddings(out, set);
  std::istringstream in(out.str());
  auto back = parse_sentence_embeddings(in, 20);
  EXPECT_EQ(back, set);
  EXPECT_EQ(back.provenance, "unit test");
}

TEST(Interchange, ThreeRowsDimFour) {
  std::istringstream in("dim=4 count=3 provenance=x\n1 2 3 4\n0 0 0 1\n-1 -2 -3 -4\n");
  auto s = parse_sentence_embeddings(in);
  EXPECT_EQ(s.dim, 4u);
  EXPECT_EQ(s.size(), 3u);
  EXPECT_DOUBLE_EQ(s.vectors[0].l2(), std::sqrt(30.0));
}

TEST(Interchange, NonFiniteNamesRow) {
  std::istringstream in("dim=2 count=3 provenance=x\n1 2\n3 NaN\n5 6\n");
  try {
    parse_sentence_embeddings(in);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos) << e.what();
  }
  std::istringstream inf("dim=1 count=1 provenance=x\n-inf\n");
  EXPECT_THROW(parse_sentence_embeddings(inf), DataError);
}

TEST(Interchange, ShapeErrors) {
  std::istringstream wrong_dim("dim=2 count=2 provenance=x\n1 2\n3\n");
  EXPECT_THROW(parse_sentence_embeddings(wrong_dim), DataError);
  std::istringstream short_file("dim=2 count=3 provenance=x\n1 2\n3 4\n");
  EXPECT_THROW(parse_sentence_embeddings(short_file), DataError);
  std::istringstream extra("dim=2 count=1 provenance=x\n1 2\n3 4\n");
  EXPECT_THROW(parse_sentence_embeddings(extra), DataError);
  std::istringstream ok("dim=2 count=2 provenance=x\n1 2\n3 4\n");
  EXPECT_THROW(parse_sentence_embeddings(ok, 5), DataError);
  std::istringstream no_header("1 2\n");
  EXPECT_THROW(parse_sentence_embeddings(no_header), DataError);
}

TEST(NormStats, Triangle345) {
  SentenceEmbeddingSet set{2, {}, ""};
  set.vectors.emplace_back(std::vector<double>{3, 4});
  set.vectors.emplace_back(std::vector<double>{0, 1});
  auto s = norm_stats(set);
  EXPECT_EQ(s.l2_min, 1.0);
  EXPECT_EQ(s.l2_max, 5.0);
  EXPECT_EQ(s.l1_min, 1.0);
  EXPECT_EQ(s.l1_max, 7.0);
  EXPECT_EQ(s.dim_min, 0.0);
  EXPECT_EQ(s.dim_max, 4.0);
}

TEST(NormStats, SingletonAndPooled) {
  SentenceEmbeddingSet a{2, {}, ""};
  a.vectors.emplace_back(std::vector<double>{-2, 1});
  auto s = norm_stats(a);
  EXPECT_EQ(s.l1_min, s.l1_max);
  EXPECT_EQ(s.l2_min, s.l2_max);
  EXPECT_EQ(s.dim_min, -2.0);
  EXPECT_EQ(s.dim_max, 1.0);

  SentenceEmbeddingSet b{2, {}, ""};
  b.vectors.emplace_back(std::vector<double>{10, 0});
  std::vector<const SentenceEmbeddingSet*> both{&a, &b};
  auto p = norm_stats(both);
  EXPECT_EQ(p.l2_min, std::sqrt(5.0));
  EXPECT_EQ(p.l2_max, 10.0);
  EXPECT_EQ(p.dim_min, -2.0);
  EXPECT_EQ(p.dim_max, 10.0);
}

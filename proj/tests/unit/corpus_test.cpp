#include <fstream>

#include <gtest/gtest.h>

#include "normprobe/corpus.hpp"
#include "normprobe/error.hpp"
#include "support/oracles.hpp"

using namespace normprobe;
using namespace normprobe::corpus;

namespace {

ProbingDataset parse(std::string_view text) { return parse_probing_text(text, "t"); }

}  // namespace

TEST(Corpus, TwoLineFile) {
  auto ds = parse("tr\tpast\the ran\nte\tpresent\tshe runs\n");
  EXPECT_EQ(ds.n_classes(), 2u);
  EXPECT_EQ(ds.label_names(), (std::vector<std::string>{"past", "present"}));
  EXPECT_EQ(ds.indices(Partition::train), (std::vector<std::size_t>{0}));
  EXPECT_EQ(ds.indices(Partition::test), (std::vector<std::size_t>{1}));
  EXPECT_TRUE(ds.indices(Partition::dev).empty());
  EXPECT_EQ(ds.examples()[1].sentence, "she runs");
}

TEST(Corpus, MalformedLineNamesLine) {
  try {
    parse("tr\tpast\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
  }
  try {
    parse("tr\ta\tx y\nte\tb\tz\ttoo many\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Corpus, UnknownPartitionCode) {
  EXPECT_THROW(parse("tr\ta\tx\nxx\tb\ty\nte\tb\tz\n"), ParseError);
}

TEST(Corpus, EmptyFileIsError) {
  EXPECT_THROW(parse(""), DataError);
}

TEST(Corpus, RejectsInvalidUtf8) {
  EXPECT_THROW(parse("tr\ta\tbad \xff byte\nte\tb\tok\n"), ParseError);
  EXPECT_FALSE(is_valid_utf8("\xc0\xaf"));          // overlong
  EXPECT_FALSE(is_valid_utf8("\xed\xa0\x80"));      // surrogate
  EXPECT_FALSE(is_valid_utf8("\xf4\x90\x80\x80"));  // > U+10FFFF
  EXPECT_TRUE(is_valid_utf8("caf\xc3\xa9 \xe2\x82\xac \xf0\x9f\x98\x80"));
}

TEST(Corpus, CrlfAccepted) {
  auto ds = parse("tr\ta\tx y\r\nte\tb\tz\r\n");
  EXPECT_EQ(ds.examples()[0].sentence, "x y");
  EXPECT_EQ(ds.label_names()[1], "b");
}

TEST(Corpus, RejectsBlankSentenceAndMissingPartitions) {
  EXPECT_THROW(parse("tr\ta\t   \nte\tb\tz\n"), DataError);
  EXPECT_THROW(parse("tr\ta\tx\ntr\tb\ty\n"), DataError);  // no test partition
  EXPECT_THROW(parse("tr\ta\tx\nte\ta\ty\n"), DataError);  // one class
}

TEST(Corpus, ClassDistribution) {
  auto ds = parse("tr\tx\ts1\ntr\tx\ts2\ntr\ty\ts3\nte\tx\ts4\nte\ty\ts5\n");
  auto d = class_distribution(ds, Partition::train);
  EXPECT_EQ(d, (std::vector<std::pair<LabelId, std::size_t>>{{0, 2}, {1, 1}}));
  auto t = class_distribution(ds, Partition::test);
  EXPECT_EQ(t[0].second, t[1].second);
}

TEST(Corpus, ClassDistributionReportsAbsentLabels) {
  auto ds = parse("tr\tx\ts1\ntr\tx\ts2\nte\ty\ts3\n");
  auto d = class_distribution(ds, Partition::train);
  EXPECT_EQ(d, (std::vector<std::pair<LabelId, std::size_t>>{{0, 2}, {1, 0}}));
}

TEST(Corpus, LabelsByFirstAppearance) {
  auto ds = parse("te\tzeta\ts\ntr\talpha\ts\ntr\tzeta\ts\nva\tmid\ts\n");
  EXPECT_EQ(ds.label_names(), (std::vector<std::string>{"zeta", "alpha", "mid"}));
  EXPECT_EQ(ds.labels(Partition::train), (std::vector<LabelId>{1, 0}));
  EXPECT_EQ(ds.labels(Partition::dev), (std::vector<LabelId>{2}));
}

TEST(Corpus, RoundTripAndStableEncoding) {
  const std::string text =
      "tr\t3\tthe cat sat\nva\t1\ta dog\nte\t3\tbirds fly high\ntr\t2\tx\nte\t1\tone two\n";
  auto a = parse(text);
  auto b = parse(to_tsv(a));
  EXPECT_EQ(a, b);
  EXPECT_EQ(parse(text), a);
  std::size_t total = 0;
  for (auto p : {Partition::train, Partition::dev, Partition::test}) total += a.indices(p).size();
  EXPECT_EQ(total, 5u);
}

TEST(Corpus, FileUsesStemAndPathInErrors) {
  normprobe::testing::TempDir dir("corpus");
  const auto good = dir / "tense.txt";
  std::ofstream(good) << "tr\tpast\the ran\nte\tpresent\tshe runs\n";
  EXPECT_EQ(parse_probing_file(good).task_name(), "tense");

  const auto bad = dir / "bad.txt";
  std::ofstream(bad) << "tr\tpast\the ran\nte\tpresent\n";
  try {
    parse_probing_file(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("bad.txt"), std::string::npos);
  }
  EXPECT_THROW(parse_probing_file(dir / "missing.txt"), DataError);
}

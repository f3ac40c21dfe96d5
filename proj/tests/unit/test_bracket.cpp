#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "lrncount/bracket.hpp"
#include "lrncount/errors.hpp"

using namespace lrncount;

namespace {

std::uint64_t binom(unsigned n, unsigned k) {
  std::uint64_t r = 1;
  for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST(Bracket, ParseRoundTrip) {
  for (std::string text : {"", "(", ")", "(()", ")()(", "((((((", "()()()"}) {
    EXPECT_EQ(parse(text).to_text(), text);
  }
}

TEST(Bracket, ParseRejectsForeignCharacters) {
  try {
    parse("(()x)");
    FAIL() << "expected InvalidCharacter";
  } catch (const InvalidCharacter& e) {
    EXPECT_EQ(e.position(), 3u);
    EXPECT_EQ(e.character(), 'x');
  }
  EXPECT_THROW(parse(" "), InvalidCharacter);
  EXPECT_THROW(parse("[]"), InvalidCharacter);
}

TEST(Bracket, StatsAndMembership) {
  auto s = stats(parse("(()(("));
  EXPECT_EQ(s.n_open, 4);
  EXPECT_EQ(s.n_close, 1);
  EXPECT_EQ(s.diff, 3);

  EXPECT_TRUE(in_bb(parse("")));
  EXPECT_TRUE(in_bb(parse("()")));
  EXPECT_TRUE(in_bb(parse(")(")));
  EXPECT_TRUE(in_bb(parse("))((")));
  EXPECT_FALSE(in_bb(parse("(")));
  EXPECT_FALSE(in_bb(parse("(()")));

  EXPECT_TRUE(is_dyck1(parse("(())()")));
  EXPECT_FALSE(is_dyck1(parse(")(")));
  EXPECT_FALSE(is_dyck1(parse("())(")));
}

TEST(Bracket, DyckIsSubsetOfBalanced) {
  for (std::size_t len = 0; len <= 12; ++len) {
    for (auto seq : enumerate_all(len)) {
      if (is_dyck1(seq)) EXPECT_TRUE(in_bb(seq)) << seq;
    }
  }
}

TEST(Bracket, EnumerationCountsAndOrder) {
  for (unsigned len = 0; len <= 14; ++len) {
    auto range = enumerate_all(len);
    EXPECT_EQ(range.size(), std::uint64_t{1} << len);
    std::uint64_t balanced = 0;
    std::optional<BracketSeq> prev;
    std::set<std::string> seen;
    for (auto seq : range) {
      ASSERT_EQ(seq.size(), len);
      if (prev) EXPECT_LT(*prev, seq);
      seen.insert(seq.to_text());
      balanced += in_bb(seq) ? 1 : 0;
      prev = seq;
    }
    EXPECT_EQ(seen.size(), std::size_t{1} << len);
    EXPECT_EQ(balanced, len % 2 ? 0 : binom(len, len / 2)) << "length " << len;
  }
  auto four = enumerate_all(4);
  EXPECT_EQ((*four.begin()).to_text(), "((((");
  EXPECT_EQ(std::count_if(four.begin(), four.end(), [](const BracketSeq& s) { return in_bb(s); }),
            6);
}

TEST(Bracket, EnumerationCap) {
  EXPECT_THROW(enumerate_all(21), LengthCapExceeded);
  EXPECT_THROW(enumerate_all(5, 4), LengthCapExceeded);
  EXPECT_NO_THROW(enumerate_all(20));
  try {
    enumerate_all(30);
  } catch (const LengthCapExceeded& e) {
    EXPECT_EQ(e.length(), 30u);
    EXPECT_EQ(e.cap(), kDefaultEnumerationCap);
  }
}

TEST(Bracket, OrderingIsLengthFirst) {
  EXPECT_LT(parse(")"), parse("(("));
  EXPECT_LT(parse("()"), parse(")("));
  EXPECT_LT(parse(""), parse("("));
}

TEST(Bracket, RandomSamplingBalancedFraction) {
  // P(balanced) at length 20 is C(20,10) / 2^20 = 0.1762.
  Rng rng(7);
  const int n = 20000;
  int balanced = 0;
  for (int i = 0; i < n; ++i) {
    auto seq = sample_random(20, rng);
    ASSERT_EQ(seq.size(), 20u);
    balanced += in_bb(seq) ? 1 : 0;
  }
  EXPECT_NEAR(static_cast<double>(balanced) / n, 0.1762, 0.02);
}

TEST(Bracket, SamplingIsSeeded) {
  Rng a(11), b(11);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sample_random(13, a), sample_random(13, b));
}

TEST(Bracket, LabelsAgreeWithDiff) {
  for (std::size_t len = 0; len <= 10; ++len) {
    for (auto seq : enumerate_all(len)) {
      const auto d = stats(seq).diff;
      EXPECT_EQ(label_binary(seq) == BinaryLabel::Pos, d > 0);
      const auto t = label_ternary(seq);
      EXPECT_EQ(t == TernaryLabel::Zero, in_bb(seq));
      EXPECT_EQ(t == TernaryLabel::Pos, d > 0);
      EXPECT_EQ(t == TernaryLabel::Neg, d < 0);
    }
  }
  EXPECT_EQ(label_binary(parse("()")), BinaryLabel::NonPos);
  EXPECT_EQ(label_binary(parse("))")), BinaryLabel::NonPos);
}

TEST(Bracket, OneHotOrder) {
  EXPECT_EQ(one_hot(Token::Open)[0], 1.0);
  EXPECT_EQ(one_hot(Token::Open)[1], 0.0);
  EXPECT_EQ(one_hot(Token::Close)[0], 0.0);
  EXPECT_EQ(one_hot(Token::Close)[1], 1.0);
}

TEST(Bracket, DatasetRoundTrip) {
  std::vector<DatasetLine> lines{
      {parse("(()"), std::string("pos")}, {parse(""), std::nullopt}, {parse("))"), "neg"}};
  std::stringstream ss;
  write_dataset(ss, lines);
  EXPECT_EQ(read_dataset(ss), lines);
}

TEST(Bracket, DatasetRejectsGarbage) {
  std::stringstream ss("(()\n(a)\tpos\n");
  EXPECT_THROW(read_dataset(ss), InvalidCharacter);
}

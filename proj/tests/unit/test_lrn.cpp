#include <gtest/gtest.h>

#include <cmath>

#include "lrncount/bracket.hpp"
#include "lrncount/errors.hpp"
#include "lrncount/lrn.hpp"

using namespace lrncount;

namespace {

// Closed sum h_T = U^T h0 + sum_t inc_t U^(T-t), evaluated in long double.
long double closed_sum(const LrnParams& p, const BracketSeq& seq, long double h0) {
  const long double u = p.u;
  const std::size_t T = seq.size();
  long double h = std::pow(u, static_cast<long double>(T)) * h0;
  for (std::size_t t = 0; t < T; ++t) {
    const long double inc = seq[t] == Token::Open ? (long double)p.w_open + p.w_b
                                                  : (long double)p.w_close + p.w_b;
    h += inc * std::pow(u, static_cast<long double>(T - 1 - t));
  }
  return h;
}

LrnParams random_params(Rng& rng, double ulo = -1.3, double uhi = 1.3) {
  return {uniform(rng, -2, 2), uniform(rng, -2, 2), uniform(rng, ulo, uhi), uniform(rng, -1, 1)};
}

}  // namespace

TEST(Lrn, WorkedTrajectories) {
  auto tr = forward(LrnParams::canonical(), parse("(()"));
  EXPECT_EQ(tr.h, (std::vector<double>{1, 2, 1}));
  EXPECT_EQ(tr.final_value(), 1.0);
  EXPECT_EQ(forward(LrnParams::canonical(), parse("")).final_value(), 0.0);

  // 1, 1.9, 0.71, -0.361
  const LrnParams leaky{1, -1, 0.9, 0};
  tr = forward(leaky, parse("(())"));
  ASSERT_EQ(tr.h.size(), 4u);
  EXPECT_NEAR(tr.h[1], 1.9, 1e-15);
  EXPECT_NEAR(tr.h[2], 0.71, 1e-15);
  EXPECT_NEAR(tr.h[3], -0.361, 1e-15);
  EXPECT_FALSE(accepts_lrn(leaky, parse("(())")));

  EXPECT_EQ(forward_step({2, -3, 0.5, 1}, 4.0, Token::Close), -2.0 + 2.0);
  EXPECT_EQ(forward_step({2, -3, 0.5, 1}, 4.0, Token::Open), 3.0 + 2.0);
}

TEST(Lrn, MatchesClosedSumOracle) {
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const auto p = random_params(rng);
    const double h0 = uniform(rng, -2, 2);
    const auto seq = sample_random(1 + uniform_below(rng, 30), rng);
    const long double want = closed_sum(p, seq, h0);
    const double got = final_activation(p, seq, h0);
    EXPECT_NEAR(got, static_cast<double>(want), 1e-9 * std::max(1.0L, std::fabs(want)));
    EXPECT_EQ(got, forward(p, seq, h0).final_value());
  }
}

TEST(Lrn, LinearInInitialState) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_params(rng, -1.0, 1.0);
    const auto seq = sample_random(uniform_below(rng, 16), rng);
    const double h0 = uniform(rng, -3, 3);
    const double shift = final_activation(p, seq, h0) - final_activation(p, seq, 0.0);
    EXPECT_NEAR(shift, std::pow(p.u, static_cast<double>(seq.size())) * h0, 1e-9);
  }
}

TEST(Lrn, UnitRecurrenceIgnoresOrder) {
  // With U = 1 and integer weights the sum is exact, so any permutation of the
  // tokens gives the same final value bit for bit.
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const LrnParams p{double(int(uniform_below(rng, 7)) - 3), double(int(uniform_below(rng, 7)) - 3),
                      1.0, double(int(uniform_below(rng, 3)) - 1)};
    auto seq = sample_random(1 + uniform_below(rng, 14), rng);
    std::vector<Token> toks(seq.begin(), seq.end());
    for (std::size_t i = toks.size(); i > 1; --i) std::swap(toks[i - 1], toks[uniform_below(rng, i)]);
    const auto s = stats(seq);
    EXPECT_EQ(final_activation(p, seq), final_activation(p, BracketSeq(toks)));
    EXPECT_EQ(final_activation(p, seq), s.n_open * p.a() + s.n_close * p.b());
  }
}

TEST(Lrn, Indicators) {
  auto r = indicators(LrnParams::canonical());
  EXPECT_TRUE(r.holds);
  EXPECT_EQ(*r.ab_ratio, -1.0);
  EXPECT_EQ(*r.ab_deviation, 0.0);
  EXPECT_EQ(r.u_deviation, 0.0);

  r = indicators({1, 1, -1, 0});
  EXPECT_FALSE(r.holds);
  EXPECT_EQ(*r.ab_ratio, 1.0);
  EXPECT_EQ(*r.ab_deviation, 2.0);
  EXPECT_EQ(r.u_deviation, 2.0);

  // b = w_close + w_b = 0: the ratio is undefined and never counts as holding.
  r = indicators({1, 0.5, 1, -0.5});
  EXPECT_FALSE(r.ab_ratio.has_value());
  EXPECT_FALSE(r.holds);

  EXPECT_TRUE(indicators({1, -1, 1 + 1e-7, 0}).holds);
  EXPECT_FALSE(indicators({1, -1, 1 + 1e-7, 0}, 0.0).holds);
  EXPECT_TRUE(indicators(LrnParams::canonical(), 0.0).holds);
  EXPECT_THROW(indicators(LrnParams::canonical(), -1e-3), std::invalid_argument);

  // Bias shifts both increments.
  r = indicators({1.5, -0.5, 1, -0.5});
  EXPECT_TRUE(r.holds);
}

TEST(Lrn, IndicatorsExact) {
  EXPECT_TRUE(indicators_exact(LrnParams::canonical()));
  EXPECT_TRUE(indicators_exact(LrnParams::from_increments(-3.5, 3.5, 1)));
  EXPECT_FALSE(indicators_exact({1, -1, 1 + 1e-12, 0}));
  EXPECT_FALSE(indicators_exact({0, 0, 1, 0}));
}

TEST(Lrn, ClosedForm) {
  EXPECT_EQ(closed_form(LrnParams::canonical(), 5, 2, CheckMode::Checked), 3.0);
  EXPECT_EQ(closed_form(LrnParams::from_increments(-3.5, 3.5, 1), 1, 4, CheckMode::Checked), 10.5);
  EXPECT_THROW(closed_form({1, -1, 0.9, 0}, 1, 1, CheckMode::Checked), IndicatorsViolated);
  EXPECT_EQ(closed_form({1, -1, 0.9, 0}, 3, 1), 2.0);
}

TEST(Lrn, ParamsJsonRoundTrip) {
  Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    const auto p = random_params(rng);
    EXPECT_EQ(params_from_json_text(to_json_text(p)), p);
  }
  EXPECT_THROW(params_from_json_text(R"({"w_open":1,"w_close":2})"), FormatError);
  EXPECT_THROW(params_from_json_text("nope"), FormatError);
}

TEST(Lrn, ParamsCsv) {
  EXPECT_EQ(parse_params_csv("1,-1,1"), LrnParams::canonical());
  EXPECT_EQ(parse_params_csv("0.5,-0.25,1,0.125"), (LrnParams{0.5, -0.25, 1, 0.125}));
  for (auto bad : {"1,2", "a,b,c", "1,2,3,4,5", "1,nan,1", "1,2,3x", ""}) {
    EXPECT_THROW(parse_params_csv(bad), FormatError) << bad;
  }
}

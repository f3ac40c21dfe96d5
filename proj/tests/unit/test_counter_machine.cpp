#include <gtest/gtest.h>

#include "lrncount/bracket.hpp"
#include "lrncount/counter_machine.hpp"
#include "lrncount/errors.hpp"

using namespace lrncount;

TEST(CounterUpdate, ApplyAndText) {
  EXPECT_EQ(CounterUpdate::add(3).apply(4), 7);
  EXPECT_EQ(CounterUpdate::add(-1).apply(0), -1);
  EXPECT_EQ(CounterUpdate::set_zero().apply(42), 0);
  EXPECT_EQ(CounterUpdate::add(0).apply(-5), -5);
  for (auto u : {CounterUpdate::add(1), CounterUpdate::add(-1), CounterUpdate::add(0),
                 CounterUpdate::add(17), CounterUpdate::set_zero()}) {
    EXPECT_EQ(CounterUpdate::parse(u.to_string()), u) << u.to_string();
  }
  EXPECT_EQ(CounterUpdate::set_zero().to_string(), "x0");
  EXPECT_EQ(CounterUpdate::add(1).to_string(), "+1");
  EXPECT_THROW(CounterUpdate::parse("*2"), FormatError);
  EXPECT_THROW(CounterUpdate::parse(""), FormatError);
}

TEST(CounterMachine, ZeroCheck) {
  std::vector<std::int64_t> v{0, 3, -2, 0};
  auto mask = zero_check(v);
  EXPECT_EQ(mask, (std::vector<std::uint8_t>{0, 1, 1, 0}));
  EXPECT_EQ(pack_mask(mask), 0b0110u);
  EXPECT_TRUE(zero_check({}).empty());
}

TEST(CounterMachine, BbCounterRun) {
  const auto m = bb_counter();
  EXPECT_EQ(m.counters(), 1u);
  EXPECT_EQ(initial_config(m).counters, std::vector<std::int64_t>{0});
  EXPECT_EQ(run(m, "(()((").counters[0], 3);
  EXPECT_EQ(run(m, "))").counters[0], -2);
  EXPECT_EQ(step(m, initial_config(m), ')').counters[0], -1);
  EXPECT_EQ(step(m, initial_config(m), Token::Open).counters[0], 1);
  EXPECT_TRUE(accepts(m, parse(")(")));
  EXPECT_FALSE(accepts(m, parse("(((")));
}

TEST(CounterMachine, UnknownTokenPosition) {
  const auto m = bb_counter();
  try {
    run(m, "(()a)");
    FAIL();
  } catch (const UnknownToken& e) {
    EXPECT_EQ(e.position(), 3u);
    EXPECT_EQ(e.symbol(), 'a');
  }
  EXPECT_THROW(step(m, initial_config(m), 'z'), UnknownToken);
}

TEST(CounterMachine, CounterEqualsDiffAndBb) {
  const auto m = bb_counter();
  for (std::size_t len = 0; len <= 12; ++len) {
    for (auto seq : enumerate_all(len)) {
      ASSERT_EQ(run(m, seq).counters[0], stats(seq).diff);
      ASSERT_EQ(accepts(m, seq), in_bb(seq));
    }
  }
}

namespace {

// Counter 0 tracks '(' minus ')'. Counter 1 counts ')' and is cleared by a
// '(' read in state s while counter 0 is zero.
CounterMachine two_counter() {
  return CounterMachine::Builder({'(', ')'}, {"s", "t"}, "s", 2)
      .rule('(', "s", std::nullopt, {CounterUpdate::add(1), CounterUpdate::add(0)}, "s")
      .rule('(', "s", std::vector<std::uint8_t>{0, 0},
            {CounterUpdate::add(1), CounterUpdate::set_zero()}, "t")
      .rule('(', "s", std::vector<std::uint8_t>{0, 1},
            {CounterUpdate::add(1), CounterUpdate::set_zero()}, "t")
      .rule(')', "s", std::nullopt, {CounterUpdate::add(-1), CounterUpdate::add(1)}, "s")
      .rule('(', "t", std::nullopt, {CounterUpdate::add(1), CounterUpdate::add(0)}, "s")
      .rule(')', "t", std::nullopt, {CounterUpdate::add(-1), CounterUpdate::add(1)}, "t")
      .accept("s", 1)
      .build();
}

}  // namespace

TEST(CounterMachine, MaskSpecificRulesOverrideWildcard) {
  const auto m = two_counter();
  // ')' -> (-1,1) s, then '(' sees mask (1,1) and takes the wildcard.
  auto c = run(m, ")(");
  EXPECT_EQ(c.counters, (std::vector<std::int64_t>{0, 1}));
  EXPECT_EQ(c.state, *m.state_index("s"));
  // A third '(' sees mask (0,1) and hits the specific SetZero rule.
  c = run(m, ")((");
  EXPECT_EQ(c.counters, (std::vector<std::int64_t>{1, 0}));
  EXPECT_EQ(c.state, *m.state_index("t"));
  c = run(m, "())(");
  EXPECT_EQ(c.counters, (std::vector<std::int64_t>{0, 2}));
  EXPECT_EQ(c.state, *m.state_index("s"));
  EXPECT_THROW(accepts(m, parse("()")), UnsupportedArity);
}

TEST(CounterMachine, BuilderRejectsIncompleteOrDuplicate) {
  using B = CounterMachine::Builder;
  auto plus = std::vector<CounterUpdate>{CounterUpdate::add(1)};
  EXPECT_THROW(B({'(', ')'}, {"q"}, "q", 1).rule('(', "q", std::nullopt, plus, "q").build(),
               FormatError);
  EXPECT_THROW(B({'('}, {"q"}, "q", 1)
                   .rule('(', "q", std::nullopt, plus, "q")
                   .rule('(', "q", std::nullopt, plus, "q")
                   .build(),
               FormatError);
  EXPECT_THROW(B({'('}, {"q"}, "q", 1).rule('(', "r", std::nullopt, plus, "q"), FormatError);
  EXPECT_THROW(B({'('}, {"q"}, "q", 1).rule('x', "q", std::nullopt, plus, "q"), FormatError);
  EXPECT_THROW(B({'('}, {"q"}, "q", 1).rule('(', "q", std::nullopt, {}, "q"), FormatError);
  EXPECT_THROW(B({'('}, {"q"}, "nope", 1).rule('(', "q", std::nullopt, plus, "q").build(),
               FormatError);
}

TEST(CounterMachine, JsonRoundTrip) {
  for (const auto& m : {bb_counter(), two_counter()}) {
    const auto text = to_json_text(m);
    const auto back = machine_from_json_text(text);
    EXPECT_EQ(back, m);
    EXPECT_EQ(to_json_text(back), text);
  }
}

TEST(CounterMachine, JsonErrors) {
  EXPECT_THROW(machine_from_json_text("{"), FormatError);
  EXPECT_THROW(machine_from_json_text("{}"), FormatError);
  EXPECT_THROW(machine_from_json_text(R"({"alphabet":["(("],"states":["q"],"initial_state":"q",
      "counters":1,"rules":[],"acceptance":[]})"),
               FormatError);
}

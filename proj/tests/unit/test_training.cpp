#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "lrncount/bracket.hpp"
#include "lrncount/errors.hpp"
#include "lrncount/training.hpp"

using namespace lrncount;

namespace {

std::vector<Example> random_batch(Rng& rng, std::size_t max_len) {
  std::vector<Example> batch;
  const std::size_t n = 1 + uniform_below(rng, 8);
  for (std::size_t i = 0; i < n; ++i) {
    batch.push_back(Example::from(sample_random(1 + uniform_below(rng, max_len), rng)));
  }
  return batch;
}

Model random_model(Task task, BiasMode mode, Rng& rng) {
  auto m = init_model(task, mode, 1.0, rng);
  m.cell.u = uniform(rng, -1.1, 1.1);
  return m;
}

struct Combo {
  Task task;
  BiasMode mode;
};

class GradientCheck : public ::testing::TestWithParam<Combo> {};

}  // namespace

TEST(Training, TrainSetLabels) {
  const auto two = build_train_set(2);
  ASSERT_EQ(two.size(), 4u);
  std::map<TernaryLabel, int> counts;
  for (const auto& ex : two) ++counts[ex.ternary];
  EXPECT_EQ(counts[TernaryLabel::Pos], 1);
  EXPECT_EQ(counts[TernaryLabel::Zero], 2);
  EXPECT_EQ(counts[TernaryLabel::Neg], 1);

  for (std::size_t len : {1, 4, 8}) {
    const auto set = build_train_set(len);
    EXPECT_EQ(set.size(), std::size_t{1} << len);
    for (const auto& ex : set) {
      EXPECT_EQ(ex.binary, label_binary(ex.seq));
      EXPECT_EQ(ex.ternary, label_ternary(ex.seq));
      EXPECT_EQ(target_class(ex, Task::Binary), static_cast<std::size_t>(ex.binary));
      EXPECT_EQ(target_class(ex, Task::Ternary), static_cast<std::size_t>(ex.ternary));
    }
  }
  EXPECT_THROW(build_train_set(kMaxTrainLength + 1), LengthCapExceeded);
}

TEST(Training, UniformHeadLosses) {
  const auto batch = build_train_set(3);
  Model bin{LrnParams::canonical(), HeadParams::zeros(Task::Binary), BiasMode::NoBias};
  Model ter{LrnParams::canonical(), HeadParams::zeros(Task::Ternary), BiasMode::NoBias};
  EXPECT_NEAR(loss(bin, batch), std::log(2.0), 1e-15);
  EXPECT_NEAR(loss(ter, batch), std::log(3.0), 1e-15);
  auto p = head_forward(bin, 5.0);
  EXPECT_EQ(p, (std::vector<double>{0.5, 0.5}));
  p = head_forward(ter, -2.0);
  for (double x : p) EXPECT_NEAR(x, 1.0 / 3.0, 1e-15);
}

TEST(Training, LossFromLogitsStaysFinite) {
  Model m{LrnParams::canonical(), {Task::Binary, {-1000.0}, {0.0}}, BiasMode::NoBias};
  std::vector<Example> batch{Example::from(parse("))"))};
  EXPECT_NEAR(loss(m, batch), 2000.0, 1e-9);
  Model t{LrnParams::canonical(), {Task::Ternary, {-800.0, 0, 800.0}, {0, 0, 0}}, BiasMode::NoBias};
  EXPECT_NEAR(loss(t, batch), 3200.0, 1e-9);
}

TEST(Training, PredictRules) {
  Model bin{LrnParams::canonical(), {Task::Binary, {1.0}, {0.0}}, BiasMode::NoBias};
  EXPECT_EQ(predict(bin, 0.0), 0u);  // logit 0 is not > 0
  EXPECT_EQ(predict(bin, 1e-12), 1u);
  Model ter{LrnParams::canonical(), {Task::Ternary, {0, 0, 0}, {0, 0, 0}}, BiasMode::NoBias};
  EXPECT_EQ(predict(ter, 3.0), 0u);  // three-way tie goes to the lowest index
  ter.head.c = {0, 1, 1};
  EXPECT_EQ(predict(ter, 3.0), 1u);
}

TEST_P(GradientCheck, MatchesCentralDifferences) {
  const auto [task, mode] = GetParam();
  Rng rng(1000 + 10 * static_cast<int>(task) + static_cast<int>(mode));
  const double step = 1e-4;
  for (int trial = 0; trial < 50; ++trial) {
    const Model model = random_model(task, mode, rng);
    const auto batch = random_batch(rng, 8);
    const auto analytic = flatten(gradients(model, batch));
    const auto mask = trainable_mask(model);
    const auto names = coordinate_names(model);
    const auto theta = flatten(model);
    ASSERT_EQ(analytic.size(), theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
      if (!mask[i]) {
        EXPECT_EQ(analytic[i], 0.0) << names[i];
        continue;
      }
      auto plus = theta, minus = theta;
      plus[i] += step;
      minus[i] -= step;
      const double fd =
          (loss(unflatten(model, plus), batch) - loss(unflatten(model, minus), batch)) / (2 * step);
      const double rel = std::fabs(analytic[i] - fd) / std::max(1.0, std::fabs(analytic[i]));
      EXPECT_LT(rel, 1e-4) << names[i] << " trial " << trial;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(AllModes, GradientCheck,
                         ::testing::Values(Combo{Task::Binary, BiasMode::NoBias},
                                           Combo{Task::Binary, BiasMode::WithBias},
                                           Combo{Task::Ternary, BiasMode::NoBias},
                                           Combo{Task::Ternary, BiasMode::WithBias}));

TEST(Training, TrainableMask) {
  Rng rng(1);
  const auto nb = trainable_mask(init_model(Task::Binary, BiasMode::NoBias, 0.5, rng));
  EXPECT_EQ(nb, (std::vector<bool>{true, true, true, false, true, false}));
  const auto wb = trainable_mask(init_model(Task::Binary, BiasMode::WithBias, 0.5, rng));
  EXPECT_EQ(wb, (std::vector<bool>{true, true, true, true, true, true}));
  const auto tn = trainable_mask(init_model(Task::Ternary, BiasMode::NoBias, 0.5, rng));
  EXPECT_EQ(tn, (std::vector<bool>{true, true, true, false, true, true, true, true, true, true}));
}

TEST(Training, FlattenRoundTrip) {
  Rng rng(4);
  const auto m = init_model(Task::Ternary, BiasMode::WithBias, 0.5, rng);
  EXPECT_EQ(unflatten(m, flatten(m)), m);
}

TEST(Training, NoBiasStaysFrozen) {
  for (Task task : {Task::Binary, Task::Ternary}) {
    TrainConfig c;
    c.task = task;
    c.train_length = 4;
    c.epochs = 30;
    c.n_runs = 1;
    c.eval_samples = 20;
    const auto r = train_run(c, 0);
    EXPECT_EQ(r.final_model.cell.w_b, 0.0);
    if (task == Task::Binary) EXPECT_EQ(r.final_model.head.c[0], 0.0);
  }
}

TEST(Training, DeterministicRuns) {
  TrainConfig c;
  c.task = Task::Ternary;
  c.bias_mode = BiasMode::WithBias;
  c.epochs = 20;
  c.eval_samples = 50;
  const auto a = train_run(c, 3);
  const auto b = train_run(c, 3);
  EXPECT_EQ(a, b);
  EXPECT_NE(train_run(c, 4).run_seed, a.run_seed);
  EXPECT_EQ(a.epochs.size(), 20u);
}

TEST(Training, LossDecreasesInMostRuns) {
  for (std::size_t len : {4, 8}) {
    TrainConfig c;
    c.train_length = len;
    c.eval_samples = 10;
    int decreased = 0;
    for (std::size_t i = 0; i < c.n_runs; ++i) {
      const auto r = train_run(c, i);
      decreased += r.final_train_loss() < r.initial_loss ? 1 : 0;
    }
    EXPECT_GE(decreased, 9) << "train length " << len;
  }
}

TEST(Training, EvaluateSeparatedHeads) {
  Rng rng(8);
  Model bin{LrnParams::canonical(), {Task::Binary, {50.0}, {-25.0}}, BiasMode::WithBias};
  EXPECT_EQ(evaluate(bin, Task::Binary, 50, 300, rng), 100.0);
  Model ter{LrnParams::canonical(), {Task::Ternary, {10, 0, -10}, {-5, 0, -5}}, BiasMode::WithBias};
  EXPECT_EQ(evaluate(ter, Task::Ternary, 50, 300, rng), 100.0);
  const auto d = evaluate_detailed(ter, Task::Ternary, 20, 400, rng);
  std::size_t total = 0;
  for (auto n : d.class_total) total += n;
  EXPECT_EQ(total, 400u);
  EXPECT_EQ(d.class_correct, d.class_total);
}

TEST(Training, EvaluateUniformHeadGivesMajorityRate) {
  // Always NonPos, so accuracy is P(diff <= 0) = (1 + C(20,10)/2^20) / 2.
  Rng rng(12);
  Model m{LrnParams::canonical(), HeadParams::zeros(Task::Binary), BiasMode::NoBias};
  const double want = 100.0 * (1.0 + 184756.0 / 1048576.0) / 2.0;
  EXPECT_NEAR(evaluate(m, Task::Binary, 20, 4000, rng), want, 3.0);
  for (int i = 0; i < 20; ++i) {
    const double one = evaluate(m, Task::Binary, 7, 1, rng);
    EXPECT_TRUE(one == 0.0 || one == 100.0);
  }
}

TEST(Training, ParseNames) {
  EXPECT_EQ(parse_task("binary"), Task::Binary);
  EXPECT_EQ(parse_task("ternary"), Task::Ternary);
  EXPECT_EQ(parse_bias_mode("on"), BiasMode::WithBias);
  EXPECT_EQ(parse_bias_mode("off"), BiasMode::NoBias);
  EXPECT_THROW(parse_task("unary"), FormatError);
  EXPECT_THROW(parse_bias_mode("maybe"), FormatError);
}

TEST(Training, ValidateRejectsBadConfigs) {
  TrainConfig c;
  c.learning_rate = -1;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = {};
  c.n_runs = 0;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = {};
  c.train_length = 0;
  EXPECT_THROW(validate(c), std::invalid_argument);
  EXPECT_NO_THROW(validate(TrainConfig{}));
}

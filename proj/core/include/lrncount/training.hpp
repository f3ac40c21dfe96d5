#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lrncount/bracket.hpp"
#include "lrncount/lrn.hpp"
#include "lrncount/rng.hpp"

namespace lrncount {

enum class Task : std::uint8_t { Binary, Ternary };
enum class BiasMode : std::uint8_t { NoBias, WithBias };

std::string_view to_string(Task task) noexcept;
std::string_view to_string(BiasMode mode) noexcept;
/// Accepts "binary"/"ternary"; throws FormatError otherwise.
Task parse_task(std::string_view text);
/// Accepts "on"/"off" (also "bias"/"no-bias"); throws FormatError otherwise.
BiasMode parse_bias_mode(std::string_view text);

/// 1 logit (sigmoid) for Binary, 3 logits (softmax) for Ternary.
constexpr std::size_t num_logits(Task task) noexcept { return task == Task::Binary ? 1 : 3; }
/// Number of predicted classes: NonPos/Pos or Pos/Zero/Neg.
constexpr std::size_t num_classes(Task task) noexcept { return task == Task::Binary ? 2 : 3; }

/// Output layer on top of the final activation: logits_i = v_i * h + c_i.
struct HeadParams {
  Task task = Task::Binary;
  std::vector<double> v;
  std::vector<double> c;

  static HeadParams zeros(Task task);

  friend bool operator==(const HeadParams&, const HeadParams&) = default;
};

/// In NoBias mode cell.w_b (and the binary head bias) are held at 0 and never
/// updated. The ternary head bias is always trainable.
struct Model {
  LrnParams cell;
  HeadParams head;
  BiasMode bias_mode = BiasMode::NoBias;

  Task task() const noexcept { return head.task; }

  friend bool operator==(const Model&, const Model&) = default;
};

/// Gradients share the model's shape; frozen coordinates stay 0.
using Gradient = Model;

/// Flat view of every scalar in a model, in the order
/// w_open, w_close, u, w_b, v..., c....
std::vector<double> flatten(const Model& model);
Model unflatten(const Model& shape, std::span<const double> values);
/// Same layout as flatten; true where the coordinate is trained.
std::vector<bool> trainable_mask(const Model& model);
std::vector<std::string> coordinate_names(const Model& model);

struct Example {
  BracketSeq seq;
  BinaryLabel binary = BinaryLabel::NonPos;
  TernaryLabel ternary = TernaryLabel::Zero;

  static Example from(BracketSeq seq);
};

/// Class index: BinaryLabel value for Binary and TernaryLabel value for Ternary.
std::size_t target_class(const Example& ex, Task task) noexcept;

inline constexpr std::size_t kMaxTrainLength = 12;

/// All 2^train_length sequences with both labels. Throws LengthCapExceeded
/// above kMaxTrainLength.
std::vector<Example> build_train_set(std::size_t train_length);

std::vector<double> head_logits(const Model& model, double h_final);
/// Class probabilities indexed like target_class; Binary gives {1 - p, p}
/// where p = sigmoid(v h + c) is P(Pos).
std::vector<double> head_forward(const Model& model, double h_final);
/// Binary: Pos iff the logit is > 0 (p > 0.5). Ternary: argmax, lowest index on ties.
std::size_t predict(const Model& model, double h_final);

/// Mean cross-entropy on a nonempty batch, computed from logits.
double loss(const Model& model, std::span<const Example> batch);

/// Exact gradient of loss() by backpropagation through the unrolled recurrence.
Gradient gradients(const Model& model, std::span<const Example> batch);

/// Percent of examples classified correctly.
double accuracy(const Model& model, std::span<const Example> batch);

struct TrainConfig {
  Task task = Task::Binary;
  BiasMode bias_mode = BiasMode::NoBias;
  std::size_t train_length = 4;
  std::size_t epochs = 100;
  std::size_t n_runs = 10;
  std::uint64_t seed = 0;
  double learning_rate = 0.2;
  std::size_t batch_size = 4;
  std::vector<std::size_t> eval_lengths{20, 50};
  std::size_t eval_samples = 500;
  double init_scale = 0.5;  // every trainable scalar ~ U[-init_scale, init_scale]
  double divergence_limit = 1e6;
  double clip_norm = 0.5;  // global gradient-norm clip per step; 0 disables


  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Throws std::invalid_argument for configurations that cannot run.
void validate(const TrainConfig& config);

struct EpochMetrics {
  double loss = 0.0;
  double accuracy = 0.0;

  friend bool operator==(const EpochMetrics&, const EpochMetrics&) = default;
};

struct EvalResult {
  std::size_t length = 0;
  std::size_t samples = 0;
  double accuracy = 0.0;  // percent
  std::vector<std::size_t> class_total;
  std::vector<std::size_t> class_correct;

  friend bool operator==(const EvalResult&, const EvalResult&) = default;
};

struct RunRecord {
  TrainConfig config;
  std::size_t run_index = 0;
  std::uint64_t run_seed = 0;
  double initial_loss = 0.0;
  double initial_accuracy = 0.0;
  std::vector<EpochMetrics> epochs;
  Model final_model;
  IndicatorReport indicators;
  std::vector<EvalResult> eval;
  bool diverged = false;
  std::string diagnostics;

  double final_train_accuracy() const noexcept {
    return epochs.empty() ? initial_accuracy : epochs.back().accuracy;
  }
  double final_train_loss() const noexcept {
    return epochs.empty() ? initial_loss : epochs.back().loss;
  }
  /// Accuracy at an evaluation length, NaN when that length was not evaluated.
  double eval_accuracy(std::size_t length) const noexcept;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

std::uint64_t run_seed(const TrainConfig& config, std::size_t run_index) noexcept;

Model init_model(Task task, BiasMode bias_mode, double scale, Rng& rng);

/// Euclidean norm over every coordinate of a gradient.
double gradient_norm(const Gradient& grad) noexcept;

/// model -= lr * grad on trainable coordinates.
void sgd_step(Model& model, const Gradient& grad, double learning_rate);

EvalResult evaluate_detailed(const Model& model, Task task, std::size_t length,
                             std::size_t n_samples, Rng& rng);

/// Accuracy percent on n_samples uniform random sequences of `length`.
double evaluate(const Model& model, Task task, std::size_t length, std::size_t n_samples,
                Rng& rng);

/// One full training run. Deterministic in (config, run_index). A non-finite
/// or exploding loss stops the run and marks the record diverged.
RunRecord train_run(const TrainConfig& config, std::size_t run_index);

}  // namespace lrncount

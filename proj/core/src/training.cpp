#include "lrncount/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "lrncount/errors.hpp"

namespace lrncount {

std::string_view to_string(Task task) noexcept {
  return task == Task::Binary ? "binary" : "ternary";
}

std::string_view to_string(BiasMode mode) noexcept {
  return mode == BiasMode::NoBias ? "off" : "on";
}

Task parse_task(std::string_view text) {
  if (text == "binary") return Task::Binary;
  if (text == "ternary") return Task::Ternary;
  throw FormatError("unknown task '" + std::string(text) + "' (expected binary or ternary)");
}

BiasMode parse_bias_mode(std::string_view text) {
  if (text == "off" || text == "no-bias" || text == "nobias") return BiasMode::NoBias;
  if (text == "on" || text == "bias") return BiasMode::WithBias;
  throw FormatError("unknown bias mode '" + std::string(text) + "' (expected on or off)");
}

HeadParams HeadParams::zeros(Task task) {
  return {task, std::vector<double>(num_logits(task), 0.0),
          std::vector<double>(num_logits(task), 0.0)};
}

namespace {

bool head_bias_trainable(const Model& m) noexcept {
  return m.task() == Task::Ternary || m.bias_mode == BiasMode::WithBias;
}

// log(1 + e^z) without overflow.
double softplus(double z) noexcept { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) noexcept {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double log_sum_exp(std::span<const double> z) noexcept {
  const double top = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double zi : z) sum += std::exp(zi - top);
  return top + std::log(sum);
}

}  // namespace

std::vector<double> flatten(const Model& model) {
  std::vector<double> out{model.cell.w_open, model.cell.w_close, model.cell.u, model.cell.w_b};
  out.insert(out.end(), model.head.v.begin(), model.head.v.end());
  out.insert(out.end(), model.head.c.begin(), model.head.c.end());
  return out;
}

Model unflatten(const Model& shape, std::span<const double> values) {
  const std::size_t n = num_logits(shape.task());
  if (values.size() != 4 + 2 * n) throw std::invalid_argument("flat parameter vector has wrong size");
  Model m = shape;
  m.cell = {values[0], values[1], values[2], values[3]};
  std::copy_n(values.begin() + 4, n, m.head.v.begin());
  std::copy_n(values.begin() + 4 + static_cast<std::ptrdiff_t>(n), n, m.head.c.begin());
  return m;
}

std::vector<bool> trainable_mask(const Model& model) {
  const std::size_t n = num_logits(model.task());
  std::vector<bool> mask{true, true, true, model.bias_mode == BiasMode::WithBias};
  mask.insert(mask.end(), n, true);
  mask.insert(mask.end(), n, head_bias_trainable(model));
  return mask;
}

std::vector<std::string> coordinate_names(const Model& model) {
  std::vector<std::string> names{"w_open", "w_close", "u", "w_b"};
  const std::size_t n = num_logits(model.task());
  for (std::size_t i = 0; i < n; ++i) names.push_back("v" + std::to_string(i));
  for (std::size_t i = 0; i < n; ++i) names.push_back("c" + std::to_string(i));
  return names;
}

Example Example::from(BracketSeq seq) {
  Example ex;
  ex.binary = label_binary(seq);
  ex.ternary = label_ternary(seq);
  ex.seq = std::move(seq);
  return ex;
}

std::size_t target_class(const Example& ex, Task task) noexcept {
  return task == Task::Binary ? static_cast<std::size_t>(ex.binary)
                              : static_cast<std::size_t>(ex.ternary);
}

std::vector<Example> build_train_set(std::size_t train_length) {
  std::vector<Example> out;
  for (auto seq : enumerate_all(train_length, kMaxTrainLength)) out.push_back(Example::from(seq));
  return out;
}

std::vector<double> head_logits(const Model& model, double h_final) {
  std::vector<double> z(model.head.v.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = model.head.v[i] * h_final + model.head.c[i];
  return z;
}

std::vector<double> head_forward(const Model& model, double h_final) {
  const auto z = head_logits(model, h_final);
  if (model.task() == Task::Binary) {
    const double p = sigmoid(z[0]);
    return {1.0 - p, p};
  }
  const double lse = log_sum_exp(z);
  std::vector<double> p(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) p[i] = std::exp(z[i] - lse);
  return p;
}

std::size_t predict(const Model& model, double h_final) {
  const auto z = head_logits(model, h_final);
  if (model.task() == Task::Binary) return z[0] > 0.0 ? 1 : 0;
  return static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
}

namespace {

// Cross-entropy of one example from its logits.
double example_loss(Task task, std::span<const double> z, std::size_t target) noexcept {
  if (task == Task::Binary) return softplus(z[0]) - (target == 1 ? z[0] : 0.0);
  return log_sum_exp(z) - z[target];
}

}  // namespace

double loss(const Model& model, std::span<const Example> batch) {
  if (batch.empty()) throw std::invalid_argument("loss of an empty batch");
  double total = 0.0;
  for (const auto& ex : batch) {
    const auto z = head_logits(model, final_activation(model.cell, ex.seq));
    total += example_loss(model.task(), z, target_class(ex, model.task()));
  }
  return total / static_cast<double>(batch.size());
}

Gradient gradients(const Model& model, std::span<const Example> batch) {
  if (batch.empty()) throw std::invalid_argument("gradient of an empty batch");
  const Task task = model.task();
  const std::size_t n = num_logits(task);

  Gradient g{{}, HeadParams::zeros(task), model.bias_mode};
  std::vector<double> dz(n);
  for (const auto& ex : batch) {
    const auto traj = forward(model.cell, ex.seq, 0.0);
    const double h_final = traj.final_value();
    const auto z = head_logits(model, h_final);
    const std::size_t target = target_class(ex, task);

    if (task == Task::Binary) {
      dz[0] = sigmoid(z[0]) - (target == 1 ? 1.0 : 0.0);
    } else {
      const double lse = log_sum_exp(z);
      for (std::size_t i = 0; i < n; ++i) dz[i] = std::exp(z[i] - lse) - (i == target ? 1.0 : 0.0);
    }

    double delta = 0.0;  // dL/dh_t, starting at t = T
    for (std::size_t i = 0; i < n; ++i) {
      g.head.v[i] += dz[i] * h_final;
      g.head.c[i] += dz[i];
      delta += dz[i] * model.head.v[i];
    }

    // h_t = w(x_t) + u h_{t-1} + w_b  =>  dh_t/du = h_{t-1}, dh_t/dh_{t-1} = u.
    for (std::size_t t = ex.seq.size(); t-- > 0;) {
      const double h_prev = t == 0 ? traj.h0 : traj.h[t - 1];
      (ex.seq[t] == Token::Open ? g.cell.w_open : g.cell.w_close) += delta;
      g.cell.w_b += delta;
      g.cell.u += delta * h_prev;
      delta *= model.cell.u;
    }
  }

  const double scale = 1.0 / static_cast<double>(batch.size());
  g.cell.w_open *= scale;
  g.cell.w_close *= scale;
  g.cell.u *= scale;
  g.cell.w_b = model.bias_mode == BiasMode::WithBias ? g.cell.w_b * scale : 0.0;
  const bool train_c = head_bias_trainable(model);
  for (std::size_t i = 0; i < n; ++i) {
    g.head.v[i] *= scale;
    g.head.c[i] = train_c ? g.head.c[i] * scale : 0.0;
  }
  return g;
}

double accuracy(const Model& model, std::span<const Example> batch) {
  if (batch.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& ex : batch) {
    if (predict(model, final_activation(model.cell, ex.seq)) == target_class(ex, model.task())) {
      ++correct;
    }
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(batch.size());
}

void validate(const TrainConfig& config) {
  if (config.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (config.train_length < 1) throw std::invalid_argument("train length must be >= 1");
  if (config.train_length > kMaxTrainLength) {
    throw LengthCapExceeded(config.train_length, kMaxTrainLength);
  }
  if (config.n_runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (config.batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (config.eval_samples < 1) throw std::invalid_argument("eval samples must be >= 1");
  if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
    throw std::invalid_argument("learning rate must be positive and finite");
  }
  if (!(config.clip_norm >= 0.0) || !std::isfinite(config.clip_norm)) {
    throw std::invalid_argument("clip norm must be non-negative and finite");
  }
  if (!(config.init_scale >= 0.0) || !std::isfinite(config.init_scale)) {
    throw std::invalid_argument("init scale must be non-negative and finite");
  }
  for (auto len : config.eval_lengths) {
    if (len < 1) throw std::invalid_argument("eval lengths must be >= 1");
  }
}

double RunRecord::eval_accuracy(std::size_t length) const noexcept {
  for (const auto& e : eval) {
    if (e.length == length) return e.accuracy;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::uint64_t run_seed(const TrainConfig& config, std::size_t run_index) noexcept {
  return derive_seed(config.seed, run_index);
}

Model init_model(Task task, BiasMode bias_mode, double scale, Rng& rng) {
  Model m{{}, HeadParams::zeros(task), bias_mode};
  auto draw = [&] { return uniform(rng, -scale, scale); };
  m.cell.w_open = draw();
  m.cell.w_close = draw();
  m.cell.u = draw();
  if (bias_mode == BiasMode::WithBias) m.cell.w_b = draw();
  for (auto& v : m.head.v) v = draw();
  if (head_bias_trainable(m)) {
    for (auto& c : m.head.c) c = draw();
  }
  return m;
}

double gradient_norm(const Gradient& grad) noexcept {
  double sq = grad.cell.w_open * grad.cell.w_open + grad.cell.w_close * grad.cell.w_close +
              grad.cell.u * grad.cell.u + grad.cell.w_b * grad.cell.w_b;
  for (double v : grad.head.v) sq += v * v;
  for (double c : grad.head.c) sq += c * c;
  return std::sqrt(sq);
}

void sgd_step(Model& model, const Gradient& grad, double learning_rate) {
  model.cell.w_open -= learning_rate * grad.cell.w_open;
  model.cell.w_close -= learning_rate * grad.cell.w_close;
  model.cell.u -= learning_rate * grad.cell.u;
  if (model.bias_mode == BiasMode::WithBias) model.cell.w_b -= learning_rate * grad.cell.w_b;
  for (std::size_t i = 0; i < model.head.v.size(); ++i) {
    model.head.v[i] -= learning_rate * grad.head.v[i];
  }
  if (head_bias_trainable(model)) {
    for (std::size_t i = 0; i < model.head.c.size(); ++i) {
      model.head.c[i] -= learning_rate * grad.head.c[i];
    }
  }
}

EvalResult evaluate_detailed(const Model& model, Task task, std::size_t length,
                             std::size_t n_samples, Rng& rng) {
  if (n_samples < 1) throw std::invalid_argument("evaluation needs at least one sample");
  if (task != model.task()) throw std::invalid_argument("model head does not match task");
  EvalResult r;
  r.length = length;
  r.samples = n_samples;
  r.class_total.assign(num_classes(task), 0);
  r.class_correct.assign(num_classes(task), 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const auto ex = Example::from(sample_random(length, rng));
    const auto target = target_class(ex, task);
    ++r.class_total[target];
    if (predict(model, final_activation(model.cell, ex.seq)) == target) {
      ++r.class_correct[target];
      ++correct;
    }
  }
  r.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(n_samples);
  return r;
}

double evaluate(const Model& model, Task task, std::size_t length, std::size_t n_samples,
                Rng& rng) {
  return evaluate_detailed(model, task, length, n_samples, rng).accuracy;
}

namespace {

void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    std::swap(idx[i - 1], idx[uniform_below(rng, i)]);
  }
}

bool diverging(double value, double limit) noexcept { return !std::isfinite(value) || value > limit; }

}  // namespace

RunRecord train_run(const TrainConfig& config, std::size_t run_index) {
  validate(config);
  RunRecord rec;
  rec.config = config;
  rec.run_index = run_index;
  rec.run_seed = run_seed(config, run_index);

  Rng rng(derive_seed(rec.run_seed, 0));
  const auto data = build_train_set(config.train_length);
  Model model = init_model(config.task, config.bias_mode, config.init_scale, rng);
  rec.initial_loss = loss(model, data);
  rec.initial_accuracy = accuracy(model, data);

  const std::size_t batch_size = std::min(config.batch_size, data.size());
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Example> batch;
  batch.reserve(batch_size);

  rec.epochs.reserve(config.epochs);
  for (std::size_t epoch = 0; epoch < config.epochs && !rec.diverged; ++epoch) {
    shuffle_indices(order, rng);
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      batch.clear();
      const std::size_t stop = std::min(start + batch_size, order.size());
      for (std::size_t i = start; i < stop; ++i) batch.push_back(data[order[i]]);
      const auto grad = gradients(model, batch);
      double lr = config.learning_rate;
      if (config.clip_norm > 0.0) {
        const double norm = gradient_norm(grad);
        if (norm > config.clip_norm) lr *= config.clip_norm / norm;
      }
      sgd_step(model, grad, lr);
    }
    EpochMetrics m{loss(model, data), accuracy(model, data)};
    rec.epochs.push_back(m);
    if (diverging(m.loss, config.divergence_limit) || !model.cell.is_finite()) {
      rec.diverged = true;
      std::ostringstream os;
      os.precision(17);
      os << "loss " << m.loss << " at epoch " << epoch + 1 << " exceeds limit "
         << config.divergence_limit << "; cell " << model.cell;
      rec.diagnostics = os.str();
    }
  }

  rec.final_model = model;
  rec.indicators = indicators(model.cell, kDefaultIndicatorTolerance);
  if (!rec.diverged) {
    for (std::size_t len : config.eval_lengths) {
      Rng eval_rng(derive_seed(rec.run_seed, 1000 + len));
      rec.eval.push_back(
          evaluate_detailed(model, config.task, len, config.eval_samples, eval_rng));
    }
  }
  return rec;
}

}  // namespace lrncount

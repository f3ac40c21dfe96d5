#include "lrncount/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <limits>
#include <map>
#include <stdexcept>
#include <tuple>
#include <sstream>

#include "lrncount/errors.hpp"

namespace lrncount {

using ojson = nlohmann::ordered_json;

namespace {

// JSON has no NaN/inf; nlohmann writes them as null.
double as_double(const ojson& v) {
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return v.get<double>();
}

ojson optional_double(const std::optional<double>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

std::optional<double> read_optional_double(const ojson& v) {
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

ojson config_to_json(const TrainConfig& c) {
  ojson j;
  j["task"] = std::string(to_string(c.task));
  j["bias"] = std::string(to_string(c.bias_mode));
  j["train-length"] = c.train_length;
  j["epochs"] = c.epochs;
  j["runs"] = c.n_runs;
  j["seed"] = c.seed;
  j["lr"] = c.learning_rate;
  j["batch-size"] = c.batch_size;
  j["eval-lengths"] = c.eval_lengths;
  j["eval-samples"] = c.eval_samples;
  j["init-scale"] = c.init_scale;
  j["clip-norm"] = c.clip_norm;
  j["divergence-limit"] = c.divergence_limit;
  return j;
}

TrainConfig config_from_json(const ojson& j, TrainConfig c) {
  if (!j.is_object()) throw FormatError("config document must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "task") {
      c.task = parse_task(value.get<std::string>());
    } else if (key == "bias") {
      c.bias_mode = parse_bias_mode(value.get<std::string>());
    } else if (key == "train-length") {
      c.train_length = value.get<std::size_t>();
    } else if (key == "epochs") {
      c.epochs = value.get<std::size_t>();
    } else if (key == "runs") {
      c.n_runs = value.get<std::size_t>();
    } else if (key == "seed") {
      c.seed = value.get<std::uint64_t>();
    } else if (key == "lr") {
      c.learning_rate = value.get<double>();
    } else if (key == "batch-size") {
      c.batch_size = value.get<std::size_t>();
    } else if (key == "eval-lengths") {
      c.eval_lengths = value.get<std::vector<std::size_t>>();
    } else if (key == "eval-samples") {
      c.eval_samples = value.get<std::size_t>();
    } else if (key == "init-scale") {
      c.init_scale = value.get<double>();
    } else if (key == "clip-norm") {
      c.clip_norm = value.get<double>();
    } else if (key == "divergence-limit") {
      c.divergence_limit = value.get<double>();
    } else {
      throw FormatError("unknown config key '" + key + "'");
    }
  }
  return c;
}

ojson params_to_json(const LrnParams& p) {
  return ojson{{"w_open", p.w_open}, {"w_close", p.w_close}, {"u", p.u}, {"w_b", p.w_b}};
}

LrnParams params_from_json(const ojson& j) {
  return {as_double(j.at("w_open")), as_double(j.at("w_close")), as_double(j.at("u")),
          as_double(j.at("w_b"))};
}

ojson indicators_to_json(const IndicatorReport& r) {
  ojson j;
  j["ab_ratio"] = optional_double(r.ab_ratio);
  j["u_value"] = r.u_value;
  j["ab_deviation"] = optional_double(r.ab_deviation);
  j["u_deviation"] = r.u_deviation;
  j["tolerance"] = r.tolerance;
  j["holds"] = r.holds;
  return j;
}

IndicatorReport indicators_from_json(const ojson& j) {
  IndicatorReport r;
  r.ab_ratio = read_optional_double(j.at("ab_ratio"));
  r.u_value = as_double(j.at("u_value"));
  r.ab_deviation = read_optional_double(j.at("ab_deviation"));
  r.u_deviation = as_double(j.at("u_deviation"));
  r.tolerance = as_double(j.at("tolerance"));
  r.holds = j.at("holds").get<bool>();
  return r;
}

std::vector<double> doubles_from_json(const ojson& j) {
  std::vector<double> out;
  for (const auto& v : j) out.push_back(as_double(v));
  return out;
}

}  // namespace

std::string to_json_text(const TrainConfig& config) { return config_to_json(config).dump(2); }

TrainConfig config_from_json_text(std::string_view text, const TrainConfig& base) {
  try {
    return config_from_json(ojson::parse(text), base);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed config document: ") + e.what());
  }
}

std::string to_json_line(const RunRecord& r) {
  ojson j;
  j["schema_version"] = kSchemaVersion;
  j["config"] = config_to_json(r.config);
  j["run_index"] = r.run_index;
  j["run_seed"] = r.run_seed;
  j["initial_loss"] = r.initial_loss;
  j["initial_accuracy"] = r.initial_accuracy;
  ojson epochs = ojson::array();
  for (const auto& e : r.epochs) epochs.push_back({{"loss", e.loss}, {"accuracy", e.accuracy}});
  j["epochs"] = std::move(epochs);
  j["final_model"] = {{"bias", std::string(to_string(r.final_model.bias_mode))},
                      {"task", std::string(to_string(r.final_model.task()))},
                      {"cell", params_to_json(r.final_model.cell)},
                      {"head", {{"v", r.final_model.head.v}, {"c", r.final_model.head.c}}}};
  j["indicators"] = indicators_to_json(r.indicators);
  ojson eval = ojson::array();
  for (const auto& e : r.eval) {
    eval.push_back({{"length", e.length},
                    {"samples", e.samples},
                    {"accuracy", e.accuracy},
                    {"class_total", e.class_total},
                    {"class_correct", e.class_correct}});
  }
  j["eval"] = std::move(eval);
  j["diverged"] = r.diverged;
  j["diagnostics"] = r.diagnostics;
  return j.dump();
}

RunRecord record_from_json_line(std::string_view line) {
  ojson j;
  try {
    j = ojson::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed run record: ") + e.what());
  }
  if (!j.is_object() || !j.contains("schema_version")) {
    throw SchemaMismatch("run record has no schema_version");
  }
  const auto& version = j.at("schema_version");
  if (!version.is_number_integer() || version.get<int>() != kSchemaVersion) {
    throw SchemaMismatch("unsupported run record schema_version " + version.dump() +
                         " (expected " + std::to_string(kSchemaVersion) + ")");
  }
  try {
    RunRecord r;
    r.config = config_from_json(j.at("config"), TrainConfig{});
    r.run_index = j.at("run_index").get<std::size_t>();
    r.run_seed = j.at("run_seed").get<std::uint64_t>();
    r.initial_loss = as_double(j.at("initial_loss"));
    r.initial_accuracy = as_double(j.at("initial_accuracy"));
    for (const auto& e : j.at("epochs")) {
      r.epochs.push_back({as_double(e.at("loss")), as_double(e.at("accuracy"))});
    }
    const auto& m = j.at("final_model");
    const Task task = parse_task(m.at("task").get<std::string>());
    r.final_model.bias_mode = parse_bias_mode(m.at("bias").get<std::string>());
    r.final_model.cell = params_from_json(m.at("cell"));
    r.final_model.head.task = task;
    r.final_model.head.v = doubles_from_json(m.at("head").at("v"));
    r.final_model.head.c = doubles_from_json(m.at("head").at("c"));
    if (r.final_model.head.v.size() != num_logits(task) ||
        r.final_model.head.c.size() != num_logits(task)) {
      throw FormatError("head size does not match task");
    }
    r.indicators = indicators_from_json(j.at("indicators"));
    for (const auto& e : j.at("eval")) {
      EvalResult ev;
      ev.length = e.at("length").get<std::size_t>();
      ev.samples = e.at("samples").get<std::size_t>();
      ev.accuracy = as_double(e.at("accuracy"));
      ev.class_total = e.at("class_total").get<std::vector<std::size_t>>();
      ev.class_correct = e.at("class_correct").get<std::vector<std::size_t>>();
      r.eval.push_back(std::move(ev));
    }
    r.diverged = j.at("diverged").get<bool>();
    r.diagnostics = j.at("diagnostics").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed run record: ") + e.what());
  }
}

RunLogWriter::RunLogWriter(const std::filesystem::path& path, Mode mode) : path_(path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::binary | (mode == Mode::Append ? std::ios::app : std::ios::trunc));
  if (!out_) throw Error("cannot open run log " + path.string());
}

void RunLogWriter::write(const RunRecord& record) {
  const auto line = to_json_line(record);
  std::lock_guard lock(mutex_);
  out_ << line << '\n';
  out_.flush();
  if (!out_) throw Error("write to run log " + path_.string() + " failed");
}

std::vector<RunRecord> read_run_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open run log " + path.string());
  std::vector<RunRecord> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json_line(line));
    } catch (const SchemaMismatch& e) {
      throw SchemaMismatch(path.string() + ":" + std::to_string(number) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

// Experiment grid -----------------------------------------------------------------

std::string experiment_label(Task task, BiasMode bias_mode) {
  std::string s = task == Task::Binary ? "Binary" : "Ternary";
  s += bias_mode == BiasMode::NoBias ? " (without bias)" : " (with bias)";
  return s;
}

std::string config_slug(const TrainConfig& config) {
  return std::string(to_string(config.task)) + "_bias-" + std::string(to_string(config.bias_mode)) +
         "_L" + std::to_string(config.train_length);
}

namespace {

constexpr std::size_t group_rank(Task task, BiasMode bias) noexcept {
  return (bias == BiasMode::WithBias ? 2 : 0) + (task == Task::Ternary ? 1 : 0);
}

}  // namespace

ExperimentSuite make_suite(const TrainConfig& base, std::uint64_t master_seed,
                           std::filesystem::path output_dir,
                           std::vector<std::size_t> train_lengths) {
  ExperimentSuite suite;
  suite.master_seed = master_seed;
  suite.output_dir = std::move(output_dir);
  std::uint64_t index = 0;
  for (BiasMode bias : {BiasMode::NoBias, BiasMode::WithBias}) {
    for (Task task : {Task::Binary, Task::Ternary}) {
      for (std::size_t len : train_lengths) {
        TrainConfig c = base;
        c.task = task;
        c.bias_mode = bias;
        c.train_length = len;
        c.seed = derive_seed(master_seed, index++);
        suite.configs.push_back(std::move(c));
      }
    }
  }
  return suite;
}

std::string manifest_json(const ExperimentSuite& suite) {
  ojson j;
  j["schema_version"] = kSchemaVersion;
  j["master_seed"] = suite.master_seed;
  j["output_dir"] = suite.output_dir.string();
  ojson configs = ojson::array();
  for (const auto& c : suite.configs) {
    auto cj = config_to_json(c);
    cj["log"] = config_slug(c) + ".jsonl";
    configs.push_back(std::move(cj));
  }
  j["configs"] = std::move(configs);
  return j.dump(2);
}

std::vector<RunRecord> run_config(const TrainConfig& config, RunLogWriter* log) {
  validate(config);
  std::vector<RunRecord> out;
  out.reserve(config.n_runs);
  for (std::size_t i = 0; i < config.n_runs; ++i) {
    out.push_back(train_run(config, i));
    if (log) log->write(out.back());
  }
  return out;
}

// Aggregation ----------------------------------------------------------------------

Stat summarize(std::span<const double> values) {
  Stat s;
  for (double v : values) {
    if (std::isnan(v)) continue;
    if (s.n == 0) {
      s.min = s.max = v;
    } else {
      s.min = std::min(s.min, v);
      s.max = std::max(s.max, v);
    }
    s.avg += v;
    ++s.n;
  }
  if (s.n > 0) s.avg /= static_cast<double>(s.n);
  return s;
}

std::string format_avg_min_max(const Stat& s) {
  if (s.n == 0) return "-";
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.1f (%.1f/%.1f)", s.avg, s.min, s.max);
  return buf;
}

std::vector<TableRow> aggregate(std::span<const RunRecord> records) {
  using Key = std::tuple<std::size_t, std::size_t>;  // group rank, train length
  std::map<Key, std::vector<const RunRecord*>> groups;
  for (const auto& r : records) {
    groups[{group_rank(r.config.task, r.config.bias_mode), r.config.train_length}].push_back(&r);
  }

  std::vector<TableRow> rows;
  for (const auto& [key, members] : groups) {
    TableRow row;
    row.task = members.front()->config.task;
    row.bias_mode = members.front()->config.bias_mode;
    row.train_length = members.front()->config.train_length;

    std::vector<double> train;
    std::map<std::size_t, std::vector<double>> eval;
    for (const auto* r : members) {
      if (r->diverged) {
        ++row.failed;
        continue;
      }
      ++row.runs;
      train.push_back(r->final_train_accuracy());
      for (const auto& e : r->eval) eval[e.length].push_back(e.accuracy);
    }
    row.train = summarize(train);
    for (const auto& [len, values] : eval) row.eval.emplace_back(len, summarize(values));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string accuracy_table_csv(std::span<const TableRow> rows) {
  std::vector<std::size_t> lengths;
  for (const auto& row : rows) {
    for (const auto& [len, _] : row.eval) lengths.push_back(len);
  }
  std::sort(lengths.begin(), lengths.end());
  lengths.erase(std::unique(lengths.begin(), lengths.end()), lengths.end());

  std::ostringstream os;
  os << "Experiment,Train Length,Runs,Failed,Train";
  for (auto len : lengths) os << ',' << len << " Tokens";
  os << '\n';
  for (const auto& row : rows) {
    os << experiment_label(row.task, row.bias_mode) << ',' << row.train_length << ','
       << row.runs << ',' << row.failed << ',' << format_avg_min_max(row.train);
    for (auto len : lengths) {
      Stat s;
      for (const auto& [l, stat] : row.eval) {
        if (l == len) s = stat;
      }
      os << ',' << format_avg_min_max(s);
    }
    os << '\n';
  }
  return os.str();
}

std::string summary_line(const TableRow& row) {
  std::ostringstream os;
  os << experiment_label(row.task, row.bias_mode) << " | L=" << row.train_length
     << " | runs " << row.runs;
  if (row.failed) os << " (+" << row.failed << " diverged)";
  os << " | Train " << format_avg_min_max(row.train);
  for (const auto& [len, stat] : row.eval) {
    os << " | " << len << " Tokens " << format_avg_min_max(stat);
  }
  return os.str();
}

std::string_view to_string(Indicator indicator) noexcept {
  return indicator == Indicator::AbRatio ? "ab_ratio" : "u";
}

std::vector<double> default_bin_edges(Indicator indicator) {
  const double lo = indicator == Indicator::AbRatio ? -3.0 : -0.5;
  const double hi = indicator == Indicator::AbRatio ? 1.0 : 1.5;
  constexpr int bins = 30;
  std::vector<double> edges(bins + 1);
  for (int i = 0; i <= bins; ++i) edges[i] = lo + (hi - lo) * i / bins;
  return edges;
}

HistogramSpec build_histogram(Indicator indicator, std::span<const RunRecord> records,
                              std::vector<double> bin_edges) {
  if (bin_edges.size() < 2 || !std::is_sorted(bin_edges.begin(), bin_edges.end())) {
    throw std::invalid_argument("histogram needs at least two sorted bin edges");
  }
  HistogramSpec hist;
  hist.indicator = indicator;
  hist.bin_edges = std::move(bin_edges);
  const std::size_t bins = hist.bin_edges.size() - 1;

  using Key = std::tuple<std::size_t, std::size_t>;
  std::map<Key, HistogramRow> rows;
  for (const auto& r : records) {
    if (r.diverged) continue;
    auto& row = rows[{group_rank(r.config.task, r.config.bias_mode), r.config.train_length}];
    if (row.counts.empty()) {
      row.task = r.config.task;
      row.bias_mode = r.config.bias_mode;
      row.train_length = r.config.train_length;
      row.counts.assign(bins, 0);
    }
    ++row.runs;
    std::optional<double> value = indicator == Indicator::AbRatio
                                      ? r.indicators.ab_ratio
                                      : std::optional<double>(r.indicators.u_value);
    if (!value || std::isnan(*value)) {
      ++row.undefined;
      continue;
    }
    const double x = *value;
    if (x < hist.bin_edges.front()) {
      ++row.underflow;
    } else if (x > hist.bin_edges.back()) {
      ++row.overflow;
    } else {
      auto it = std::upper_bound(hist.bin_edges.begin(), hist.bin_edges.end(), x);
      std::size_t bin = static_cast<std::size_t>(it - hist.bin_edges.begin()) - 1;
      ++row.counts[std::min(bin, bins - 1)];
    }
  }
  for (auto& [_, row] : rows) hist.rows.push_back(std::move(row));
  return hist;
}

std::string histogram_csv(const HistogramSpec& hist) {
  std::ostringstream os;
  os << "Indicator,Experiment,Train Length,Runs,Undefined,Underflow";
  char buf[64];
  for (std::size_t i = 0; i + 1 < hist.bin_edges.size(); ++i) {
    const bool last = i + 2 == hist.bin_edges.size();
    std::snprintf(buf, sizeof buf, "[%.4g;%.4g%c", hist.bin_edges[i], hist.bin_edges[i + 1],
                  last ? ']' : ')');
    os << ',' << buf;
  }
  os << ",Overflow\n";
  for (const auto& row : hist.rows) {
    os << to_string(hist.indicator) << ',' << experiment_label(row.task, row.bias_mode) << ','
       << row.train_length << ',' << row.runs << ',' << row.undefined << ',' << row.underflow;
    for (auto c : row.counts) os << ',' << c;
    os << ',' << row.overflow << '\n';
  }
  return os.str();
}

// Verification driver ----------------------------------------------------------------

VerifyResult run_verify(const VerifyOptions& options) {
  VerifyResult result;
  result.options = options;
  const LrnParams subject = options.params.value_or(LrnParams::canonical());

  result.reports.push_back(
      verify_equivalence(subject, options.max_len, options.epsilon, options.tol));
  result.cases.push_back(table1_cases(subject, options.epsilon));
  for (const auto& r : result.reports) {
    if (r.verdict == Verdict::Inconsistent) ++result.inconsistencies;
  }

  if (!options.params) {
    FalsificationSampler sampler;
    sampler.deviation_floor = options.deviation_floor;
    result.falsification = run_falsification(options.samples, options.seed, sampler,
                                             options.max_len, options.epsilon, options.tol);
    result.inconsistencies += result.falsification->inconsistent;

    for (double a : options.closed_form_increments) {
      const bool ok = check_closed_form(LrnParams::from_increments(a, -a, 1.0), options.max_len);
      result.closed_form.emplace_back(a, ok);
      result.closed_form_ok = result.closed_form_ok && ok;
    }
  }
  return result;
}

namespace {

ojson equivalence_to_json(const EquivalenceReport& r) {
  ojson j;
  j["params"] = params_to_json(r.params);
  j["max_len"] = r.max_len;
  j["epsilon"] = r.epsilon;
  j["indicators"] = indicators_to_json(r.indicator_report);
  j["counterexample"] = r.counterexample ? ojson(r.counterexample->to_text()) : ojson(nullptr);
  j["verdict"] = std::string(to_string(r.verdict));
  if (!r.diagnostics.empty()) j["diagnostics"] = r.diagnostics;
  return j;
}

}  // namespace

std::string verify_report_json(const VerifyResult& result) {
  ojson j;
  j["schema_version"] = kSchemaVersion;
  const auto& o = result.options;
  j["options"] = {{"max-len", o.max_len},         {"epsilon", o.epsilon},
                  {"tol", o.tol},                 {"deviation-floor", o.deviation_floor},
                  {"samples", o.samples},         {"seed", o.seed}};
  ojson reports = ojson::array();
  for (std::size_t i = 0; i < result.reports.size(); ++i) {
    auto rj = equivalence_to_json(result.reports[i]);
    ojson cases = ojson::array();
    for (const auto& c : result.cases[i]) {
      cases.push_back({{"case", c.case_id},
                       {"sequence", c.sequence.to_text()},
                       {"required", c.required == Requirement::Zero ? "zero" : "nonzero"},
                       {"observed_h", c.observed_h},
                       {"satisfied", c.satisfied}});
    }
    rj["table1"] = std::move(cases);
    reports.push_back(std::move(rj));
  }
  j["reports"] = std::move(reports);
  if (result.falsification) {
    const auto& f = *result.falsification;
    ojson fj = {{"samples", f.samples},
                {"equivalent", f.equivalent},
                {"counterexamples", f.counterexamples},
                {"inconsistent", f.inconsistent},
                {"longest_counterexample", f.longest_counterexample}};
    ojson bad = ojson::array();
    for (const auto& r : f.inconsistencies) bad.push_back(equivalence_to_json(r));
    fj["inconsistencies"] = std::move(bad);
    j["falsification"] = std::move(fj);
  }
  ojson cf = ojson::array();
  for (const auto& [a, ok] : result.closed_form) cf.push_back({{"a", a}, {"holds", ok}});
  j["closed_form"] = std::move(cf);
  j["inconsistencies"] = result.inconsistencies;
  return j.dump(2);
}

}  // namespace lrncount

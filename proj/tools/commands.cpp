#include "commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "lrncount/bracket.hpp"
#include "lrncount/errors.hpp"
#include "lrncount/experiments.hpp"
#include "lrncount/lrn.hpp"
#include "lrncount/theorem.hpp"
#include "lrncount/training.hpp"

namespace lrncount::cli {
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, value);
  return buf;
}

void print_indicators(std::ostream& out, const IndicatorReport& r) {
  out << "  a/b = " << (r.ab_ratio ? fmt("%.17g", *r.ab_ratio) : "undefined")
      << "  (deviation " << (r.ab_deviation ? fmt("%.3g", *r.ab_deviation) : "undefined")
      << ")\n"
      << "  U   = " << fmt("%.17g", r.u_value) << "  (deviation " << fmt("%.3g", r.u_deviation)
      << ")\n"
      << "  holds=" << (r.holds ? "true" : "false") << " at tolerance " << fmt("%g", r.tolerance)
      << '\n';
}

// train ------------------------------------------------------------------------

struct TrainFlags {
  std::string config_file;
  std::uint64_t seed = 0;
  std::string task;
  std::string bias;
  std::size_t train_length = 0;
  std::size_t epochs = 0;
  std::size_t runs = 0;
  double lr = 0;
  std::size_t batch_size = 0;
  std::vector<std::size_t> eval_lengths;
  std::size_t eval_samples = 0;
  double clip_norm = 0;
  double init_scale = 0;
  std::string out_dir = "runs";
  std::string log_file;
  bool append = false;
  bool suite = false;
  std::vector<std::size_t> suite_lengths{2, 4, 8};
};

struct TrainOptions {
  CLI::Option* seed;
  CLI::Option* task;
  CLI::Option* bias;
  CLI::Option* train_length;
  CLI::Option* epochs;
  CLI::Option* runs;
  CLI::Option* lr;
  CLI::Option* batch_size;
  CLI::Option* eval_lengths;
  CLI::Option* eval_samples;
  CLI::Option* clip_norm;
  CLI::Option* init_scale;
};

TrainConfig resolve_config(const TrainFlags& f, const TrainOptions& o) {
  TrainConfig c;
  if (!f.config_file.empty()) c = config_from_json_text(read_file(f.config_file));
  if (o.seed->count()) c.seed = f.seed;
  if (o.task->count()) c.task = parse_task(f.task);
  if (o.bias->count()) c.bias_mode = parse_bias_mode(f.bias);
  if (o.train_length->count()) c.train_length = f.train_length;
  if (o.epochs->count()) c.epochs = f.epochs;
  if (o.runs->count()) c.n_runs = f.runs;
  if (o.lr->count()) c.learning_rate = f.lr;
  if (o.batch_size->count()) c.batch_size = f.batch_size;
  if (o.eval_lengths->count()) c.eval_lengths = f.eval_lengths;
  if (o.eval_samples->count()) c.eval_samples = f.eval_samples;
  if (o.clip_norm->count()) c.clip_norm = f.clip_norm;
  if (o.init_scale->count()) c.init_scale = f.init_scale;
  return c;
}

int cmd_train(const TrainFlags& flags, const TrainOptions& opts, std::ostream& out) {
  const TrainConfig base = resolve_config(flags, opts);
  const fs::path dir = flags.out_dir;
  const auto mode = flags.append ? RunLogWriter::Mode::Append : RunLogWriter::Mode::Truncate;
  std::size_t diverged = 0;

  auto run_one = [&](const TrainConfig& config, const fs::path& log_path) {
    RunLogWriter log(log_path, mode);
    const auto records = run_config(config, &log);
    for (const auto& r : records) diverged += r.diverged ? 1 : 0;
    for (const auto& row : aggregate(records)) out << summary_line(row) << '\n';
    out << "  log: " << log_path.string() << '\n';
  };

  if (flags.suite) {
    const auto suite = make_suite(base, base.seed, dir, flags.suite_lengths);
    for (const auto& c : suite.configs) validate(c);
    write_file(dir / "manifest.json", manifest_json(suite) + "\n");
    for (const auto& c : suite.configs) run_one(c, dir / (config_slug(c) + ".jsonl"));
  } else {
    validate(base);
    const fs::path log_path =
        flags.log_file.empty() ? dir / (config_slug(base) + ".jsonl") : fs::path(flags.log_file);
    run_one(base, log_path);
  }
  if (diverged) {
    out << diverged << " run(s) diverged\n";
    return kExitFailure;
  }
  return kExitOk;
}

// verify -----------------------------------------------------------------------

struct VerifyFlags {
  VerifyOptions options;
  std::string params;
  std::string out_dir;
};

int cmd_verify(VerifyFlags flags, std::ostream& out) {
  if (!flags.params.empty()) flags.options.params = parse_params_csv(flags.params);
  const auto result = run_verify(flags.options);

  for (std::size_t i = 0; i < result.reports.size(); ++i) {
    const auto& r = result.reports[i];
    out << (flags.options.params ? "params " : "canonical params ") << r.params << '\n';
    print_indicators(out, r.indicator_report);
    for (const auto& c : result.cases[i]) {
      out << "  case " << c.case_id << " " << c.sequence << " requires "
          << (c.required == Requirement::Zero ? "h = 0" : "h != 0") << ": h = "
          << fmt("%.6g", c.observed_h) << (c.satisfied ? "  ok" : "  VIOLATED") << '\n';
    }
    out << "  search up to length " << r.max_len << " (epsilon " << fmt("%g", r.epsilon)
        << "): ";
    if (r.counterexample) {
      out << "counterexample " << *r.counterexample << '\n';
    } else {
      out << "no counterexample\n";
    }
    out << "  verdict: " << to_string(r.verdict) << '\n';
    if (!r.diagnostics.empty()) out << "  diagnostics: " << r.diagnostics << '\n';
  }
  if (result.falsification) {
    const auto& f = *result.falsification;
    out << "falsification: " << f.samples << " random params (deviation floor "
        << fmt("%g", flags.options.deviation_floor) << "), " << f.counterexamples
        << " with counterexample (longest " << f.longest_counterexample << "), "
        << f.equivalent << " equivalent, " << f.inconsistent << " inconsistent\n";
    for (const auto& r : f.inconsistencies) {
      out << "  inconsistent: " << r.params << ": " << r.diagnostics << '\n';
    }
  }
  for (const auto& [a, ok] : result.closed_form) {
    out << "closed form h = (n - m) * a for a = " << fmt("%g", a) << " up to length "
        << flags.options.max_len << ": " << (ok ? "exact" : "MISMATCH") << '\n';
  }
  out << "inconsistencies: " << result.inconsistencies << '\n';

  if (!flags.out_dir.empty()) {
    const auto path = fs::path(flags.out_dir) / "verify_report.json";
    write_file(path, verify_report_json(result) + "\n");
    out << "report: " << path.string() << '\n';
  }
  if (result.inconsistencies > 0) return kExitInconsistent;
  return result.closed_form_ok ? kExitOk : kExitFailure;
}

// eval -------------------------------------------------------------------------

struct EvalFlags {
  std::string log_file;
  std::string params;
  std::vector<std::size_t> eval_lengths{20, 50};
  std::size_t samples = 500;
  std::uint64_t seed = 0;
  std::size_t max_len = kDefaultMaxLen;
  double epsilon = kDefaultAcceptEpsilon;
};

int cmd_eval(const EvalFlags& f, std::ostream& out) {
  if (!f.params.empty()) {
    // Acceptor mode: agreement of the zero-check acceptor with BB membership.
    const auto params = parse_params_csv(f.params);
    out << "params " << params << '\n';
    std::size_t total = 0;
    std::size_t agree = 0;
    for (std::size_t len = 0; len <= f.max_len; ++len) {
      std::size_t n = 0;
      std::size_t ok = 0;
      for (auto seq : enumerate_all(len)) {
        ++n;
        ok += accepts_lrn(params, seq, f.epsilon) == in_bb(seq) ? 1 : 0;
      }
      total += n;
      agree += ok;
      out << "  length " << len << ": " << ok << "/" << n << " agree with BB\n";
    }
    out << "overall agreement " << fmt("%.1f", 100.0 * agree / total) << "%\n";
    return kExitOk;
  }
  if (f.log_file.empty()) throw Error("eval needs --log FILE or --params W_OPEN,W_CLOSE,U,W_B");

  const auto records = read_run_log(f.log_file);
  std::vector<std::vector<double>> per_length(f.eval_lengths.size());
  for (const auto& r : records) {
    if (r.diverged) {
      out << "run " << r.run_index << " (" << config_slug(r.config) << "): diverged, skipped\n";
      continue;
    }
    out << "run " << r.run_index << " (" << config_slug(r.config) << ")";
    for (std::size_t i = 0; i < f.eval_lengths.size(); ++i) {
      const auto len = f.eval_lengths[i];
      Rng rng(derive_seed(derive_seed(f.seed, r.run_seed), len));
      const double acc = evaluate(r.final_model, r.final_model.task(), len, f.samples, rng);
      per_length[i].push_back(acc);
      out << " | " << len << " Tokens " << fmt("%.1f", acc);
    }
    out << '\n';
  }
  for (std::size_t i = 0; i < f.eval_lengths.size(); ++i) {
    out << f.eval_lengths[i] << " Tokens " << format_avg_min_max(summarize(per_length[i]))
        << '\n';
  }
  return kExitOk;
}

// report -----------------------------------------------------------------------

int cmd_report(const std::vector<std::string>& logs, const std::string& out_dir,
               std::ostream& out) {
  std::vector<RunRecord> records;
  for (const auto& path : logs) {
    auto part = read_run_log(path);
    records.insert(records.end(), std::make_move_iterator(part.begin()),
                   std::make_move_iterator(part.end()));
  }
  if (records.empty()) throw Error("no run records in the given logs");

  const fs::path dir = out_dir;
  const auto rows = aggregate(records);
  const auto table = accuracy_table_csv(rows);
  write_file(dir / "accuracy_table.csv", table);
  for (Indicator ind : {Indicator::AbRatio, Indicator::UValue}) {
    const auto hist = build_histogram(ind, records, default_bin_edges(ind));
    write_file(dir / ("hist_" + std::string(to_string(ind)) + ".csv"), histogram_csv(hist));
  }
  out << table;
  out << "wrote " << (dir / "accuracy_table.csv").string() << ", "
      << (dir / "hist_ab_ratio.csv").string() << ", " << (dir / "hist_u.csv").string() << '\n';
  return kExitOk;
}

// enumerate --------------------------------------------------------------------

struct EnumerateFlags {
  std::size_t length = 0;
  std::size_t random = 0;
  std::uint64_t seed = 0;
  bool labels = false;
  std::string task = "ternary";
  std::string out_file;
  std::size_t cap = kDefaultEnumerationCap;
};

int cmd_enumerate(const EnumerateFlags& f, std::ostream& out) {
  const Task task = parse_task(f.task);
  std::vector<DatasetLine> lines;
  auto add = [&](BracketSeq seq) {
    DatasetLine line{std::move(seq), std::nullopt};
    if (f.labels) {
      line.label = std::string(task == Task::Binary ? to_string(label_binary(line.seq))
                                                    : to_string(label_ternary(line.seq)));
    }
    lines.push_back(std::move(line));
  };
  if (f.random > 0) {
    Rng rng(f.seed);
    for (std::size_t i = 0; i < f.random; ++i) add(sample_random(f.length, rng));
  } else {
    for (auto seq : enumerate_all(f.length, f.cap)) add(std::move(seq));
  }
  if (f.out_file.empty()) {
    write_dataset(out, lines);
  } else {
    std::ostringstream os;
    write_dataset(os, lines);
    write_file(f.out_file, os.str());
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact-counting laboratory for single-cell linear recurrent networks", "lrncount"};
  app.require_subcommand(1);

  // verify
  VerifyFlags vf;
  auto* verify = app.add_subcommand("verify", "Check the counting indicators in both directions");
  verify->add_option("--max-len", vf.options.max_len, "Longest enumerated sequence")
      ->capture_default_str();
  verify->add_option("--epsilon", vf.options.epsilon, "Zero-check tolerance on final h")
      ->capture_default_str();
  verify->add_option("--tol", vf.options.tol, "Indicator tolerance")->capture_default_str();
  verify->add_option("--deviation-floor", vf.options.deviation_floor,
                     "Minimum indicator deviation of sampled params")
      ->capture_default_str();
  verify->add_option("--samples", vf.options.samples, "Random parameter draws")
      ->capture_default_str();
  verify->add_option("--seed", vf.options.seed, "Sampler seed")->capture_default_str();
  verify->add_option("--params", vf.params, "Verify only W_OPEN,W_CLOSE,U[,W_B]");
  verify->add_option("--out", vf.out_dir, "Directory for verify_report.json");

  // train
  TrainFlags tf;
  TrainOptions to{};
  auto* train = app.add_subcommand("train", "Train single-cell models and log every run");
  train->add_option("--config", tf.config_file, "Config document (keys mirror the flags)");
  to.seed = train->add_option("--seed", tf.seed, "Master seed");
  to.task = train->add_option("--task", tf.task, "binary or ternary");
  to.bias = train->add_option("--bias", tf.bias, "on or off");
  to.train_length = train->add_option("--train-length", tf.train_length, "Training length");
  to.epochs = train->add_option("--epochs", tf.epochs, "Epochs per run");
  to.runs = train->add_option("--runs", tf.runs, "Runs per config");
  to.lr = train->add_option("--lr", tf.lr, "SGD learning rate");
  to.batch_size = train->add_option("--batch-size", tf.batch_size, "Minibatch size");
  to.eval_lengths =
      train->add_option("--eval-lengths", tf.eval_lengths, "Evaluation lengths, e.g. 20,50")
          ->delimiter(',');
  to.eval_samples = train->add_option("--eval-samples", tf.eval_samples, "Samples per length");
  to.clip_norm = train->add_option("--clip-norm", tf.clip_norm, "Gradient-norm clip (0 = off)");
  to.init_scale = train->add_option("--init-scale", tf.init_scale, "Init range half-width");
  train->add_option("--out", tf.out_dir, "Output directory")->capture_default_str();
  train->add_option("--log", tf.log_file, "Explicit log path (single config only)");
  train->add_flag("--append", tf.append, "Append to existing logs instead of replacing them");
  train->add_flag("--suite", tf.suite, "Run the task x bias x length grid");
  train->add_option("--suite-lengths", tf.suite_lengths, "Train lengths of the grid")
      ->delimiter(',')
      ->capture_default_str();

  // eval
  EvalFlags ef;
  auto* eval = app.add_subcommand("eval", "Re-evaluate logged models or an acceptor");
  eval->add_option("--log", ef.log_file, "Run log to re-evaluate");
  eval->add_option("--params", ef.params, "Acceptor params W_OPEN,W_CLOSE,U[,W_B]");
  eval->add_option("--eval-lengths", ef.eval_lengths, "Evaluation lengths")
      ->delimiter(',')
      ->capture_default_str();
  eval->add_option("--eval-samples", ef.samples, "Samples per length")->capture_default_str();
  eval->add_option("--seed", ef.seed, "Sampling seed")->capture_default_str();
  eval->add_option("--max-len", ef.max_len, "Acceptor mode: longest length")
      ->capture_default_str();
  eval->add_option("--epsilon", ef.epsilon, "Acceptor mode: zero-check tolerance")
      ->capture_default_str();

  // report
  std::vector<std::string> report_logs;
  std::string report_dir = "report";
  auto* report = app.add_subcommand("report", "Aggregate run logs into tables and histograms");
  report->add_option("logs", report_logs, "Run log files")->required();
  report->add_option("--out", report_dir, "Output directory")->capture_default_str();

  // enumerate
  EnumerateFlags nf;
  auto* enumerate = app.add_subcommand("enumerate", "Write bracket sequences as a dataset file");
  enumerate->add_option("--length", nf.length, "Sequence length")->required();
  enumerate->add_option("--random", nf.random, "Sample this many random sequences instead");
  enumerate->add_option("--seed", nf.seed, "Sampling seed")->capture_default_str();
  enumerate->add_flag("--labels", nf.labels, "Add a tab-separated label column");
  enumerate->add_option("--task", nf.task, "Label set: binary or ternary")->capture_default_str();
  enumerate->add_option("--out", nf.out_file, "Output file (default stdout)");
  enumerate->add_option("--cap", nf.cap, "Enumeration length cap")->capture_default_str();

  try {
    std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
    std::reverse(rest.begin(), rest.end());
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitFailure;
  }

  try {
    if (*verify) return cmd_verify(vf, out);
    if (*train) return cmd_train(tf, to, out);
    if (*eval) return cmd_eval(ef, out);
    if (*report) return cmd_report(report_logs, report_dir, out);
    if (*enumerate) return cmd_enumerate(nf, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace lrncount::cli

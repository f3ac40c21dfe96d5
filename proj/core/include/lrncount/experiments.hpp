#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lrncount/lrn.hpp"
#include "lrncount/theorem.hpp"
#include "lrncount/training.hpp"

namespace lrncount {

inline constexpr int kSchemaVersion = 1;

// Structured documents ---------------------------------------------------------

/// Config document; keys mirror the command-line flags ("train-length", "lr", ...).
std::string to_json_text(const TrainConfig& config);
/// Keys absent from the document keep their value from `base`.
TrainConfig config_from_json_text(std::string_view text, const TrainConfig& base = {});

/// One run record as a single JSON line (no trailing newline).
std::string to_json_line(const RunRecord& record);
/// Throws SchemaMismatch on an unknown schema_version, FormatError otherwise.
RunRecord record_from_json_line(std::string_view line);

/// Append-only, line-delimited run log, flushed after every record. Safe to
/// share between threads.
class RunLogWriter {
 public:
  enum class Mode { Truncate, Append };

  explicit RunLogWriter(const std::filesystem::path& path, Mode mode = Mode::Truncate);

  void write(const RunRecord& record);
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::mutex mutex_;
};

std::vector<RunRecord> read_run_log(const std::filesystem::path& path);

// Experiment grid ----------------------------------------------------------------

/// "Binary (without bias)", "Ternary (with bias)", ...
std::string experiment_label(Task task, BiasMode bias_mode);
/// "binary_bias-off_L8"; used for log file names.
std::string config_slug(const TrainConfig& config);

struct ExperimentSuite {
  std::vector<TrainConfig> configs;
  std::filesystem::path output_dir;
  std::uint64_t master_seed = 0;
};

/// Cross product task x bias x train length in accuracy-table order: binary
/// and ternary without bias, then both with bias; lengths ascending. Each
/// config receives its own seed derived from master_seed.
ExperimentSuite make_suite(const TrainConfig& base, std::uint64_t master_seed,
                           std::filesystem::path output_dir,
                           std::vector<std::size_t> train_lengths = {2, 4, 8});

std::string manifest_json(const ExperimentSuite& suite);

/// Runs config.n_runs runs, writing each record to `log` (if given) as soon
/// as it completes.
std::vector<RunRecord> run_config(const TrainConfig& config, RunLogWriter* log = nullptr);

// Aggregation ---------------------------------------------------------------------

struct Stat {
  std::size_t n = 0;
  double avg = 0.0;
  double min = 0.0;
  double max = 0.0;
};

Stat summarize(std::span<const double> values);

/// "96.9 (94.0/100.0)", or "-" when no values were aggregated.
std::string format_avg_min_max(const Stat& s);

struct TableRow {
  Task task = Task::Binary;
  BiasMode bias_mode = BiasMode::NoBias;
  std::size_t train_length = 0;
  std::size_t runs = 0;    // successful runs
  std::size_t failed = 0;  // diverged runs, excluded from every statistic
  Stat train;
  std::vector<std::pair<std::size_t, Stat>> eval;  // by eval length, ascending
};

/// Groups records by (task, bias mode, train length) in accuracy-table order.
std::vector<TableRow> aggregate(std::span<const RunRecord> records);

/// Columns: Experiment, Train Length, Runs, Failed, Train, <L> Tokens...
std::string accuracy_table_csv(std::span<const TableRow> rows);

std::string summary_line(const TableRow& row);

enum class Indicator : std::uint8_t { AbRatio, UValue };

std::string_view to_string(Indicator indicator) noexcept;

/// Default bins: 30 uniform bins over [-3, 1] for a/b and [-0.5, 1.5] for U.
std::vector<double> default_bin_edges(Indicator indicator);

struct HistogramRow {
  Task task = Task::Binary;
  BiasMode bias_mode = BiasMode::NoBias;
  std::size_t train_length = 0;
  std::size_t runs = 0;
  std::size_t undefined = 0;  // a/b undefined because |b| is degenerate
  std::size_t underflow = 0;
  std::vector<std::size_t> counts;
  std::size_t overflow = 0;
};

/// Bins are [lo, hi) except the last, which also includes its upper edge.
/// underflow + counts + overflow == runs - undefined for every row.
struct HistogramSpec {
  Indicator indicator = Indicator::AbRatio;
  std::vector<double> bin_edges;
  std::vector<HistogramRow> rows;
};

HistogramSpec build_histogram(Indicator indicator, std::span<const RunRecord> records,
                              std::vector<double> bin_edges);

std::string histogram_csv(const HistogramSpec& hist);

// Theorem verification driver -------------------------------------------------------

struct VerifyOptions {
  std::size_t max_len = kDefaultMaxLen;
  double epsilon = kDefaultAcceptEpsilon;
  double tol = kDefaultIndicatorTolerance;
  double deviation_floor = 0.01;
  std::size_t samples = 1000;
  std::uint64_t seed = 0;
  std::vector<double> closed_form_increments{1.0, -3.5};
  std::optional<LrnParams> params;  // when set, only this parameter set is verified
};

struct VerifyResult {
  VerifyOptions options;
  std::vector<EquivalenceReport> reports;  // canonical or user params
  std::vector<std::vector<CaseResult>> cases;
  std::optional<FalsificationSummary> falsification;
  std::vector<std::pair<double, bool>> closed_form;  // increment a -> check passed
  std::size_t inconsistencies = 0;
  bool closed_form_ok = true;
};

VerifyResult run_verify(const VerifyOptions& options);
std::string verify_report_json(const VerifyResult& result);

}  // namespace lrncount

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lrncount/bracket.hpp"

namespace lrncount {

/// Weights of the single-cell linear recurrence h_t = W x_t + U h_{t-1} + W_b.
/// W acts on the one-hot token, so it is stored as its two components.
struct LrnParams {
  double w_open = 0.0;
  double w_close = 0.0;
  double u = 0.0;
  double w_b = 0.0;

  /// Increment applied on '('.
  constexpr double a() const noexcept { return w_open + w_b; }
  /// Increment applied on ')'.
  constexpr double b() const noexcept { return w_close + w_b; }

  bool is_finite() const noexcept;

  /// (1, -1, 1, 0): the exact counter.
  static constexpr LrnParams canonical() noexcept { return {1.0, -1.0, 1.0, 0.0}; }
  /// Bias-free parameters with the given increments.
  static constexpr LrnParams from_increments(double a, double b, double u) noexcept {
    return {a, b, u, 0.0};
  }

  friend bool operator==(const LrnParams&, const LrnParams&) = default;
};

std::ostream& operator<<(std::ostream& os, const LrnParams& p);

struct Trajectory {
  double h0 = 0.0;
  std::vector<double> h;  // h[t] is the activation after token t

  double final_value() const noexcept { return h.empty() ? h0 : h.back(); }
};

inline constexpr double kDegenerateThreshold = 1e-12;
inline constexpr double kDefaultAcceptEpsilon = 1e-9;
inline constexpr double kDefaultIndicatorTolerance = 1e-6;

/// The two counting indicators, a/b = -1 and U = 1, with their deviations.
/// ab_ratio (and ab_deviation) are empty when |b| < kDegenerateThreshold.
struct IndicatorReport {
  std::optional<double> ab_ratio;
  double u_value = 0.0;
  std::optional<double> ab_deviation;
  double u_deviation = 0.0;
  double tolerance = kDefaultIndicatorTolerance;
  bool holds = false;

  friend bool operator==(const IndicatorReport&, const IndicatorReport&) = default;
};

double forward_step(const LrnParams& params, double h_prev, Token token) noexcept;

Trajectory forward(const LrnParams& params, const BracketSeq& seq, double h0 = 0.0);

/// forward(...).final_value() without materializing the trajectory.
double final_activation(const LrnParams& params, const BracketSeq& seq, double h0 = 0.0) noexcept;

/// Throws std::invalid_argument for a negative tolerance. A tolerance of 0
/// demands the indicators hold exactly.
IndicatorReport indicators(const LrnParams& params, double tol = kDefaultIndicatorTolerance);

/// Zero check on the final activation from h0 = 0: |h_T| <= epsilon.
bool accepts_lrn(const LrnParams& params, const BracketSeq& seq,
                 double epsilon = kDefaultAcceptEpsilon);

/// True when U == 1 and a == -b with no slack.
bool indicators_exact(const LrnParams& params) noexcept;

enum class CheckMode : std::uint8_t { Unchecked, Checked };

/// (n_open - n_close) * a. In Checked mode throws IndicatorsViolated unless
/// indicators_exact(params).
double closed_form(const LrnParams& params, std::int64_t n_open, std::int64_t n_close,
                   CheckMode mode = CheckMode::Unchecked);

/// {"w_open":..,"w_close":..,"u":..,"w_b":..}; shortest round-trip decimals.
std::string to_json_text(const LrnParams& params);
/// Throws FormatError on missing or non-finite fields.
LrnParams params_from_json_text(std::string_view text);

/// "w_open,w_close,u,w_b" as used on the command line.
LrnParams parse_params_csv(std::string_view text);

}  // namespace lrncount

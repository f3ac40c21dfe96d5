#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lrncount/bracket.hpp"
#include "lrncount/lrn.hpp"
#include "lrncount/rng.hpp"

namespace lrncount {

enum class Requirement : std::uint8_t { Zero, NonZero };

/// One row of the six-sequence case table used to derive the indicators.
struct CaseResult {
  int case_id = 0;
  BracketSeq sequence;
  Requirement required = Requirement::Zero;
  double observed_h = 0.0;
  bool satisfied = false;
};

struct CaseSpec {
  int case_id;
  std::string_view text;
  Requirement required;
};

inline constexpr std::array<CaseSpec, 6> kTableOneCases{{
    {1, "(", Requirement::NonZero},
    {2, ")", Requirement::NonZero},
    {3, "()", Requirement::Zero},
    {4, "((", Requirement::NonZero},
    {5, "(())", Requirement::Zero},
    {6, "()()", Requirement::Zero},
}};

/// Evaluates the six sequences from h0 = 0; Zero means |h| <= epsilon.
std::vector<CaseResult> table1_cases(const LrnParams& params,
                                     double epsilon = kDefaultAcceptEpsilon);

inline constexpr std::size_t kDefaultMaxLen = 12;

/// Smallest sequence (by length, then Open < Close) of length <= max_len on
/// which accepts_lrn disagrees with in_bb. Throws LengthCapExceeded past the
/// enumeration cap.
std::optional<BracketSeq> find_counterexample(const LrnParams& params,
                                              std::size_t max_len = kDefaultMaxLen,
                                              double epsilon = kDefaultAcceptEpsilon);

enum class Verdict : std::uint8_t {
  EquivalentUpToLen,
  IndicatorsFailAndCounterexampleFound,
  Inconsistent,
};

std::string_view to_string(Verdict v) noexcept;

struct EquivalenceReport {
  LrnParams params;
  std::size_t max_len = kDefaultMaxLen;
  double epsilon = kDefaultAcceptEpsilon;
  IndicatorReport indicator_report;
  std::optional<BracketSeq> counterexample;
  Verdict verdict = Verdict::Inconsistent;
  std::string diagnostics;  // non-empty only for Inconsistent
};

/// Both directions at once: indicator verdict crossed with the bounded search.
EquivalenceReport verify_equivalence(const LrnParams& params,
                                     std::size_t max_len = kDefaultMaxLen,
                                     double epsilon = kDefaultAcceptEpsilon,
                                     double tol = kDefaultIndicatorTolerance);

/// Checks final h == (n - m) * a bit-for-bit over every sequence up to
/// max_len. Throws IndicatorsViolated unless indicators_exact(params).
bool check_closed_form(const LrnParams& params, std::size_t max_len);

/// Parameter population for bounded falsification.
struct FalsificationSampler {
  double lo = -2.0;
  double hi = 2.0;
  double min_increment = 0.05;   // reject |a| or |b| below this
  double deviation_floor = 0.01;  // reject when both deviations are within this

  bool accepts(const LrnParams& p) const noexcept;
  LrnParams draw(Rng& rng) const;
};

struct FalsificationSummary {
  std::size_t samples = 0;
  std::size_t equivalent = 0;
  std::size_t counterexamples = 0;
  std::size_t inconsistent = 0;
  std::size_t longest_counterexample = 0;
  std::vector<EquivalenceReport> inconsistencies;
};

FalsificationSummary run_falsification(std::size_t samples, std::uint64_t seed,
                                       const FalsificationSampler& sampler,
                                       std::size_t max_len = kDefaultMaxLen,
                                       double epsilon = kDefaultAcceptEpsilon,
                                       double tol = kDefaultIndicatorTolerance);

}  // namespace lrncount

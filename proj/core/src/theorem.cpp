#include "lrncount/theorem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lrncount/errors.hpp"

namespace lrncount {

std::vector<CaseResult> table1_cases(const LrnParams& params, double epsilon) {
  std::vector<CaseResult> out;
  out.reserve(kTableOneCases.size());
  for (const auto& row : kTableOneCases) {
    CaseResult r;
    r.case_id = row.case_id;
    r.sequence = parse(row.text);
    r.required = row.required;
    r.observed_h = final_activation(params, r.sequence, 0.0);
    const bool zero = std::abs(r.observed_h) <= epsilon;
    r.satisfied = (row.required == Requirement::Zero) == zero;
    out.push_back(std::move(r));
  }
  return out;
}

std::optional<BracketSeq> find_counterexample(const LrnParams& params, std::size_t max_len,
                                              double epsilon) {
  if (max_len > kDefaultEnumerationCap) throw LengthCapExceeded(max_len, kDefaultEnumerationCap);
  for (std::size_t len = 0; len <= max_len; ++len) {
    for (auto seq : enumerate_all(len)) {
      if (accepts_lrn(params, seq, epsilon) != in_bb(seq)) return seq;
    }
  }
  return std::nullopt;
}

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::EquivalentUpToLen:
      return "EquivalentUpToLen";
    case Verdict::IndicatorsFailAndCounterexampleFound:
      return "IndicatorsFailAndCounterexampleFound";
    case Verdict::Inconsistent:
      return "Inconsistent";
  }
  return "?";
}

EquivalenceReport verify_equivalence(const LrnParams& params, std::size_t max_len,
                                     double epsilon, double tol) {
  EquivalenceReport r;
  r.params = params;
  r.max_len = max_len;
  r.epsilon = epsilon;
  r.indicator_report = indicators(params, tol);
  r.counterexample = find_counterexample(params, max_len, epsilon);

  const bool holds = r.indicator_report.holds;
  const bool found = r.counterexample.has_value();
  if (holds && !found) {
    r.verdict = Verdict::EquivalentUpToLen;
  } else if (!holds && found) {
    r.verdict = Verdict::IndicatorsFailAndCounterexampleFound;
  } else {
    r.verdict = Verdict::Inconsistent;
    std::ostringstream os;
    os.precision(17);
    if (holds) {
      os << "indicators hold (tol " << tol << ") but " << *r.counterexample
         << " disagrees with BB membership, final h = "
         << final_activation(params, *r.counterexample);
    } else {
      os << "indicators fail (u_dev " << r.indicator_report.u_deviation << ", ab_dev ";
      if (r.indicator_report.ab_deviation) {
        os << *r.indicator_report.ab_deviation;
      } else {
        os << "undefined";
      }
      os << ") but no counterexample up to length " << max_len << " at epsilon " << epsilon;
    }
    r.diagnostics = os.str();
  }
  return r;
}

bool check_closed_form(const LrnParams& params, std::size_t max_len) {
  if (!indicators_exact(params)) {
    throw IndicatorsViolated("closed-form check requires U == 1 and a == -b (exactly)");
  }
  for (std::size_t len = 0; len <= max_len; ++len) {
    for (auto seq : enumerate_all(len)) {
      const auto s = stats(seq);
      if (final_activation(params, seq) != closed_form(params, s.n_open, s.n_close)) return false;
    }
  }
  return true;
}

bool FalsificationSampler::accepts(const LrnParams& p) const noexcept {
  if (std::abs(p.a()) < min_increment || std::abs(p.b()) < min_increment) return false;
  const auto ind = indicators(p, 0.0);
  const bool ab_near = ind.ab_deviation && *ind.ab_deviation <= deviation_floor;
  const bool u_near = ind.u_deviation <= deviation_floor;
  return !(ab_near && u_near);
}

LrnParams FalsificationSampler::draw(Rng& rng) const {
  for (;;) {
    LrnParams p;
    p.w_open = uniform(rng, lo, hi);
    p.w_close = uniform(rng, lo, hi);
    p.u = uniform(rng, lo, hi);
    p.w_b = uniform(rng, lo, hi);
    if (accepts(p)) return p;
  }
}

FalsificationSummary run_falsification(std::size_t samples, std::uint64_t seed,
                                       const FalsificationSampler& sampler, std::size_t max_len,
                                       double epsilon, double tol) {
  FalsificationSummary summary;
  Rng rng(seed);
  for (std::size_t i = 0; i < samples; ++i) {
    auto report = verify_equivalence(sampler.draw(rng), max_len, epsilon, tol);
    ++summary.samples;
    switch (report.verdict) {
      case Verdict::EquivalentUpToLen:
        ++summary.equivalent;
        break;
      case Verdict::IndicatorsFailAndCounterexampleFound:
        ++summary.counterexamples;
        summary.longest_counterexample =
            std::max(summary.longest_counterexample, report.counterexample->size());
        break;
      case Verdict::Inconsistent:
        ++summary.inconsistent;
        summary.inconsistencies.push_back(std::move(report));
        break;
    }
  }
  return summary;
}

}  // namespace lrncount

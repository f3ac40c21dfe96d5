#include "lrncount/lrn.hpp"

#include <cmath>
#include <json.hpp>
#include <ostream>
#include <stdexcept>

#include "lrncount/errors.hpp"

namespace lrncount {

bool LrnParams::is_finite() const noexcept {
  return std::isfinite(w_open) && std::isfinite(w_close) && std::isfinite(u) &&
         std::isfinite(w_b);
}

std::ostream& operator<<(std::ostream& os, const LrnParams& p) {
  return os << "LrnParams{w_open=" << p.w_open << ", w_close=" << p.w_close << ", u=" << p.u
            << ", w_b=" << p.w_b << "}";
}

double forward_step(const LrnParams& params, double h_prev, Token token) noexcept {
  const double increment = token == Token::Open ? params.a() : params.b();
  return increment + params.u * h_prev;
}

Trajectory forward(const LrnParams& params, const BracketSeq& seq, double h0) {
  Trajectory traj{h0, {}};
  traj.h.reserve(seq.size());
  double h = h0;
  for (Token t : seq) {
    h = forward_step(params, h, t);
    traj.h.push_back(h);
  }
  return traj;
}

double final_activation(const LrnParams& params, const BracketSeq& seq, double h0) noexcept {
  double h = h0;
  for (Token t : seq) h = forward_step(params, h, t);
  return h;
}

IndicatorReport indicators(const LrnParams& params, double tol) {
  if (!(tol >= 0.0)) throw std::invalid_argument("indicator tolerance must be non-negative");
  IndicatorReport r;
  r.tolerance = tol;
  r.u_value = params.u;
  r.u_deviation = std::abs(params.u - 1.0);
  const double b = params.b();
  if (std::abs(b) >= kDegenerateThreshold) {
    r.ab_ratio = params.a() / b;
    r.ab_deviation = std::abs(*r.ab_ratio + 1.0);
  }
  r.holds = r.ab_deviation.has_value() && *r.ab_deviation <= tol && r.u_deviation <= tol;
  return r;
}

bool accepts_lrn(const LrnParams& params, const BracketSeq& seq, double epsilon) {
  return std::abs(final_activation(params, seq, 0.0)) <= epsilon;
}

bool indicators_exact(const LrnParams& params) noexcept {
  return params.u == 1.0 && params.a() == -params.b() && params.a() != 0.0;
}

double closed_form(const LrnParams& params, std::int64_t n_open, std::int64_t n_close,
                   CheckMode mode) {
  if (mode == CheckMode::Checked && !indicators_exact(params)) {
    throw IndicatorsViolated("closed form requires U == 1 and a == -b (exactly)");
  }
  return static_cast<double>(n_open - n_close) * params.a();
}

std::string to_json_text(const LrnParams& params) {
  nlohmann::ordered_json doc;
  doc["w_open"] = params.w_open;
  doc["w_close"] = params.w_close;
  doc["u"] = params.u;
  doc["w_b"] = params.w_b;
  return doc.dump();
}

LrnParams params_from_json_text(std::string_view text) {
  LrnParams p;
  try {
    const auto doc = nlohmann::json::parse(text);
    p.w_open = doc.at("w_open").get<double>();
    p.w_close = doc.at("w_close").get<double>();
    p.u = doc.at("u").get<double>();
    p.w_b = doc.value("w_b", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed parameter record: ") + e.what());
  }
  if (!p.is_finite()) throw FormatError("parameter record contains non-finite values");
  return p;
}

LrnParams parse_params_csv(std::string_view text) {
  double values[4] = {0, 0, 0, 0};
  std::size_t count = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto field = std::string(text.substr(start, comma == std::string_view::npos
                                                          ? std::string_view::npos
                                                          : comma - start));
    if (count == 4) throw FormatError("expected 3 or 4 comma-separated parameters");
    std::size_t used = 0;
    try {
      values[count] = std::stod(field, &used);
    } catch (const std::exception&) {
      throw FormatError("invalid parameter value '" + field + "'");
    }
    if (used != field.size()) throw FormatError("invalid parameter value '" + field + "'");
    ++count;
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (count < 3) throw FormatError("expected w_open,w_close,u[,w_b]");
  LrnParams p{values[0], values[1], values[2], values[3]};
  if (!p.is_finite()) throw FormatError("parameters must be finite");
  return p;
}

}  // namespace lrncount

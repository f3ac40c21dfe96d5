#include "lrncount/counter_machine.hpp"

#include <algorithm>
#include <charconv>
#include <json.hpp>

#include "lrncount/errors.hpp"

namespace lrncount {

using nlohmann::json;

std::string CounterUpdate::to_string() const {
  if (kind_ == Kind::SetZero) return "x0";
  return (amount_ >= 0 ? "+" : "") + std::to_string(amount_);
}

CounterUpdate CounterUpdate::parse(std::string_view text) {
  if (text == "x0" || text == "*0") return set_zero();
  if (text.size() >= 2 && (text[0] == '+' || text[0] == '-')) {
    std::int64_t magnitude = 0;
    const auto* first = text.data() + 1;
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, magnitude);
    if (ec == std::errc{} && ptr == last) return add(text[0] == '-' ? -magnitude : magnitude);
  }
  throw FormatError("invalid counter update '" + std::string(text) + "' (expected +m, -m or x0)");
}

std::vector<std::uint8_t> zero_check(std::span<const std::int64_t> v) {
  std::vector<std::uint8_t> mask(v.size());
  std::transform(v.begin(), v.end(), mask.begin(),
                 [](std::int64_t x) -> std::uint8_t { return x == 0 ? 0 : 1; });
  return mask;
}

std::uint32_t pack_mask(std::span<const std::uint8_t> mask) noexcept {
  std::uint32_t bits = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) bits |= std::uint32_t{1} << i;
  }
  return bits;
}

std::optional<std::size_t> CounterMachine::symbol_index(char symbol) const noexcept {
  auto it = std::find(alphabet_.begin(), alphabet_.end(), symbol);
  if (it == alphabet_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - alphabet_.begin());
}

std::optional<std::size_t> CounterMachine::state_index(std::string_view name) const noexcept {
  auto it = std::find(states_.begin(), states_.end(), name);
  if (it == states_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - states_.begin());
}

// Builder ---------------------------------------------------------------------

CounterMachine::Builder::Builder(std::vector<char> alphabet, std::vector<std::string> states,
                                 std::string initial_state, std::size_t counters)
    : alphabet_(std::move(alphabet)),
      states_(std::move(states)),
      initial_state_(std::move(initial_state)),
      k_(counters) {
  if (alphabet_.empty()) throw FormatError("machine alphabet is empty");
  if (states_.empty()) throw FormatError("machine has no states");
  if (k_ > kMaxCounters) {
    throw FormatError("machine has " + std::to_string(k_) + " counters; at most " +
                      std::to_string(kMaxCounters) + " supported");
  }
  auto sorted = alphabet_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw FormatError("duplicate symbol in machine alphabet");
  }
  auto names = states_;
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
    throw FormatError("duplicate state name");
  }
  require_state(initial_state_);
}

std::size_t CounterMachine::Builder::require_state(std::string_view name) const {
  auto it = std::find(states_.begin(), states_.end(), name);
  if (it == states_.end()) throw FormatError("unknown state '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - states_.begin());
}

CounterMachine::Builder& CounterMachine::Builder::rule(
    char symbol, std::string_view state, std::optional<std::vector<std::uint8_t>> mask,
    std::vector<CounterUpdate> updates, std::string_view next_state) {
  auto sym = std::find(alphabet_.begin(), alphabet_.end(), symbol);
  if (sym == alphabet_.end()) {
    throw FormatError("rule symbol '" + std::string(1, symbol) + "' is not in the alphabet");
  }
  if (updates.size() != k_) {
    throw FormatError("rule has " + std::to_string(updates.size()) + " updates for " +
                      std::to_string(k_) + " counters");
  }
  std::optional<std::uint32_t> bits;
  if (mask) {
    if (mask->size() != k_) throw FormatError("rule mask length differs from counter count");
    for (auto b : *mask) {
      if (b > 1) throw FormatError("mask entries must be 0 or 1");
    }
    bits = pack_mask(*mask);
  }
  rules_.push_back({static_cast<std::size_t>(sym - alphabet_.begin()), require_state(state), bits,
                    Transition{std::move(updates), require_state(next_state)}});
  return *this;
}

CounterMachine::Builder& CounterMachine::Builder::accept(std::string_view state,
                                                         std::uint8_t bit) {
  if (bit > 1) throw FormatError("acceptance bit must be 0 or 1");
  acceptance_.push_back({require_state(state), bit});
  return *this;
}

CounterMachine CounterMachine::Builder::build() const {
  const std::size_t masks = std::size_t{1} << k_;
  const std::size_t cells = alphabet_.size() * states_.size() * masks;
  std::vector<std::optional<Transition>> exact(cells);
  std::vector<std::optional<Transition>> fallback(alphabet_.size() * states_.size());

  for (const auto& r : rules_) {
    const std::size_t base = r.symbol * states_.size() + r.state;
    auto& slot = r.mask ? exact[base * masks + *r.mask] : fallback[base];
    if (slot) {
      throw FormatError("duplicate rule for symbol '" + std::string(1, alphabet_[r.symbol]) +
                        "' in state '" + states_[r.state] + "'");
    }
    slot = r.transition;
  }

  CounterMachine m;
  m.alphabet_ = alphabet_;
  m.states_ = states_;
  m.initial_state_ = require_state(initial_state_);
  m.k_ = k_;
  m.acceptance_ = acceptance_;
  m.table_.reserve(cells);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    const auto& chosen = exact[cell] ? exact[cell] : fallback[cell / masks];
    if (!chosen) {
      const std::size_t base = cell / masks;
      throw FormatError("no rule for symbol '" +
                        std::string(1, alphabet_[base / states_.size()]) + "' in state '" +
                        states_[base % states_.size()] + "' under mask " +
                        std::to_string(cell % masks));
    }
    m.table_.push_back(*chosen);
  }
  return m;
}

// Computation -----------------------------------------------------------------

MachineConfig initial_config(const CounterMachine& machine) {
  return {machine.initial_state(), std::vector<std::int64_t>(machine.counters(), 0)};
}

namespace {

MachineConfig step_at(const CounterMachine& machine, const MachineConfig& config, char symbol,
                      std::size_t position) {
  const auto sym = machine.symbol_index(symbol);
  if (!sym) throw UnknownToken(position, symbol);
  const auto mask = zero_check(config.counters);
  const auto& t = machine.transition(*sym, config.state, pack_mask(mask));
  MachineConfig next{t.next_state, config.counters};
  for (std::size_t i = 0; i < next.counters.size(); ++i) {
    next.counters[i] = t.updates[i].apply(next.counters[i]);
  }
  return next;
}

}  // namespace

MachineConfig step(const CounterMachine& machine, const MachineConfig& config, char symbol) {
  return step_at(machine, config, symbol, 0);
}

MachineConfig step(const CounterMachine& machine, const MachineConfig& config, Token token) {
  return step_at(machine, config, to_char(token), 0);
}

MachineConfig run(const CounterMachine& machine, std::string_view symbols) {
  auto config = initial_config(machine);
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    config = step_at(machine, config, symbols[i], i);
  }
  return config;
}

MachineConfig run(const CounterMachine& machine, const BracketSeq& seq) {
  auto config = initial_config(machine);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    config = step_at(machine, config, to_char(seq[i]), i);
  }
  return config;
}

bool accepts(const CounterMachine& machine, const BracketSeq& seq) {
  if (machine.counters() != 1) throw UnsupportedArity(machine.counters());
  return run(machine, seq).counters[0] == 0;
}

CounterMachine bb_counter() {
  return CounterMachine::Builder({'(', ')'}, {"q0"}, "q0", 1)
      .rule('(', "q0", std::nullopt, {CounterUpdate::add(+1)}, "q0")
      .rule(')', "q0", std::nullopt, {CounterUpdate::add(-1)}, "q0")
      .build();
}

// Machine-description documents -------------------------------------------------

std::string to_json_text(const CounterMachine& machine) {
  json doc;
  json alphabet = json::array();
  for (char c : machine.alphabet()) alphabet.push_back(std::string(1, c));
  doc["alphabet"] = alphabet;
  doc["states"] = machine.states();
  doc["initial_state"] = machine.states()[machine.initial_state()];
  doc["counters"] = machine.counters();

  const std::size_t k = machine.counters();
  json rules = json::array();
  for (std::size_t s = 0; s < machine.alphabet().size(); ++s) {
    for (std::size_t q = 0; q < machine.states().size(); ++q) {
      for (std::uint32_t bits = 0; bits < (std::uint32_t{1} << k); ++bits) {
        const auto& t = machine.transition(s, q, bits);
        json mask = json::array();
        for (std::size_t i = 0; i < k; ++i) mask.push_back((bits >> i) & 1U);
        json updates = json::array();
        for (const auto& u : t.updates) updates.push_back(u.to_string());
        rules.push_back({{"symbol", std::string(1, machine.alphabet()[s])},
                         {"state", machine.states()[q]},
                         {"mask", mask},
                         {"updates", updates},
                         {"next", machine.states()[t.next_state]}});
      }
    }
  }
  doc["rules"] = rules;

  json accept = json::array();
  for (const auto& e : machine.acceptance_mask()) {
    accept.push_back({{"state", machine.states()[e.state]}, {"bit", e.bit}});
  }
  doc["acceptance"] = accept;
  return doc.dump(2);
}

namespace {

char single_char(const json& v, const char* what) {
  const auto s = v.get<std::string>();
  if (s.size() != 1) throw FormatError(std::string(what) + " must be a single character");
  return s[0];
}

}  // namespace

CounterMachine machine_from_json_text(std::string_view text) {
  try {
    const json doc = json::parse(text);
    std::vector<char> alphabet;
    for (const auto& c : doc.at("alphabet")) alphabet.push_back(single_char(c, "alphabet symbol"));
    CounterMachine::Builder builder(std::move(alphabet),
                                    doc.at("states").get<std::vector<std::string>>(),
                                    doc.at("initial_state").get<std::string>(),
                                    doc.at("counters").get<std::size_t>());
    for (const auto& r : doc.at("rules")) {
      std::optional<std::vector<std::uint8_t>> mask;
      if (r.contains("mask") && !r.at("mask").is_null()) {
        mask = r.at("mask").get<std::vector<std::uint8_t>>();
      }
      std::vector<CounterUpdate> updates;
      for (const auto& u : r.at("updates")) updates.push_back(CounterUpdate::parse(u.get<std::string>()));
      builder.rule(single_char(r.at("symbol"), "rule symbol"), r.at("state").get<std::string>(),
                   std::move(mask), std::move(updates), r.at("next").get<std::string>());
    }
    if (doc.contains("acceptance")) {
      for (const auto& e : doc.at("acceptance")) {
        builder.accept(e.at("state").get<std::string>(), e.at("bit").get<std::uint8_t>());
      }
    }
    return builder.build();
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed machine description: ") + e.what());
  }
}

}  // namespace lrncount

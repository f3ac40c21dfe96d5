#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lrncount/bracket.hpp"

namespace lrncount {

/// Per-counter action: add an integer (Add(0) is the identity) or reset to zero.
class CounterUpdate {
 public:
  enum class Kind : std::uint8_t { Add, SetZero };

  static constexpr CounterUpdate add(std::int64_t m) noexcept { return {Kind::Add, m}; }
  static constexpr CounterUpdate set_zero() noexcept { return {Kind::SetZero, 0}; }

  constexpr Kind kind() const noexcept { return kind_; }
  constexpr std::int64_t amount() const noexcept { return amount_; }
  constexpr std::int64_t apply(std::int64_t value) const noexcept {
    return kind_ == Kind::SetZero ? 0 : value + amount_;
  }

  /// "+3", "-1", "+0" or "x0".
  std::string to_string() const;
  static CounterUpdate parse(std::string_view text);

  friend bool operator==(const CounterUpdate&, const CounterUpdate&) = default;

 private:
  constexpr CounterUpdate(Kind kind, std::int64_t amount) noexcept : kind_(kind), amount_(amount) {}

  Kind kind_;
  std::int64_t amount_;
};

/// mask_i = 0 where v_i == 0, 1 otherwise.
std::vector<std::uint8_t> zero_check(std::span<const std::int64_t> v);

/// Packs a zero-check mask into bits (bit i = mask_i).
std::uint32_t pack_mask(std::span<const std::uint8_t> mask) noexcept;

struct Transition {
  std::vector<CounterUpdate> updates;  // one per counter
  std::size_t next_state = 0;

  friend bool operator==(const Transition&, const Transition&) = default;
};

struct AcceptanceEntry {
  std::size_t state = 0;
  std::uint8_t bit = 0;

  friend bool operator==(const AcceptanceEntry&, const AcceptanceEntry&) = default;
};

inline constexpr std::size_t kMaxCounters = 16;

/// k-counter machine <alphabet, Q, q0, u, delta, F>. The update and transition
/// functions are stored together as one table that is total over
/// alphabet x Q x {0,1}^k. Instances are built through CounterMachine::Builder
/// or parsed from a machine-description document.
class CounterMachine {
 public:
  class Builder;

  const std::vector<char>& alphabet() const noexcept { return alphabet_; }
  const std::vector<std::string>& states() const noexcept { return states_; }
  std::size_t initial_state() const noexcept { return initial_state_; }
  std::size_t counters() const noexcept { return k_; }
  /// Stored for completeness; counter-zero acceptance ignores it.
  const std::vector<AcceptanceEntry>& acceptance_mask() const noexcept { return acceptance_; }

  std::optional<std::size_t> symbol_index(char symbol) const noexcept;
  std::optional<std::size_t> state_index(std::string_view name) const noexcept;

  const Transition& transition(std::size_t symbol, std::size_t state,
                               std::uint32_t mask_bits) const noexcept {
    return table_[(symbol * states_.size() + state) * (std::size_t{1} << k_) + mask_bits];
  }

  friend bool operator==(const CounterMachine&, const CounterMachine&) = default;

 private:
  CounterMachine() = default;

  std::vector<char> alphabet_;
  std::vector<std::string> states_;
  std::size_t initial_state_ = 0;
  std::size_t k_ = 0;
  std::vector<Transition> table_;
  std::vector<AcceptanceEntry> acceptance_;
};

class CounterMachine::Builder {
 public:
  Builder(std::vector<char> alphabet, std::vector<std::string> states, std::string initial_state,
          std::size_t counters);

  /// Adds a rule. A rule without a mask applies to every mask that has no
  /// rule of its own.
  Builder& rule(char symbol, std::string_view state, std::optional<std::vector<std::uint8_t>> mask,
                std::vector<CounterUpdate> updates, std::string_view next_state);

  Builder& accept(std::string_view state, std::uint8_t bit);

  /// Throws FormatError if the table is not total or references unknown names.
  CounterMachine build() const;

 private:
  struct PendingRule {
    std::size_t symbol;
    std::size_t state;
    std::optional<std::uint32_t> mask;
    Transition transition;
  };

  std::size_t require_state(std::string_view name) const;

  std::vector<char> alphabet_;
  std::vector<std::string> states_;
  std::string initial_state_;
  std::size_t k_;
  std::vector<PendingRule> rules_;
  std::vector<AcceptanceEntry> acceptance_;
};

struct MachineConfig {
  std::size_t state = 0;
  std::vector<std::int64_t> counters;

  friend bool operator==(const MachineConfig&, const MachineConfig&) = default;
};

/// <q0, 0-vector>.
MachineConfig initial_config(const CounterMachine& machine);

/// One transition on `symbol`. Throws UnknownToken (position 0) when the
/// symbol is outside the alphabet.
MachineConfig step(const CounterMachine& machine, const MachineConfig& config, char symbol);
MachineConfig step(const CounterMachine& machine, const MachineConfig& config, Token token);

/// Left fold of step from initial_config. UnknownToken carries the offending index.
MachineConfig run(const CounterMachine& machine, std::string_view symbols);
MachineConfig run(const CounterMachine& machine, const BracketSeq& seq);

/// Accepts iff the single counter ends at exactly 0. Throws UnsupportedArity for k != 1.
bool accepts(const CounterMachine& machine, const BracketSeq& seq);

/// One state, one counter, '(' adds 1 and ')' adds -1 regardless of the mask.
CounterMachine bb_counter();

/// Machine-description document (JSON). Field names are documented in README.
std::string to_json_text(const CounterMachine& machine);
CounterMachine machine_from_json_text(std::string_view text);

}  // namespace lrncount

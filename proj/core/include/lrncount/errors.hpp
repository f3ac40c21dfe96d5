#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lrncount {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidCharacter : public Error {
 public:
  InvalidCharacter(std::size_t position, char character)
      : Error("invalid bracket character '" + std::string(1, character) + "' at position " +
              std::to_string(position)),
        position_(position),
        character_(character) {}

  std::size_t position() const noexcept { return position_; }
  char character() const noexcept { return character_; }

 private:
  std::size_t position_;
  char character_;
};

class LengthCapExceeded : public Error {
 public:
  LengthCapExceeded(std::size_t length, std::size_t cap)
      : Error("sequence length " + std::to_string(length) + " exceeds enumeration cap " +
              std::to_string(cap)),
        length_(length),
        cap_(cap) {}

  std::size_t length() const noexcept { return length_; }
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t length_;
  std::size_t cap_;
};

class UnknownToken : public Error {
 public:
  UnknownToken(std::size_t position, char symbol)
      : Error("symbol '" + std::string(1, symbol) + "' at position " + std::to_string(position) +
              " is not in the machine alphabet"),
        position_(position),
        symbol_(symbol) {}

  std::size_t position() const noexcept { return position_; }
  char symbol() const noexcept { return symbol_; }

 private:
  std::size_t position_;
  char symbol_;
};

class UnsupportedArity : public Error {
 public:
  explicit UnsupportedArity(std::size_t k)
      : Error("counter-zero acceptance needs exactly one counter, machine has " +
              std::to_string(k)),
        k_(k) {}

  std::size_t arity() const noexcept { return k_; }

 private:
  std::size_t k_;
};

class IndicatorsViolated : public Error {
 public:
  using Error::Error;
};

class NumericalDivergence : public Error {
 public:
  using Error::Error;
};

class SchemaMismatch : public Error {
 public:
  using Error::Error;
};

/// Malformed structured input (machine descriptions, configs, logs).
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace lrncount

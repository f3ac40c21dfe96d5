#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <iterator>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lrncount/rng.hpp"

namespace lrncount {

enum class Token : std::uint8_t { Open = 0, Close = 1 };

constexpr char to_char(Token t) noexcept { return t == Token::Open ? '(' : ')'; }

/// One-hot input vector fed to the recurrent cell: Open -> (1, 0), Close -> (0, 1).
/// The a/b increments of the cell depend on this order.
constexpr std::array<double, 2> one_hot(Token t) noexcept {
  return t == Token::Open ? std::array<double, 2>{1.0, 0.0} : std::array<double, 2>{0.0, 1.0};
}

class BracketSeq {
 public:
  BracketSeq() = default;
  explicit BracketSeq(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  Token operator[](std::size_t i) const noexcept { return tokens_[i]; }
  std::span<const Token> tokens() const noexcept { return tokens_; }
  auto begin() const noexcept { return tokens_.begin(); }
  auto end() const noexcept { return tokens_.end(); }

  std::string to_text() const;

  friend bool operator==(const BracketSeq&, const BracketSeq&) = default;
  // Length first, then lexicographic with Open < Close.
  friend std::strong_ordering operator<=>(const BracketSeq& lhs, const BracketSeq& rhs) noexcept;

 private:
  std::vector<Token> tokens_;
};

std::ostream& operator<<(std::ostream& os, const BracketSeq& seq);

struct BracketStats {
  std::int64_t n_open = 0;
  std::int64_t n_close = 0;
  std::int64_t diff = 0;  // n_open - n_close

  friend bool operator==(const BracketStats&, const BracketStats&) = default;
};

/// Throws InvalidCharacter for anything other than '(' and ')'.
BracketSeq parse(std::string_view text);

BracketStats stats(const BracketSeq& seq) noexcept;

/// Balanced-bracket membership: equal counts, order irrelevant.
bool in_bb(const BracketSeq& seq) noexcept;

/// Dyck-1 membership: balanced and no prefix dips below zero.
bool is_dyck1(const BracketSeq& seq) noexcept;

inline constexpr std::size_t kDefaultEnumerationCap = 20;

/// All 2^length sequences of one length, lexicographic with Open < Close.
///
/// Sequence i is the big-endian binary expansion of i with 0 = Open, so the
/// range is lazy and costs O(length) per element.
class SequenceRange {
 public:
  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = BracketSeq;
    using difference_type = std::ptrdiff_t;
    using pointer = void;
    using reference = BracketSeq;

    iterator() = default;
    iterator(std::size_t length, std::uint64_t index) : length_(length), index_(index) {}

    BracketSeq operator*() const;
    iterator& operator++() noexcept {
      ++index_;
      return *this;
    }
    iterator operator++(int) noexcept {
      auto copy = *this;
      ++index_;
      return copy;
    }
    friend bool operator==(const iterator& a, const iterator& b) noexcept {
      return a.index_ == b.index_;
    }

   private:
    std::size_t length_ = 0;
    std::uint64_t index_ = 0;
  };

  SequenceRange(std::size_t length, std::uint64_t count) : length_(length), count_(count) {}

  iterator begin() const noexcept { return {length_, 0}; }
  iterator end() const noexcept { return {length_, count_}; }
  std::uint64_t size() const noexcept { return count_; }
  std::size_t length() const noexcept { return length_; }

 private:
  std::size_t length_;
  std::uint64_t count_;
};

/// Throws LengthCapExceeded when length > cap.
SequenceRange enumerate_all(std::size_t length, std::size_t cap = kDefaultEnumerationCap);

/// Each token independently Open or Close with probability 1/2.
BracketSeq sample_random(std::size_t length, Rng& rng);

enum class BinaryLabel : std::uint8_t { NonPos = 0, Pos = 1 };
enum class TernaryLabel : std::uint8_t { Pos = 0, Zero = 1, Neg = 2 };

BinaryLabel label_binary(const BracketSeq& seq) noexcept;
TernaryLabel label_ternary(const BracketSeq& seq) noexcept;

std::string_view to_string(BinaryLabel label) noexcept;
std::string_view to_string(TernaryLabel label) noexcept;

/// Dataset text format: one sequence per line, optionally followed by a tab
/// and a free-form label column.
struct DatasetLine {
  BracketSeq seq;
  std::optional<std::string> label;

  friend bool operator==(const DatasetLine&, const DatasetLine&) = default;
};

std::vector<DatasetLine> read_dataset(std::istream& in);
void write_dataset(std::ostream& out, std::span<const DatasetLine> lines);

}  // namespace lrncount

#include "lrncount/bracket.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "lrncount/errors.hpp"

namespace lrncount {

std::string BracketSeq::to_text() const {
  std::string out;
  out.reserve(tokens_.size());
  for (Token t : tokens_) out.push_back(to_char(t));
  return out;
}

std::strong_ordering operator<=>(const BracketSeq& lhs, const BracketSeq& rhs) noexcept {
  if (auto c = lhs.size() <=> rhs.size(); c != 0) return c;
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    if (lhs[i] != rhs[i]) return lhs[i] < rhs[i] ? std::strong_ordering::less
                                                 : std::strong_ordering::greater;
  }
  return std::strong_ordering::equal;
}

std::ostream& operator<<(std::ostream& os, const BracketSeq& seq) {
  return os << '"' << seq.to_text() << '"';
}

BracketSeq parse(std::string_view text) {
  std::vector<Token> tokens;
  tokens.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    switch (text[i]) {
      case '(':
        tokens.push_back(Token::Open);
        break;
      case ')':
        tokens.push_back(Token::Close);
        break;
      default:
        throw InvalidCharacter(i, text[i]);
    }
  }
  return BracketSeq(std::move(tokens));
}

BracketStats stats(const BracketSeq& seq) noexcept {
  BracketStats s;
  for (Token t : seq) (t == Token::Open ? s.n_open : s.n_close) += 1;
  s.diff = s.n_open - s.n_close;
  return s;
}

bool in_bb(const BracketSeq& seq) noexcept { return stats(seq).diff == 0; }

bool is_dyck1(const BracketSeq& seq) noexcept {
  std::int64_t depth = 0;
  for (Token t : seq) {
    depth += t == Token::Open ? 1 : -1;
    if (depth < 0) return false;
  }
  return depth == 0;
}

BracketSeq SequenceRange::iterator::operator*() const {
  std::vector<Token> tokens(length_);
  for (std::size_t i = 0; i < length_; ++i) {
    const auto bit = (index_ >> (length_ - 1 - i)) & 1U;
    tokens[i] = bit ? Token::Close : Token::Open;
  }
  return BracketSeq(std::move(tokens));
}

SequenceRange enumerate_all(std::size_t length, std::size_t cap) {
  // 63 keeps the index arithmetic inside uint64 regardless of the cap.
  if (length > cap || length > 63) throw LengthCapExceeded(length, std::min<std::size_t>(cap, 63));
  return SequenceRange(length, std::uint64_t{1} << length);
}

BracketSeq sample_random(std::size_t length, Rng& rng) {
  std::vector<Token> tokens(length);
  for (auto& t : tokens) t = fair_coin(rng) ? Token::Close : Token::Open;
  return BracketSeq(std::move(tokens));
}

BinaryLabel label_binary(const BracketSeq& seq) noexcept {
  return stats(seq).diff > 0 ? BinaryLabel::Pos : BinaryLabel::NonPos;
}

TernaryLabel label_ternary(const BracketSeq& seq) noexcept {
  const auto diff = stats(seq).diff;
  if (diff > 0) return TernaryLabel::Pos;
  if (diff < 0) return TernaryLabel::Neg;
  return TernaryLabel::Zero;
}

std::string_view to_string(BinaryLabel label) noexcept {
  return label == BinaryLabel::Pos ? "pos" : "nonpos";
}

std::string_view to_string(TernaryLabel label) noexcept {
  switch (label) {
    case TernaryLabel::Pos:
      return "pos";
    case TernaryLabel::Zero:
      return "zero";
    case TernaryLabel::Neg:
      return "neg";
  }
  return "?";
}

std::vector<DatasetLine> read_dataset(std::istream& in) {
  std::vector<DatasetLine> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto tab = line.find('\t');
    DatasetLine entry;
    entry.seq = parse(std::string_view(line).substr(0, tab));
    if (tab != std::string::npos) entry.label = line.substr(tab + 1);
    lines.push_back(std::move(entry));
  }
  return lines;
}

void write_dataset(std::ostream& out, std::span<const DatasetLine> lines) {
  for (const auto& entry : lines) {
    out << entry.seq.to_text();
    if (entry.label) out << '\t' << *entry.label;
    out << '\n';
  }
}

}  // namespace lrncount

#pragma once

// Exact GF(2) arithmetic: packed bit vectors, small dense matrices, rank,
// linear solving and minimum distance by codeword enumeration.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "codednfv/error.hpp"

namespace codednfv {

class BitVec {
 public:
  using Word = std::uint64_t;
  static constexpr std::size_t kWordBits = 64;

  BitVec() = default;
  explicit BitVec(std::size_t len) : len_(len), words_((len + kWordBits - 1) / kWordBits, 0) {}

  static BitVec ones(std::size_t len) {
    BitVec v(len);
    for (std::size_t i = 0; i < len; ++i) v.set(i, true);
    return v;
  }

  /// Parses a string of '0'/'1' characters, most significant position first.
  static BitVec from_string(std::string_view text) {
    BitVec v(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
      if (text[i] == '1') {
        v.set(i, true);
      } else if (text[i] != '0') {
        throw Error(ErrorKind::Parse, "invalid bit character '" + std::string(1, text[i]) + "'");
      }
    }
    return v;
  }

  std::size_t size() const noexcept { return len_; }
  bool empty() const noexcept { return len_ == 0; }

  bool get(std::size_t i) const noexcept { return (words_[i / kWordBits] >> (i % kWordBits)) & 1U; }
  bool operator[](std::size_t i) const noexcept { return get(i); }

  void set(std::size_t i, bool value) noexcept {
    const Word mask = Word{1} << (i % kWordBits);
    if (value) {
      words_[i / kWordBits] |= mask;
    } else {
      words_[i / kWordBits] &= ~mask;
    }
  }

  void flip(std::size_t i) noexcept { words_[i / kWordBits] ^= Word{1} << (i % kWordBits); }

  std::size_t weight() const noexcept {
    std::size_t w = 0;
    for (Word word : words_) w += static_cast<std::size_t>(std::popcount(word));
    return w;
  }

  bool is_zero() const noexcept {
    return std::all_of(words_.begin(), words_.end(), [](Word w) { return w == 0; });
  }

  std::span<const Word> words() const noexcept { return words_; }

  BitVec& operator^=(const BitVec& other) {
    if (other.len_ != len_) {
      throw Error(ErrorKind::LengthMismatch,
                  "xor of lengths " + std::to_string(len_) + " and " + std::to_string(other.len_));
    }
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] ^= other.words_[w];
    return *this;
  }

  friend BitVec operator^(BitVec lhs, const BitVec& rhs) {
    lhs ^= rhs;
    return lhs;
  }

  friend bool operator==(const BitVec& a, const BitVec& b) noexcept {
    return a.len_ == b.len_ && a.words_ == b.words_;
  }

  std::string to_string() const {
    std::string s(len_, '0');
    for (std::size_t i = 0; i < len_; ++i) {
      if (get(i)) s[i] = '1';
    }
    return s;
  }

 private:
  // Bits beyond len_ in the last word are always zero.
  std::size_t len_ = 0;
  std::vector<Word> words_;
};

/// Bitwise sum of two equal-length vectors.
inline BitVec bit_xor(const BitVec& a, const BitVec& b) { return a ^ b; }

/// Dense K x N matrix over GF(2), stored row-wise.
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(std::size_t rows, std::size_t cols) : cols_(cols), rows_(rows, BitVec(cols)) {}

  static BitMatrix identity(std::size_t n) {
    BitMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
    return m;
  }

  /// Rows of '0'/'1' characters separated by newlines or '/'. Blank lines
  /// and surrounding whitespace are ignored.
  static BitMatrix parse(std::string_view text) {
    std::vector<BitVec> rows;
    std::string current;
    auto flush = [&] {
      if (current.empty()) return;
      rows.push_back(BitVec::from_string(current));
      if (rows.back().size() != rows.front().size()) {
        throw Error(ErrorKind::Parse, "ragged matrix: row " + std::to_string(rows.size()) + " has " +
                                          std::to_string(rows.back().size()) + " columns, expected " +
                                          std::to_string(rows.front().size()));
      }
      current.clear();
    };
    for (char c : text) {
      if (c == '\n' || c == '/' || c == ';') {
        flush();
      } else if (c == ' ' || c == '\t' || c == '\r') {
        continue;
      } else {
        current.push_back(c);
      }
    }
    flush();
    if (rows.empty()) throw Error(ErrorKind::Parse, "empty matrix");
    BitMatrix m;
    m.cols_ = rows.front().size();
    m.rows_ = std::move(rows);
    return m;
  }

  std::size_t rows() const noexcept { return rows_.size(); }
  std::size_t cols() const noexcept { return cols_; }

  bool get(std::size_t r, std::size_t c) const noexcept { return rows_[r].get(c); }
  void set(std::size_t r, std::size_t c, bool value) noexcept { rows_[r].set(c, value); }

  const BitVec& row(std::size_t r) const noexcept { return rows_[r]; }

  BitVec column(std::size_t c) const {
    BitVec col(rows());
    for (std::size_t r = 0; r < rows(); ++r) col.set(r, get(r, c));
    return col;
  }

  std::size_t column_weight(std::size_t c) const noexcept {
    std::size_t w = 0;
    for (const auto& r : rows_) w += r.get(c) ? 1 : 0;
    return w;
  }

  std::size_t max_column_weight() const noexcept {
    std::size_t w = 0;
    for (std::size_t c = 0; c < cols_; ++c) w = std::max(w, column_weight(c));
    return w;
  }

  bool is_zero() const noexcept {
    return std::all_of(rows_.begin(), rows_.end(), [](const BitVec& r) { return r.is_zero(); });
  }

  /// Column j packed into an integer with row i at bit i. Requires rows() <= 64.
  std::uint64_t packed_column(std::size_t c) const {
    if (rows() > 64) throw Error(ErrorKind::TooLarge, "packed columns need at most 64 rows");
    std::uint64_t v = 0;
    for (std::size_t r = 0; r < rows(); ++r) {
      if (get(r, c)) v |= std::uint64_t{1} << r;
    }
    return v;
  }

  std::vector<std::uint64_t> packed_columns() const {
    std::vector<std::uint64_t> out(cols_);
    for (std::size_t c = 0; c < cols_; ++c) out[c] = packed_column(c);
    return out;
  }

  static BitMatrix from_packed_columns(std::size_t rows, std::span<const std::uint64_t> cols) {
    BitMatrix m(rows, cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) {
      for (std::size_t r = 0; r < rows; ++r) m.set(r, c, (cols[c] >> r) & 1U);
    }
    return m;
  }

  BitMatrix select_columns(std::span<const std::size_t> indices) const {
    BitMatrix m(rows(), indices.size());
    for (std::size_t j = 0; j < indices.size(); ++j) {
      for (std::size_t r = 0; r < rows(); ++r) m.set(r, j, get(r, indices[j]));
    }
    return m;
  }

  /// u * M for a message u with one bit per row.
  BitVec left_multiply(const BitVec& u) const {
    if (u.size() != rows()) {
      throw Error(ErrorKind::LengthMismatch, "message length " + std::to_string(u.size()) +
                                                 " for matrix with " + std::to_string(rows()) + " rows");
    }
    BitVec out(cols_);
    for (std::size_t r = 0; r < rows(); ++r) {
      if (u.get(r)) out ^= rows_[r];
    }
    return out;
  }

  std::string to_string(char row_sep = '\n') const {
    std::string s;
    for (std::size_t r = 0; r < rows(); ++r) {
      if (r != 0) s.push_back(row_sep);
      s += rows_[r].to_string();
    }
    return s;
  }

  friend bool operator==(const BitMatrix& a, const BitMatrix& b) noexcept {
    return a.cols_ == b.cols_ && a.rows_ == b.rows_;
  }

 private:
  std::size_t cols_ = 0;
  std::vector<BitVec> rows_;
};

/// Rank of the span of a set of vectors packed into 64-bit words.
inline std::size_t rank_of_packed(std::span<const std::uint64_t> vectors) {
  // XOR basis keyed by leading bit.
  std::uint64_t basis[64] = {};
  std::size_t rank = 0;
  for (std::uint64_t v : vectors) {
    while (v != 0) {
      const int lead = 63 - std::countl_zero(v);
      if (basis[lead] == 0) {
        basis[lead] = v;
        ++rank;
        break;
      }
      v ^= basis[lead];
    }
  }
  return rank;
}

inline std::size_t rank(const BitMatrix& m) {
  std::vector<BitVec> work;
  work.reserve(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) work.push_back(m.row(r));
  std::size_t rank = 0;
  for (std::size_t c = 0; c < m.cols() && rank < work.size(); ++c) {
    std::size_t pivot = rank;
    while (pivot < work.size() && !work[pivot].get(c)) ++pivot;
    if (pivot == work.size()) continue;
    std::swap(work[rank], work[pivot]);
    for (std::size_t r = 0; r < work.size(); ++r) {
      if (r != rank && work[r].get(c)) work[r] ^= work[rank];
    }
    ++rank;
  }
  return rank;
}

/// Finds the messages u_1..u_K with sum_i m[i][j] * u_i == rhs[j] for every
/// column j. All bit positions of the rhs vectors are solved together by one
/// elimination over the column equations.
inline std::vector<BitVec> solve(const BitMatrix& m, std::span<const BitVec> rhs) {
  const std::size_t k = m.rows();
  if (rhs.size() != m.cols()) {
    throw Error(ErrorKind::LengthMismatch, "solve needs one rhs vector per column: got " +
                                               std::to_string(rhs.size()) + ", expected " +
                                               std::to_string(m.cols()));
  }
  if (k > 64) throw Error(ErrorKind::TooLarge, "solve supports at most 64 unknowns");
  std::size_t len = rhs.empty() ? 0 : rhs.front().size();
  for (const auto& v : rhs) {
    if (v.size() != len) throw Error(ErrorKind::LengthMismatch, "rhs vectors differ in length");
  }

  struct Equation {
    std::uint64_t coeffs;
    BitVec value;
  };
  std::vector<Equation> eqs;
  eqs.reserve(m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j) eqs.push_back({m.packed_column(j), rhs[j]});

  std::size_t pivots = 0;
  for (std::size_t bit = 0; bit < k; ++bit) {
    const std::uint64_t mask = std::uint64_t{1} << bit;
    std::size_t p = pivots;
    while (p < eqs.size() && !(eqs[p].coeffs & mask)) ++p;
    if (p == eqs.size()) {
      throw Error(ErrorKind::RankDeficient,
                  "selected columns span " + std::to_string(rank(m)) + " of " + std::to_string(k) + " dimensions");
    }
    std::swap(eqs[pivots], eqs[p]);
    for (std::size_t e = 0; e < eqs.size(); ++e) {
      if (e != pivots && (eqs[e].coeffs & mask)) {
        eqs[e].coeffs ^= eqs[pivots].coeffs;
        eqs[e].value ^= eqs[pivots].value;
      }
    }
    ++pivots;
  }
  for (std::size_t e = pivots; e < eqs.size(); ++e) {
    if (!eqs[e].value.is_zero()) {
      throw Error(ErrorKind::InconsistentSystem, "right-hand sides are not in the column span");
    }
  }

  // Gauss-Jordan leaves pivot equation i with coefficient exactly 1 << i.
  std::vector<BitVec> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(std::move(eqs[i].value));
  return out;
}

inline constexpr std::size_t kMaxEnumerationRows = 20;

struct MinWeightCodeword {
  std::size_t weight;
  BitVec message;
  BitVec codeword;
};

/// Lightest codeword u*M over all nonzero messages u, enumerated in Gray-code
/// order. Ties keep the first message reached. A rank-deficient matrix yields
/// weight 0.
inline MinWeightCodeword min_weight_codeword(const BitMatrix& m) {
  const std::size_t k = m.rows();
  if (k > kMaxEnumerationRows) {
    throw Error(ErrorKind::TooLarge, "codeword enumeration limited to " + std::to_string(kMaxEnumerationRows) +
                                         " rows, got " + std::to_string(k));
  }
  if (k == 0 || m.is_zero()) throw Error(ErrorKind::ZeroMatrix, "every codeword is zero");

  BitVec codeword(m.cols());
  BitVec message(k);
  MinWeightCodeword best{m.cols() + 1, BitVec(k), BitVec(m.cols())};
  const std::uint64_t total = std::uint64_t{1} << k;
  for (std::uint64_t i = 1; i < total; ++i) {
    const auto changed = static_cast<std::size_t>(std::countr_zero(i));
    codeword ^= m.row(changed);
    message.flip(changed);
    const std::size_t w = codeword.weight();
    if (w < best.weight) best = {w, message, codeword};
  }
  return best;
}

inline std::size_t min_distance(const BitMatrix& m) { return min_weight_codeword(m).weight; }

}  // namespace codednfv

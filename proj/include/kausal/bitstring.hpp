#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kausal/errors.hpp"

namespace kausal {

enum class ElementwiseKind { bnot, bxor, band, beq };

// Finite binary string. Packed 64 bits per word, bit i lives in word i/64 at
// bit position i%64 (LSB-first), so to_bytes/from_bytes are plain
// little-endian views of the same layout. Unused high bits of the last word
// are kept zero so equality is word equality.
class BitString {
 public:
  BitString() = default;
  explicit BitString(size_t n_bits) : len_(n_bits), words_(word_count(n_bits), 0) {}

  static BitString from_bytes(const std::vector<uint8_t>& bytes, size_t n_bits);
  static BitString parse_ascii01(const std::string& text);  // MalformedFile on non-01

  size_t size() const { return len_; }
  bool empty() const { return len_ == 0; }

  bool get(size_t i) const {
    check_index(i);
    return (words_[i >> 6] >> (i & 63)) & 1u;
  }
  void set(size_t i, bool v) {
    check_index(i);
    uint64_t m = uint64_t{1} << (i & 63);
    if (v)
      words_[i >> 6] |= m;
    else
      words_[i >> 6] &= ~m;
  }
  void flip(size_t i) {
    check_index(i);
    words_[i >> 6] ^= uint64_t{1} << (i & 63);
  }

  void push_back(bool v);
  void append(const BitString& other);

  BitString slice(size_t pos, size_t n) const;  // bits [pos, pos+n)
  BitString prefix(size_t n) const { return slice(0, n); }

  // Subsequence at the given positions, in the given order.
  BitString extract(const std::vector<uint32_t>& positions) const;

  size_t weight() const;  // number of ones

  std::vector<uint8_t> to_bytes() const;
  std::string to_ascii01() const;

  const std::vector<uint64_t>& words() const { return words_; }

  bool operator==(const BitString& o) const { return len_ == o.len_ && words_ == o.words_; }
  bool operator!=(const BitString& o) const { return !(*this == o); }

 private:
  friend BitString elementwise(ElementwiseKind kind, const BitString& a, const BitString& b);
  static size_t word_count(size_t n_bits) { return (n_bits + 63) / 64; }
  void check_index(size_t i) const {
    if (i >= len_) throw std::out_of_range("BitString index " + std::to_string(i) + " >= " + std::to_string(len_));
  }
  void clear_tail();

  size_t len_ = 0;
  std::vector<uint64_t> words_;
};

BitString operator+(const BitString& a, const BitString& b);

// Unary for bnot (b ignored/empty), binary otherwise; LengthMismatch if sizes differ.
BitString elementwise(ElementwiseKind kind, const BitString& a, const BitString& b = BitString());

inline BitString bs_not(const BitString& a) { return elementwise(ElementwiseKind::bnot, a); }
inline BitString bs_xor(const BitString& a, const BitString& b) { return elementwise(ElementwiseKind::bxor, a, b); }
inline BitString bs_and(const BitString& a, const BitString& b) { return elementwise(ElementwiseKind::band, a, b); }
inline BitString bs_eq(const BitString& a, const BitString& b) { return elementwise(ElementwiseKind::beq, a, b); }

// String over alphabet {1, ..., m}, m >= 2.
class SymbolString {
 public:
  SymbolString() = default;
  SymbolString(std::vector<uint16_t> symbols, uint16_t m);

  static SymbolString parse(const std::string& text, uint16_t m);  // space-separated decimals

  size_t size() const { return symbols_.size(); }
  bool empty() const { return symbols_.empty(); }
  uint16_t alphabet() const { return m_; }
  uint16_t get(size_t i) const { return symbols_.at(i); }
  void push_back(uint16_t sym);
  const std::vector<uint16_t>& symbols() const { return symbols_; }

  size_t bits_per_symbol() const;
  BitString to_bits() const;  // (symbol-1) packed bits_per_symbol() bits each, LSB-first
  std::string serialize() const;

  bool operator==(const SymbolString& o) const { return m_ == o.m_ && symbols_ == o.symbols_; }

 private:
  std::vector<uint16_t> symbols_;
  uint16_t m_ = 2;
};

// Positions i with s[i] == value, ascending.
std::vector<uint32_t> symbol_mask_positions(const SymbolString& s, uint16_t value);

enum class BitFileFormat { ascii01, packed };

// packed layout: 8-byte little-endian bit count, then ceil(n/8) payload bytes.
// ascii01 layout: the 0/1 characters plus one trailing newline.
void write_bitstring(const std::string& path, const BitString& s, BitFileFormat fmt);
BitString read_bitstring(const std::string& path, BitFileFormat fmt);  // MalformedFile

}  // namespace kausal

#include "kausal/bitstring.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace kausal {

void BitString::clear_tail() {
  size_t tail = len_ & 63;
  if (tail != 0 && !words_.empty()) words_.back() &= (uint64_t{1} << tail) - 1;
}

BitString BitString::from_bytes(const std::vector<uint8_t>& bytes, size_t n_bits) {
  if (bytes.size() * 8 < n_bits) throw LengthMismatch("from_bytes: need " + std::to_string(n_bits) + " bits");
  BitString s(n_bits);
  if (n_bits > 0) std::memcpy(s.words_.data(), bytes.data(), (n_bits + 7) / 8);
  s.clear_tail();
  return s;
}

BitString BitString::parse_ascii01(const std::string& text) {
  size_t end = text.size();
  while (end > 0 && (text[end - 1] == '\n' || text[end - 1] == '\r')) --end;
  BitString s(end);
  for (size_t i = 0; i < end; ++i) {
    char c = text[i];
    if (c == '1')
      s.set(i, true);
    else if (c != '0')
      throw MalformedFile("ascii01: unexpected byte at offset " + std::to_string(i));
  }
  return s;
}

void BitString::push_back(bool v) {
  if ((len_ & 63) == 0) words_.push_back(0);
  if (v) words_.back() |= uint64_t{1} << (len_ & 63);
  ++len_;
}

void BitString::append(const BitString& other) {
  if (other.len_ == 0) return;
  size_t shift = len_ & 63;
  if (shift == 0) {
    words_.resize(word_count(len_ + other.len_), 0);
    std::memcpy(words_.data() + (len_ >> 6), other.words_.data(), other.words_.size() * 8);
  } else {
    words_.reserve(word_count(len_ + other.len_));
    for (size_t w = 0; w < other.words_.size(); ++w) {
      words_.back() |= other.words_[w] << shift;
      if (word_count(len_ + other.len_) > words_.size()) words_.push_back(other.words_[w] >> (64 - shift));
    }
  }
  len_ += other.len_;
  clear_tail();
}

BitString operator+(const BitString& a, const BitString& b) {
  BitString r = a;
  r.append(b);
  return r;
}

BitString BitString::slice(size_t pos, size_t n) const {
  if (pos + n > len_) throw std::out_of_range("slice past end");
  BitString r(n);
  size_t shift = pos & 63;
  size_t base = pos >> 6;
  for (size_t w = 0; w < r.words_.size(); ++w) {
    uint64_t v = words_[base + w] >> shift;
    if (shift != 0 && base + w + 1 < words_.size()) v |= words_[base + w + 1] << (64 - shift);
    r.words_[w] = v;
  }
  r.clear_tail();
  return r;
}

BitString BitString::extract(const std::vector<uint32_t>& positions) const {
  BitString r(positions.size());
  for (size_t i = 0; i < positions.size(); ++i) r.set(i, get(positions[i]));
  return r;
}

size_t BitString::weight() const {
  size_t w = 0;
  for (uint64_t v : words_) w += std::popcount(v);
  return w;
}

std::vector<uint8_t> BitString::to_bytes() const {
  std::vector<uint8_t> out((len_ + 7) / 8, 0);
  if (!out.empty()) std::memcpy(out.data(), words_.data(), out.size());
  return out;
}

std::string BitString::to_ascii01() const {
  std::string s(len_, '0');
  for (size_t i = 0; i < len_; ++i)
    if (get(i)) s[i] = '1';
  return s;
}

BitString elementwise(ElementwiseKind kind, const BitString& a, const BitString& b) {
  if (kind == ElementwiseKind::bnot) {
    BitString r(a.size());
    for (size_t w = 0; w < a.words().size(); ++w) r.words_[w] = ~a.words()[w];
    r.clear_tail();
    return r;
  }
  if (a.size() != b.size())
    throw LengthMismatch("elementwise: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  BitString r(a.size());
  const auto& aw = a.words();
  const auto& bw = b.words();
  for (size_t w = 0; w < aw.size(); ++w) {
    uint64_t v = 0;
    switch (kind) {
      case ElementwiseKind::bxor: v = aw[w] ^ bw[w]; break;
      case ElementwiseKind::band: v = aw[w] & bw[w]; break;
      case ElementwiseKind::beq: v = ~(aw[w] ^ bw[w]); break;
      case ElementwiseKind::bnot: break;
    }
    r.words_[w] = v;
  }
  r.clear_tail();
  return r;
}

SymbolString::SymbolString(std::vector<uint16_t> symbols, uint16_t m) : symbols_(std::move(symbols)), m_(m) {
  if (m_ < 2) throw std::invalid_argument("SymbolString: alphabet size must be >= 2");
  for (uint16_t v : symbols_)
    if (v < 1 || v > m_) throw std::invalid_argument("SymbolString: symbol out of range");
}

SymbolString SymbolString::parse(const std::string& text, uint16_t m) {
  std::istringstream in(text);
  std::vector<uint16_t> syms;
  long v = 0;
  while (in >> v) {
    if (v < 1 || v > m) throw MalformedFile("symbol out of range: " + std::to_string(v));
    syms.push_back(static_cast<uint16_t>(v));
  }
  if (!in.eof()) throw MalformedFile("symbol string: unparseable token");
  return SymbolString(std::move(syms), m);
}

void SymbolString::push_back(uint16_t sym) {
  if (sym < 1 || sym > m_) throw std::invalid_argument("SymbolString: symbol out of range");
  symbols_.push_back(sym);
}

size_t SymbolString::bits_per_symbol() const {
  size_t b = 1;
  while ((uint32_t{1} << b) < m_) ++b;
  return b;
}

BitString SymbolString::to_bits() const {
  size_t bps = bits_per_symbol();
  BitString r(symbols_.size() * bps);
  for (size_t i = 0; i < symbols_.size(); ++i) {
    uint32_t v = symbols_[i] - 1u;
    for (size_t k = 0; k < bps; ++k)
      if ((v >> k) & 1u) r.set(i * bps + k, true);
  }
  return r;
}

std::string SymbolString::serialize() const {
  std::string out;
  for (size_t i = 0; i < symbols_.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(symbols_[i]);
  }
  return out;
}

std::vector<uint32_t> symbol_mask_positions(const SymbolString& s, uint16_t value) {
  std::vector<uint32_t> pos;
  for (size_t i = 0; i < s.size(); ++i)
    if (s.get(i) == value) pos.push_back(static_cast<uint32_t>(i));
  return pos;
}

void write_bitstring(const std::string& path, const BitString& s, BitFileFormat fmt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MalformedFile("cannot open for write: " + path);
  if (fmt == BitFileFormat::ascii01) {
    out << s.to_ascii01() << '\n';
  } else {
    uint64_t n = s.size();
    uint8_t hdr[8];
    for (int i = 0; i < 8; ++i) hdr[i] = static_cast<uint8_t>(n >> (8 * i));
    out.write(reinterpret_cast<const char*>(hdr), 8);
    auto bytes = s.to_bytes();
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  if (!out) throw MalformedFile("write failed: " + path);
}

BitString read_bitstring(const std::string& path, BitFileFormat fmt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedFile("cannot open: " + path);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (fmt == BitFileFormat::ascii01) return BitString::parse_ascii01(data);
  if (data.size() < 8) throw MalformedFile("packed bitstring: truncated header in " + path);
  uint64_t n = 0;
  for (int i = 0; i < 8; ++i) n |= uint64_t{static_cast<uint8_t>(data[i])} << (8 * i);
  if (data.size() - 8 < (n + 7) / 8) throw MalformedFile("packed bitstring: truncated payload in " + path);
  std::vector<uint8_t> bytes(data.begin() + 8, data.end());
  return BitString::from_bytes(bytes, n);
}

}  // namespace kausal

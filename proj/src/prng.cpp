#include "kausal/prng.hpp"

#include <bit>
#include <cstring>

namespace kausal {

namespace {

constexpr uint64_t kDeriveFlag = uint64_t{1} << 63;

inline uint32_t rotl32(uint32_t v, int r) { return std::rotl(v, r); }

inline void quarter_round(uint32_t& a, uint32_t& b, uint32_t& c, uint32_t& d) {
  a += b; d ^= a; d = rotl32(d, 16);
  c += d; b ^= c; b = rotl32(b, 12);
  a += b; d ^= a; d = rotl32(d, 8);
  c += d; b ^= c; b = rotl32(b, 7);
}

// Original djb layout: constants, key, 64-bit block counter, 64-bit stream id.
void chacha20_block(const std::array<uint8_t, 32>& key, uint64_t counter, uint64_t stream,
                    std::array<uint8_t, 64>& out) {
  uint32_t state[16];
  state[0] = 0x61707865u;
  state[1] = 0x3320646eu;
  state[2] = 0x79622d32u;
  state[3] = 0x6b206574u;
  for (int i = 0; i < 8; ++i) {
    state[4 + i] = uint32_t(key[4 * i]) | uint32_t(key[4 * i + 1]) << 8 | uint32_t(key[4 * i + 2]) << 16 |
                   uint32_t(key[4 * i + 3]) << 24;
  }
  state[12] = static_cast<uint32_t>(counter);
  state[13] = static_cast<uint32_t>(counter >> 32);
  state[14] = static_cast<uint32_t>(stream);
  state[15] = static_cast<uint32_t>(stream >> 32);

  uint32_t x[16];
  std::memcpy(x, state, sizeof(x));
  for (int round = 0; round < 10; ++round) {
    quarter_round(x[0], x[4], x[8], x[12]);
    quarter_round(x[1], x[5], x[9], x[13]);
    quarter_round(x[2], x[6], x[10], x[14]);
    quarter_round(x[3], x[7], x[11], x[15]);
    quarter_round(x[0], x[5], x[10], x[15]);
    quarter_round(x[1], x[6], x[11], x[12]);
    quarter_round(x[2], x[7], x[8], x[13]);
    quarter_round(x[3], x[4], x[9], x[14]);
  }
  for (int i = 0; i < 16; ++i) {
    uint32_t v = x[i] + state[i];
    out[4 * i] = static_cast<uint8_t>(v);
    out[4 * i + 1] = static_cast<uint8_t>(v >> 8);
    out[4 * i + 2] = static_cast<uint8_t>(v >> 16);
    out[4 * i + 3] = static_cast<uint8_t>(v >> 24);
  }
}

int hex_val(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

Seed Seed::from_u64(uint64_t v) {
  Seed s;
  for (int i = 0; i < 8; ++i) s.key[i] = static_cast<uint8_t>(v >> (8 * i));
  return s;
}

Seed Seed::from_hex(const std::string& hex) {
  if (hex.size() != 64) throw MalformedFile("seed hex must be 64 chars");
  Seed s;
  for (int i = 0; i < 32; ++i) {
    int hi = hex_val(hex[2 * i]);
    int lo = hex_val(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw MalformedFile("seed hex: bad digit");
    s.key[i] = static_cast<uint8_t>(hi << 4 | lo);
  }
  return s;
}

std::string Seed::to_hex() const {
  static const char* digits = "0123456789abcdef";
  std::string out(64, '0');
  for (int i = 0; i < 32; ++i) {
    out[2 * i] = digits[key[i] >> 4];
    out[2 * i + 1] = digits[key[i] & 15];
  }
  return out;
}

Seed Seed::derive(uint64_t label) const {
  std::array<uint8_t, 64> block;
  chacha20_block(key, 0, kDeriveFlag | label, block);
  Seed s;
  std::memcpy(s.key.data(), block.data(), 32);
  return s;
}

ChaChaStream::ChaChaStream(const Seed& seed, uint64_t stream_id) : seed_(seed), stream_(stream_id) {}

void ChaChaStream::refill() {
  chacha20_block(seed_.key, counter_, stream_, block_);
  ++counter_;
  pos_ = 0;
}

uint8_t ChaChaStream::next_byte() {
  if (pos_ >= 64) refill();
  return block_[pos_++];
}

uint64_t ChaChaStream::next_u64() {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= uint64_t{next_byte()} << (8 * i);
  return v;
}

bool ChaChaStream::next_bit() {
  if (bit_pos_ >= 8) {
    bit_byte_ = next_byte();
    bit_pos_ = 0;
  }
  return (bit_byte_ >> bit_pos_++) & 1u;
}

uint64_t ChaChaStream::next_below(uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("next_below: zero bound");
  if (bound == 1) return 0;
  // Smallest power-of-two mask covering bound, then reject.
  int bits = 64 - std::countl_zero(bound - 1);
  uint64_t mask = (bits >= 64) ? ~uint64_t{0} : (uint64_t{1} << bits) - 1;
  for (;;) {
    uint64_t v = 0;
    for (int got = 0; got < bits; got += 8) v |= uint64_t{next_byte()} << got;
    v &= mask;
    if (v < bound) return v;
  }
}

BitString random_bits(const Seed& seed, uint64_t stream_id, size_t n) {
  ChaChaStream st(seed, stream_id);
  std::vector<uint8_t> bytes((n + 7) / 8);
  for (auto& b : bytes) b = st.next_byte();
  return BitString::from_bytes(bytes, n);
}

BitString sample_incompressible(size_t n, const Seed& seed) { return random_bits(seed, 0, n); }

SymbolString sample_symbols(size_t n, uint16_t m, const Seed& seed, uint64_t stream_id) {
  ChaChaStream st(seed, stream_id);
  std::vector<uint16_t> syms(n);
  for (auto& s : syms) s = static_cast<uint16_t>(st.next_below(m) + 1);
  return SymbolString(std::move(syms), m);
}

}  // namespace kausal

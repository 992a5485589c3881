#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "kausal/bitstring.hpp"

namespace kausal {

// 256-bit seed for the fixed generator (ChaCha20, djb variant: 64-bit block
// counter + 64-bit stream id). Every random object in the library is a pure
// function of (seed, stream id, position), so runs replay bit-exactly.
struct Seed {
  std::array<uint8_t, 32> key{};

  static Seed from_u64(uint64_t v);        // v little-endian into key[0..8), rest zero
  static Seed from_hex(const std::string& hex);  // 64 hex chars; MalformedFile
  std::string to_hex() const;

  // Independent sub-seed: 32 keystream bytes of stream (1<<63)|label.
  // Stream ids with the top bit set are reserved for derivation.
  Seed derive(uint64_t label) const;

  bool operator==(const Seed& o) const { return key == o.key; }
};

// Sequential keystream reader over one (seed, stream) pair.
class ChaChaStream {
 public:
  ChaChaStream(const Seed& seed, uint64_t stream_id);

  uint8_t next_byte();
  uint64_t next_u64();
  bool next_bit();
  uint64_t next_below(uint64_t bound);  // uniform in [0, bound), rejection sampled

 private:
  void refill();

  Seed seed_;
  uint64_t stream_;
  uint64_t counter_ = 0;
  std::array<uint8_t, 64> block_{};
  size_t pos_ = 64;
  size_t bit_pos_ = 8;  // forces next_bit to fetch a byte first
  uint8_t bit_byte_ = 0;
};

// n keystream bits of the given stream.
BitString random_bits(const Seed& seed, uint64_t stream_id, size_t n);

// Incompressible-by-construction sample: stream 0 of the seed.
BitString sample_incompressible(size_t n, const Seed& seed);

// n uniform symbols of {1..m} from the given stream.
SymbolString sample_symbols(size_t n, uint16_t m, const Seed& seed, uint64_t stream_id);

}  // namespace kausal

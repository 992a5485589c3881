#include "kausal/complexity.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "kausal/errors.hpp"

namespace kausal {

namespace {

constexpr size_t kWindowBytes = size_t{1} << 16;  // byte window over the packed payload
constexpr size_t kMinMatch = 6;                   // bytes; keeps chance matches out of seeded data
constexpr int kMaxChain = 64;
constexpr int kHashBits = 16;

constexpr uint64_t kModeTagBits = 8;

class BitWriter {
 public:
  void put(bool b) {
    if ((len_ & 7) == 0) bytes_.push_back(0);
    if (b) bytes_.back() |= uint8_t(1u << (len_ & 7));
    ++len_;
  }
  void put_bits(uint64_t v, int n) {
    for (int i = 0; i < n; ++i) put((v >> i) & 1u);
  }
  // Elias gamma, v >= 1: bit_width-1 zeros, then v from its top bit down.
  void put_gamma(uint64_t v) {
    int top = std::bit_width(v) - 1;
    for (int i = 0; i < top; ++i) put(false);
    for (int i = top; i >= 0; --i) put((v >> i) & 1u);
  }
  uint64_t bit_size() const { return len_; }
  const std::vector<uint8_t>& bytes() const { return bytes_; }

 private:
  std::vector<uint8_t> bytes_;
  uint64_t len_ = 0;
};

class BitReader {
 public:
  BitReader(const uint8_t* data, size_t n_bytes, size_t start_bit)
      : data_(data), limit_(n_bytes * 8), pos_(start_bit) {}
  bool get() {
    if (pos_ >= limit_) throw MalformedFile("container: token stream overruns data");
    bool b = (data_[pos_ >> 3] >> (pos_ & 7)) & 1u;
    ++pos_;
    return b;
  }
  uint64_t get_bits(int n) {
    uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= uint64_t{get()} << i;
    return v;
  }
  uint64_t get_gamma() {
    int zeros = 0;
    while (!get()) {
      if (++zeros > 63) throw MalformedFile("container: gamma code too long");
    }
    uint64_t v = 1;
    for (int i = 0; i < zeros; ++i) v = v << 1 | uint64_t{get()};
    return v;
  }

 private:
  const uint8_t* data_;
  uint64_t limit_;
  uint64_t pos_;
};

inline uint32_t hash4(const uint8_t* p) {
  uint32_t v;
  std::memcpy(&v, p, 4);
  return (v * 2654435761u) >> (32 - kHashBits);
}

// Greedy hash-chain LZ77 over the payload bytes. Matches may overlap their
// own output (offset < length), matching the decoder's byte-serial copy.
void lz_tokenize(const std::vector<uint8_t>& d, BitWriter& w) {
  const size_t n = d.size();
  std::vector<int32_t> head(size_t{1} << kHashBits, -1);
  std::vector<int32_t> prev(n, -1);

  auto insert = [&](size_t pos) {
    if (pos + 4 <= n) {
      uint32_t h = hash4(&d[pos]);
      prev[pos] = head[h];
      head[h] = static_cast<int32_t>(pos);
    }
  };
  auto flush_literals = [&](size_t from, size_t to) {
    if (from >= to) return;
    w.put(false);
    w.put_gamma(to - from);
    for (size_t q = from; q < to; ++q) w.put_bits(d[q], 8);
  };

  size_t lit_start = 0;
  size_t p = 0;
  while (p < n) {
    size_t best_len = 0;
    size_t best_off = 0;
    if (p + kMinMatch <= n) {
      const size_t limit = n - p;
      int32_t cand = head[hash4(&d[p])];
      int chain = 0;
      while (cand >= 0 && chain++ < kMaxChain) {
        size_t off = p - static_cast<size_t>(cand);
        if (off > kWindowBytes) break;  // chains are position-ordered, older only gets farther
        const uint8_t* a = d.data() + cand;
        const uint8_t* b = d.data() + p;
        size_t len = 0;
        while (len < limit && a[len] == b[len]) ++len;
        if (len >= kMinMatch && len > best_len) {
          best_len = len;
          best_off = off;
          if (len == limit) break;
        }
        cand = prev[static_cast<size_t>(cand)];
      }
    }
    if (best_len >= kMinMatch) {
      flush_literals(lit_start, p);
      w.put(true);
      w.put_bits(best_off - 1, 16);
      w.put_gamma(best_len - kMinMatch + 1);
      for (size_t q = p; q < p + best_len; ++q) insert(q);
      p += best_len;
      lit_start = p;
    } else {
      insert(p);
      ++p;
    }
  }
  flush_literals(lit_start, n);
}

BitWriter tokenize_bits(const BitString& s) {
  BitWriter w;
  lz_tokenize(s.to_bytes(), w);
  return w;
}

uint64_t clamp_value(int64_t raw, uint64_t limit) {
  if (raw < 0) return 0;
  return std::min<uint64_t>(static_cast<uint64_t>(raw), limit);
}

// Byte view of a bit segment, for L-bit block reads with L in {1,2,4,8}.
struct SegmentBytes {
  std::vector<uint8_t> bytes;
  uint32_t block(size_t j, size_t L) const {
    size_t bit = j * L;
    return (bytes[bit >> 3] >> (bit & 7)) & ((1u << L) - 1u);
  }
};

}  // namespace

void Thresholds::validate() const {
  auto in_unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (!in_unit(eps_zero) || !in_unit(eps_incomp) || !in_unit(eps_dep) || n_min < 1)
    throw InvalidConfig("thresholds out of range");
}

uint64_t Compressor::token_bits(const BitString& s) const { return compressed_bits(s) - kContainerHeaderBits; }

uint64_t Compressor::cond_code_bits(const BitString& x, const BitString& y) const {
  // M0: the concat difference. The y-region parse of y‖x is identical to the
  // parse of y alone, so the difference is the token cost of the x region.
  uint64_t best = kModeTagBits + (compressed_bits(y + x) - compressed_bits(y));

  const size_t nx = x.size();
  const size_t ny = y.size();
  if (nx == 0 || ny == 0) return best;
  const size_t k = ny % nx == 0 ? ny / nx : 0;  // 0 = segment modes M1/M3 unavailable

  // M1: xor residual against one aligned segment of y or a xor-combination.
  if (k >= 1 && k <= 4) {
    std::vector<BitString> cands;
    std::vector<BitString> segs;
    for (size_t i = 0; i < k; ++i) segs.push_back(y.slice(i * nx, nx));
    for (const auto& s : segs) cands.push_back(s);
    if (k >= 2) {
      BitString all = segs[0];
      for (size_t i = 1; i < k; ++i) all = bs_xor(all, segs[i]);
      cands.push_back(all);
    }
    if (k == 3) {
      cands.push_back(bs_xor(segs[0], segs[1]));
      cands.push_back(bs_xor(segs[0], segs[2]));
      cands.push_back(bs_xor(segs[1], segs[2]));
    }
    for (const auto& cand : cands) {
      uint64_t cost = kModeTagBits + 8 + token_bits(bs_xor(x, cand));
      best = std::min(best, cost);
    }
  }

  // M4: chained segment table. Subject split into ks equal segments; segment
  // 0 raw-tokenized, segment s > 0 table-coded bitwise with context = the
  // aligned condition blocks plus the earlier subject segments' bits. Sees
  // joint relations between subject halves (e.g. parity tied to the
  // condition) that per-position modes of the whole subject cannot.
  for (size_t ks : {size_t{2}, size_t{4}}) {
    if (nx % ks != 0) continue;
    const size_t ns = nx / ks;
    if (ns == 0 || ny % ns != 0) continue;
    const size_t kc = ny / ns;
    if (kc + ks - 1 > 16) continue;
    std::vector<SegmentBytes> cond(kc);
    for (size_t i = 0; i < kc; ++i) cond[i].bytes = y.slice(i * ns, ns).to_bytes();
    std::vector<SegmentBytes> subj(ks);
    for (size_t s = 0; s < ks; ++s) subj[s].bytes = x.slice(s * ns, ns).to_bytes();
    uint64_t cost = kModeTagBits + 8 + token_bits(x.slice(0, ns));
    for (size_t s = 1; s < ks; ++s) {
      std::vector<int32_t> table(size_t{1} << (kc + s), -1);
      BitString flags;
      uint64_t miss_bits = 0;
      for (size_t j = 0; j < ns; ++j) {
        uint32_t ctx = 0;
        for (size_t i = 0; i < kc; ++i) ctx |= cond[i].block(j, 1) << i;
        for (size_t e = 0; e < s; ++e) ctx |= subj[e].block(j, 1) << (kc + e);
        uint32_t cur = subj[s].block(j, 1);
        int32_t seen = table[ctx];
        if (seen < 0) {
          miss_bits += 1;
        } else {
          flags.push_back(static_cast<uint32_t>(seen) == cur);
          if (static_cast<uint32_t>(seen) != cur) miss_bits += 1;
        }
        table[ctx] = static_cast<int32_t>(cur);
      }
      cost += (flags.empty() ? 0 : token_bits(flags)) + miss_bits;
    }
    best = std::min(best, cost);
  }

  // M3: learned block table, context = the k aligned condition blocks.
  if (k >= 1 && k <= 16) {
    std::vector<SegmentBytes> segs(k);
    for (size_t i = 0; i < k; ++i) segs[i].bytes = y.slice(i * nx, nx).to_bytes();
    SegmentBytes subject{x.to_bytes()};
    for (size_t L : {size_t{1}, size_t{2}, size_t{4}, size_t{8}}) {
      if (nx % L != 0 || k * L > 16) continue;
      const size_t blocks = nx / L;
      std::vector<int32_t> table(size_t{1} << (k * L), -1);
      BitString flags;
      uint64_t miss_bits = 0;
      for (size_t j = 0; j < blocks; ++j) {
        uint32_t ctx = 0;
        for (size_t i = 0; i < k; ++i) ctx |= segs[i].block(j, L) << (i * L);
        uint32_t cur = subject.block(j, L);
        int32_t seen = table[ctx];
        if (seen < 0) {
          miss_bits += L;  // unseen context: always a literal, no flag
        } else {
          flags.push_back(static_cast<uint32_t>(seen) == cur);
          if (static_cast<uint32_t>(seen) != cur) miss_bits += L;
        }
        table[ctx] = static_cast<int32_t>(cur);
      }
      uint64_t cost = kModeTagBits + 16 + (flags.empty() ? 0 : token_bits(flags)) + miss_bits;
      best = std::min(best, cost);
    }
  }
  return best;
}

std::vector<uint8_t> Lz77Compressor::compress(const BitString& s) const {
  BitWriter w = tokenize_bits(s);
  uint64_t n = s.size();
  std::vector<uint8_t> out;
  out.reserve(8 + w.bytes().size());
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(n >> (8 * i)));
  out.insert(out.end(), w.bytes().begin(), w.bytes().end());
  return out;
}

uint64_t Lz77Compressor::compressed_bits(const BitString& s) const {
  return kContainerHeaderBits + tokenize_bits(s).bit_size();
}

BitString Lz77Compressor::decompress(const std::vector<uint8_t>& container) const {
  if (container.size() < 8) throw MalformedFile("container: truncated header");
  uint64_t n = 0;
  for (int i = 0; i < 8; ++i) n |= uint64_t{container[i]} << (8 * i);
  const size_t payload_len = (n + 7) / 8;
  BitReader r(container.data() + 8, container.size() - 8, 0);
  std::vector<uint8_t> out;
  out.reserve(payload_len);
  while (out.size() < payload_len) {
    if (r.get()) {
      size_t off = static_cast<size_t>(r.get_bits(16)) + 1;
      size_t len = static_cast<size_t>(r.get_gamma()) + kMinMatch - 1;
      if (off > out.size()) throw MalformedFile("container: match offset before start");
      if (out.size() + len > payload_len) throw MalformedFile("container: match overruns payload");
      size_t start = out.size() - off;
      for (size_t i = 0; i < len; ++i) out.push_back(out[start + i]);
    } else {
      size_t len = static_cast<size_t>(r.get_gamma());
      if (out.size() + len > payload_len) throw MalformedFile("container: literal run overruns payload");
      for (size_t i = 0; i < len; ++i) out.push_back(static_cast<uint8_t>(r.get_bits(8)));
    }
  }
  return BitString::from_bytes(out, n);
}

ComplexityEstimate estimate_K(const BitString& s, const Compressor& c) {
  if (s.empty()) throw std::invalid_argument("estimate_K: empty string");
  int64_t raw = static_cast<int64_t>(c.compressed_bits(s)) - static_cast<int64_t>(kPlainOverheadBits);
  return ComplexityEstimate{clamp_value(raw, s.size()), s.size(), c.id(), EstimateKind::plain};
}

ComplexityEstimate estimate_K_cond(const BitString& x, const BitString& y, const Compressor& c,
                                   const std::optional<std::vector<uint32_t>>& mask) {
  if (x.empty()) throw std::invalid_argument("estimate_K_cond: empty subject");
  if (mask.has_value()) {
    for (uint32_t pos : *mask)
      if (pos >= x.size()) throw MaskOutOfRange("mask position " + std::to_string(pos) + " >= " + std::to_string(x.size()));
    BitString sub = x.extract(*mask);
    uint64_t value = 0;
    if (!sub.empty()) {
      int64_t raw = static_cast<int64_t>(c.compressed_bits(sub)) - static_cast<int64_t>(kPlainOverheadBits);
      value = clamp_value(raw, sub.size());
    }
    return ComplexityEstimate{value, x.size(), c.id(), EstimateKind::masked_conditional};
  }
  if (y.empty()) {
    ComplexityEstimate e = estimate_K(x, c);
    e.kind = EstimateKind::conditional;
    return e;
  }
  int64_t raw = static_cast<int64_t>(c.cond_code_bits(x, y)) - static_cast<int64_t>(kCondOverheadBits);
  return ComplexityEstimate{clamp_value(raw, x.size()), x.size(), c.id(), EstimateKind::conditional};
}

ComplexityEstimate mutual_info_K(const BitString& x, const BitString& y, const Compressor& c) {
  // symmetric up to coding slack, so take the better-detected direction
  auto drop = [&](const BitString& s, const BitString& cond) -> uint64_t {
    uint64_t plain = estimate_K(s, c).value_bits;
    uint64_t given = estimate_K_cond(s, cond, c).value_bits;
    return plain > given ? plain - given : 0;
  };
  uint64_t v = drop(x, y);
  if (!y.empty()) v = std::max(v, drop(y, x));
  return ComplexityEstimate{v, x.size(), c.id(), EstimateKind::plain};
}

namespace {
void require_length(uint64_t n, const Thresholds& th, const char* what) {
  if (n < th.n_min)
    throw TooShort(std::string(what) + ": n = " + std::to_string(n) + " < n_min = " + std::to_string(th.n_min));
}
}  // namespace

Verdict judge_approx_zero(const ComplexityEstimate& e, const Thresholds& th) {
  require_length(e.n, th, "judge_approx_zero");
  double r = e.ratio();
  return Verdict{r <= th.eps_zero, th.eps_zero - r, false, ""};
}

Verdict judge_incompressible(const ComplexityEstimate& e, const Thresholds& th) {
  require_length(e.n, th, "judge_incompressible");
  double r = e.ratio();
  return Verdict{r >= th.eps_incomp, r - th.eps_incomp, false, ""};
}

Verdict judge_approx_equal(const ComplexityEstimate& a, const ComplexityEstimate& b, const Thresholds& th) {
  require_length(std::min(a.n, b.n), th, "judge_approx_equal");
  double d = std::abs(a.ratio() - b.ratio());
  Verdict v{d <= th.eps_zero, th.eps_zero - d, false, ""};
  if (a.ratio() <= th.eps_zero && b.ratio() <= th.eps_zero) {
    v.indeterminate = true;
    v.note = "both ratios ~0; equality carries no information";
  }
  return v;
}

Verdict judge_independent(const BitString& x, const BitString& y, const Compressor& c, const Thresholds& th) {
  require_length(std::min(x.size(), y.size()), th, "judge_independent");
  ComplexityEstimate info = mutual_info_K(x, y, c);
  double r = info.ratio();
  Verdict v{r <= th.eps_dep, th.eps_dep - r, false, ""};
  if (estimate_K(x, c).ratio() <= th.eps_zero || estimate_K(y, c).ratio() <= th.eps_zero) {
    v.indeterminate = true;
    v.note = "a side is itself ~0; independence carries no information";
  }
  return v;
}

Verdict judge_cond_independent(const BitString& x, const BitString& y, const BitString& z, const Compressor& c,
                               const Thresholds& th) {
  require_length(x.size(), th, "judge_cond_independent");
  ComplexityEstimate with_y = estimate_K_cond(x, z + y, c);
  ComplexityEstimate without = estimate_K_cond(x, z, c);
  return judge_approx_equal(with_y, without, th);
}

ComplexityProfile complexity_profile(const std::vector<size_t>& lengths,
                                     const std::function<BitString(size_t)>& producer, const Compressor& c) {
  if (lengths.size() < 3) throw std::invalid_argument("complexity_profile: need at least 3 lengths");
  ComplexityProfile prof;
  double sn = 0, sv = 0;
  for (size_t n : lengths) {
    BitString s = producer(n);
    if (s.size() != n) throw std::invalid_argument("complexity_profile: producer returned wrong length");
    ComplexityEstimate e = estimate_K(s, c);
    prof.points.push_back(ProfilePoint{n, e.value_bits, e.ratio()});
    sn += static_cast<double>(n);
    sv += static_cast<double>(e.value_bits);
  }
  double mn = sn / static_cast<double>(lengths.size());
  double mv = sv / static_cast<double>(lengths.size());
  double num = 0, den = 0;
  for (const auto& p : prof.points) {
    double dn = static_cast<double>(p.n) - mn;
    num += dn * (static_cast<double>(p.value_bits) - mv);
    den += dn * dn;
  }
  if (den == 0) throw std::invalid_argument("complexity_profile: lengths must not all coincide");
  prof.slope = num / den;
  return prof;
}

}  // namespace kausal

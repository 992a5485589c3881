#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kausal/bitstring.hpp"

namespace kausal {

// Desk-scale surrogates for the asymptotic notions: every "≈ 0" / "≈ n"
// statement is judged against these margins at lengths >= n_min.
struct Thresholds {
  double eps_zero = 0.05;    // ratio at or below which an estimate counts as ~0
  double eps_incomp = 0.90;  // ratio at or above which a string counts as incompressible
  double eps_dep = 0.05;     // mutual-information ratio above which dependence is real
  size_t n_min = 4096;       // judgements below this length raise TooShort

  void validate() const;
};

enum class EstimateKind { plain, conditional, masked_conditional };

struct ComplexityEstimate {
  uint64_t value_bits = 0;
  uint64_t n = 0;  // length of the subject string (not the mask)
  std::string compressor_id;
  EstimateKind kind = EstimateKind::plain;

  double ratio() const { return n == 0 ? 0.0 : static_cast<double>(value_bits) / static_cast<double>(n); }
};

// Fixed container: 8-byte little-endian payload bit count, then the token
// stream. compressed_bits() is the exact (unpadded) container bit length;
// compress() pads the tail byte with zeros. Token grammar in docs/FORMATS.md.
class Compressor {
 public:
  virtual ~Compressor() = default;
  virtual std::string id() const = 0;
  virtual std::vector<uint8_t> compress(const BitString& s) const = 0;
  virtual BitString decompress(const std::vector<uint8_t>& container) const = 0;
  virtual uint64_t compressed_bits(const BitString& s) const = 0;

  // Token bits without the container header; the cost unit for model/mode prices.
  uint64_t token_bits(const BitString& s) const;

  // Shortest conditional code for x given y: minimum over the decodable mode
  // family (concat-difference, xor-aligned residual, learned block table),
  // each charged an 8-bit mode tag. Header-free. Decoder-side y is free.
  uint64_t cond_code_bits(const BitString& x, const BitString& y) const;
};

class Lz77Compressor final : public Compressor {
 public:
  std::string id() const override { return "lz77b"; }
  std::vector<uint8_t> compress(const BitString& s) const override;
  BitString decompress(const std::vector<uint8_t>& container) const override;
  uint64_t compressed_bits(const BitString& s) const override;
};

inline constexpr uint64_t kContainerHeaderBits = 64;
// Fixed costs forgiven before clamping, so that short structured strings
// (e.g. 64 zeros) land at ratio ~0 despite container constants.
inline constexpr uint64_t kPlainOverheadBits = 88;
inline constexpr uint64_t kCondOverheadBits = 24;

// K̂(s) = clamp(container_bits - 88, 0, len). Pre: len >= 1.
ComplexityEstimate estimate_K(const BitString& s, const Compressor& c);

// K̂(x|y). Unmasked: clamp(min-mode bits - 24, 0, len(x)); empty y gives
// exactly estimate_K(x). With a mask: K̂ of the extracted subsequence
// (positions must lie in range — MaskOutOfRange), reported over n = len(x).
ComplexityEstimate estimate_K_cond(const BitString& x, const BitString& y, const Compressor& c,
                                   const std::optional<std::vector<uint32_t>>& mask = std::nullopt);

// I_K(x;y) = max over both directions of max(0, K̂(s) - K̂(s|t)), reported
// over n = len(x); the estimator is one-sided per direction, the true
// quantity symmetric, so the larger drop is the better detection.
ComplexityEstimate mutual_info_K(const BitString& x, const BitString& y, const Compressor& c);

struct Verdict {
  bool value = false;
  double margin = 0.0;  // distance to the deciding threshold, positive = comfortable
  bool indeterminate = false;
  std::string note;
};

// All judges raise TooShort when the subject length is below th.n_min.
Verdict judge_approx_zero(const ComplexityEstimate& e, const Thresholds& th);
Verdict judge_incompressible(const ComplexityEstimate& e, const Thresholds& th);
// |ratio(a) - ratio(b)| <= eps_zero; indeterminate when both ratios are ~0.
Verdict judge_approx_equal(const ComplexityEstimate& a, const ComplexityEstimate& b, const Thresholds& th);
// I_K(x;y)/n <= eps_dep; indeterminate when either side is itself ~0.
Verdict judge_independent(const BitString& x, const BitString& y, const Compressor& c, const Thresholds& th);
// K̂(x | z‖y) ≈ K̂(x | z).
Verdict judge_cond_independent(const BitString& x, const BitString& y, const BitString& z, const Compressor& c,
                               const Thresholds& th);

struct ProfilePoint {
  size_t n = 0;
  uint64_t value_bits = 0;
  double ratio = 0.0;
};

struct ComplexityProfile {
  double slope = 0.0;  // least-squares d(value)/d(n)
  std::vector<ProfilePoint> points;
};

// Pre: at least 3 distinct lengths. producer(n) must return a string of length n.
ComplexityProfile complexity_profile(const std::vector<size_t>& lengths,
                                     const std::function<BitString(size_t)>& producer, const Compressor& c);

}  // namespace kausal

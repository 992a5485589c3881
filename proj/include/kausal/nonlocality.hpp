#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "kausal/complexity.hpp"
#include "kausal/prng.hpp"

namespace kausal {

enum class SystemKind { pr, chained, magic_square };

using Track = std::variant<BitString, SymbolString>;

size_t track_len(const Track& t);
BitString track_bits(const Track& t);  // packed payload used by the estimators

// One bipartite experiment record: per-round inputs (a, b) and outputs (x, y).
// PR: all tracks are bits. chained(m): inputs are {1..m} symbols under the
// promise b ≡ a or a+1 (cyclic), outputs bits. magic_square: inputs {1,2,3},
// outputs {1..4} (the two free bits of the answer row/column, row-major).
struct Quadruple {
  SystemKind kind = SystemKind::pr;
  uint16_t m = 2;  // input alphabet size
  Track a, b, x, y;

  size_t rounds() const { return track_len(a); }
  void validate() const;  // MalformedFile on any broken invariant
};

enum class LocalOpKind { const0, const1, copy, negate, xor_lambda, copy_lambda, and_lambda, or_lambda };

// Deterministic blockwise strategy: per round, f maps (a-block, λ-block) to
// an x-block, g likewise for Bob. Tables are total on their domain.
struct LocalStrategy {
  std::string name;
  uint32_t block_len = 1;
  bool uses_lambda = false;
  std::vector<uint32_t> f_table, g_table;  // indexed by in_block | (λ_block << block_len)
  std::optional<BitString> shared;         // fixed λ; sampled per seed when absent

  static LocalStrategy unary(LocalOpKind f, LocalOpKind g);
  static LocalStrategy from_tables(std::string name, uint32_t block_len, bool uses_lambda,
                                   std::vector<uint32_t> f, std::vector<uint32_t> g);
  void validate(size_t n) const;  // BadBlockAlignment
  uint32_t apply_f(uint32_t in_block, uint32_t lambda_block) const;
  uint32_t apply_g(uint32_t in_block, uint32_t lambda_block) const;
};

struct NonlocalUnbiased {};
struct Biased {
  double p = 0.5;
};
using PrStrategy = std::variant<NonlocalUnbiased, Biased, LocalStrategy>;

struct PrSample {
  Quadruple q;
  BitString lambda;  // empty unless the strategy used one
};

// Inputs are fresh seeded streams; nonlocal_unbiased forces x⊕y = a·b with an
// unbiased x; biased(p) forces the relation with bias-p x; a LocalStrategy
// yields x = f(a,λ), y = g(b,λ) with no relation guarantee.
PrSample gen_pr(size_t n, const Seed& seed, const PrStrategy& strategy);

struct HiddenVariable {
  BitString lambda;
};

struct RelationCheck {
  size_t ok_count = 0;
  std::vector<uint32_t> violations;
  double violation_fraction(size_t rounds) const {
    return rounds == 0 ? 0.0 : static_cast<double>(violations.size()) / static_cast<double>(rounds);
  }
};

// Exact per-round predicate: PR x⊕y = a·b; chained x⊕y = χ_{a=m,b=1}; magic
// square row/column agreement at the intersection cell.
RelationCheck check_relation(const Quadruple& q);

struct NoSignalingReport {
  Verdict alice;  // K̂(x|a) ≈ K̂(x|ab)
  Verdict bob;    // K̂(y|b) ≈ K̂(y|ab)
  Verdict overall;
  ComplexityEstimate x_given_a, x_given_ab, y_given_b, y_given_ab;
};

NoSignalingReport test_no_signaling(const Quadruple& q, const Thresholds& th, const Compressor& c);

enum class LocalityStatus { local, not_certified };

struct LocalityReport {
  LocalityStatus status = LocalityStatus::not_certified;
  std::string certificate;  // "supplied-lambda", "trivial-inputs", "trivial-outputs" or "outputs-as-lambda"
  Verdict independence;     // λ independent of (a,b)
  Verdict x_cond;           // K̂(x|a‖λ) ≈ 0
  Verdict y_cond;           // K̂(y|b‖λ) ≈ 0
};

// With λ: judges the full certificate. Without: tries only the two sufficient
// conditions (inputs ≈ 0, or outputs ≈ 0 via λ := (x,y)); "not_certified" is
// not a proof of non-locality.
LocalityReport test_locality(const Quadruple& q, const std::optional<HiddenVariable>& lambda, const Thresholds& th,
                             const Compressor& c);

struct PrParallelResult {
  int rounds = 0;
  uint32_t best_count = 0;      // max satisfied input pairs over deterministic (f,g)
  uint64_t pairs_checked = 0;   // strategy pairs enumerated
};

// Exhaustive maximum of #{(a,b): f(a)⊕g(b) = a·b} over all blockwise
// deterministic strategies; r > 2 raises TooLarge.
PrParallelResult pr_parallel_value(int r);
PrParallelResult pr_parallel_value_serial(int r);

// a uniform on {1..m}; b uniform on the promise pair {a, a+1 (cyclic)};
// x unbiased; y = x ⊕ χ except at an error_rate fraction of seeded rounds
// (default 1/m²).
Quadruple gen_chained(size_t n, uint16_t m, const Seed& seed, std::optional<double> error_rate = std::nullopt);

// χ_i = 1 iff a_i = m and b_i = 1. Pre: equal lengths, same alphabet.
BitString chained_indicator(const SymbolString& a, const SymbolString& b);

enum class MagicStrategy { consistent_per_round, best_deterministic };

Quadruple gen_magic_square(size_t n, const Seed& seed, MagicStrategy strategy);

struct MagicSquareValue {
  uint32_t wins = 0;  // out of the 9 input pairs
  std::array<uint8_t, 3> alice_table{};  // symbol per row input
  std::array<uint8_t, 3> bob_table{};    // symbol per column input
};

// Exact classical value by exhaustive search over all 64×64 deterministic
// strategy tables.
MagicSquareValue magic_square_value();

// One-line JSON header (kind, m, n, plus caller metadata), then the four
// tracks, one line each: ascii01 for bits, space-separated for symbols.
void write_quadruple(const std::string& path, const Quadruple& q,
                     const std::vector<std::pair<std::string, std::string>>& meta = {});
Quadruple read_quadruple(const std::string& path);

// The deterministic strategies exercised by the local-collapse property.
std::vector<LocalStrategy> bundled_local_strategies();

}  // namespace kausal

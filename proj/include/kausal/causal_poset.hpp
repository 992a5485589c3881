#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kausal/complexity.hpp"
#include "kausal/prng.hpp"

namespace kausal {

struct NamedString {
  std::string name;
  BitString bits;
};

// Pairwise verdicts of the inferred order. x precedes y ⟺ K̂(x|y) ≈ 0 and
// not conversely: the effect retains enough to reconstruct its cause.
enum class CausalRelation { precedes, succeeds, equivalent, spacelike, indeterminate };

const char* relation_name(CausalRelation r);

struct TransitivityViolation {
  uint32_t i, j, k;  // i ⪯ j and j ⪯ k held, i ⪯ k did not
};

// Estimated order on a finite set of named strings. Subjects enter the
// estimator at their stored length (each string is the finite prefix of a
// notional unbounded one); conditions always enter whole. Violations of
// transitivity are recorded verbatim — never repaired by closure, since a
// closure would assert causal links the estimates do not support.
struct CausalPoset {
  std::vector<NamedString> elements;
  std::vector<std::vector<CausalRelation>> relation;  // [subject][condition]
  std::vector<std::vector<double>> cond_ratio;        // K̂(i|j) / len(i)
  std::vector<std::vector<double>> margins;           // approx-zero margin of K̂(i|j)
  Thresholds thresholds;
  std::vector<TransitivityViolation> violations;

  size_t size() const { return elements.size(); }
  size_t index_of(const std::string& name) const;  // std::invalid_argument if absent
  bool leq(size_t i, size_t j) const;              // precedes or equivalent
};

// Pairwise estimation is data-parallel; assembly is deterministic given the
// estimate matrix, so both entry points return identical posets.
CausalPoset build_poset(const std::vector<NamedString>& c, const Thresholds& th, const Compressor& comp);
CausalPoset build_poset_serial(const std::vector<NamedString>& c, const Thresholds& th, const Compressor& comp);

// Least upper bound (first common effect) / greatest lower bound (last
// common cause) of the subset, on equivalence classes collapsed via the
// `equivalent` entries; the representative is the lexicographically first
// name of the winning class. Returns nullopt when no bound exists in C.
// OrderInconsistent when a recorded transitivity violation lies entirely
// inside the classes the bound would be computed from.
std::optional<std::string> common_effect(const CausalPoset& p, const std::vector<std::string>& subset);
std::optional<std::string> common_cause(const CausalPoset& p, const std::vector<std::string>& subset);

struct ExtremesReport {
  std::optional<std::string> big_bang;    // unique smallest class, if any
  std::optional<std::string> big_crunch;  // unique greatest class, if any
  std::vector<std::string> causeless, effectless;  // element names, element order
};

ExtremesReport detect_extremes(const CausalPoset& p);

enum class DeterminismClass { deterministic, probabilistic };

struct DeterminismReport {
  DeterminismClass cls = DeterminismClass::deterministic;
  std::vector<std::string> witnesses;  // elements not ≈0-computable from their strict causes
};

// For every element with at least one strict cause, judges K̂(y | all strict
// causes concatenated in element order) ≈ 0; deterministic iff all pass.
// Elements without causes are vacuously fine.
DeterminismReport classify_determinism(const CausalPoset& p, const Compressor& comp);

enum class TrivialityStatus { confirmed, counterexample, skipped };

struct TrivialityReport {
  TrivialityStatus status = TrivialityStatus::skipped;
  std::string note;
  std::vector<std::pair<std::string, std::string>> counterexamples;  // non-equivalent pairs
  double worst_margin = 0.0;  // most negative approx-zero margin over checked pairs
};

// "Deterministic and has a big bang ⇒ every pair is equivalent." Skipped
// (with the unmet hypothesis named) unless the poset is deterministic and a
// big bang exists; counterexamples indicate threshold noise and are reported
// with their margins rather than suppressed.
TrivialityReport check_triviality(const CausalPoset& p, const Compressor& comp);

struct CausalDistance {
  std::string from, to;
  uint64_t value_bits = 0;  // K̂(to | from): how far `to` lies from from's effects
};

CausalDistance causal_distance(const NamedString& from, const NamedString& to, const Thresholds& th,
                               const Compressor& comp);

// Report sinks: a JSON document (elements, matrix, margins, violations) and
// a DOT digraph (precedes as arrows, equivalence as dashed double edges).
void write_poset_json(const std::string& path, const CausalPoset& p);
void write_poset_dot(const std::string& path, const CausalPoset& p);

// Seeded deterministic-with-big-bang instances for the triviality property.
// Each set uses exactly one construction family — xor with low-complexity
// periodic masks, word-aligned rotations, or extension by own prefixes — so
// every pair within a set is equivalent by construction. n must be a
// multiple of 64 and at least 512.
std::vector<std::vector<NamedString>> triviality_corpus(size_t sets, size_t n, const Seed& seed);

}  // namespace kausal

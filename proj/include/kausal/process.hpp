#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kausal/bitstring.hpp"
#include "kausal/complexity.hpp"
#include "kausal/errors.hpp"
#include "kausal/prng.hpp"

namespace kausal {

// The four universal local operations a party can apply to its one-bit input
// each round. The enum value is the op's truth table: bit 1 is the output on
// input 0, bit 0 the output on input 1. A control pair (c0, c1) therefore
// decodes as the op with value (c0 << 1) | c1: (0,0) const0, (0,1) identity,
// (1,0) negation, (1,1) const1.
enum class LocalOpChoice : uint8_t { const0 = 0b00, id = 0b01, neg = 0b10, const1 = 0b11 };

inline bool apply_local_op(LocalOpChoice op, bool in) {
  return ((static_cast<uint8_t>(op) >> (in ? 0 : 1)) & 1) != 0;
}
const char* local_op_name(LocalOpChoice op);
inline LocalOpChoice op_from_control(bool c0, bool c1) {
  return static_cast<LocalOpChoice>((c0 ? 2 : 0) | (c1 ? 1 : 0));
}

// Round-wise local operation: P_C holds one control pair per round and selects
// which of the four ops maps P_I[r] to the output bit. len(P_C) = 2 len(P_I).
BitString universal_local_op(const BitString& P_C, const BitString& P_I);

// One party of a scenario run. A_I precedes A_O within the party; both have
// one bit per round.
struct Party {
  std::string name;
  BitString A_I;
  BitString A_O;
  BitString control;                          // P_C, 2 bits per round
  std::vector<LocalOpChoice> local_relation;  // per-round op decoded from control

  size_t rounds() const { return A_I.size(); }
};

// A bit-wise global relation on k parties: applied independently each round,
// it maps the k output bits to the k input bits. Party p owns bit p of both
// vectors (party 0 in the least significant position), so table[o] is the
// input vector produced when the joint output vector is o.
struct GlobalRelation {
  uint32_t k = 0;
  std::vector<uint8_t> table;  // 2^k entries, each a k-bit input vector

  void validate() const;  // k in [1,8], table complete, entries in range
};

// Bundled relations.
GlobalRelation one_way_channel();    // f(x,y) = (0, x): a sender feeding a receiver
GlobalRelation two_way_swap();       // g(x,y) = (y, x): both parties feed each other
GlobalRelation cyclic_inhibition();  // three parties: x = !b & c, y = a & !c, z = !a & b

// Census order: relation `index` has table[o] = digit o of index in base 2^k.
GlobalRelation relation_from_index(uint32_t k, uint64_t index);
uint64_t relation_index(const GlobalRelation& g);

// Exact fixed-point set {o : local(combo, g(o)) = o}, ascending, by exhaustive
// enumeration of all 2^k candidate output vectors.
std::vector<uint8_t> fixed_points(const GlobalRelation& g, const std::vector<LocalOpChoice>& combo);

// Exhaustive consistency check over all 4^k local-op combinations. Combo c
// assigns party p the op (c >> 2p) & 3.
struct ConsistencyVerdict {
  bool consistent = false;             // every combo has at least one fixed point
  bool deterministic_process = false;  // every combo has exactly one fixed point
  std::vector<std::vector<uint8_t>> per_combo;            // 4^k fixed-point sets
  std::vector<std::vector<LocalOpChoice>> failing_combos;  // combos with none, ascending
};
ConsistencyVerdict check_logical_consistency(const GlobalRelation& g, uint32_t max_parties = 8);

// Executes `rounds` repetitions of a consistent relation. Each party's control
// string is an independent incompressible sample from the seed; each round
// realizes the fixed point of the drawn op combo, selecting uniformly (from a
// dedicated seed stream) when several exist. Refuses inconsistent relations
// with InconsistentRelation; default party names are "A", "B", ...
std::vector<Party> run_scenario(const GlobalRelation& g, const Seed& seed, size_t rounds,
                                const std::vector<std::string>& names = {});

// Pairwise causal verdicts between parties plus group-past sets. pair[i][j]
// answers "is i in the causal past of j": j's input must not be approximately
// computable (ratio above eps_zero) and conditioning on i's output must drop
// its estimate by at least eps_dep per round. margin[i][j] is the smaller
// slack of the two conditions; entries within a tenth of eps_dep of the
// boundary are reported indeterminate. group_past[t] lists every subset of
// the other parties (as sorted indices) whose concatenated outputs — in party
// name order — satisfy the same two conditions for target t.
enum class PairwiseCausal { precedes, not_precedes, indeterminate };

struct CausalRelationMatrix {
  std::vector<std::string> names;
  size_t rounds = 0;
  std::vector<std::vector<PairwiseCausal>> pair;
  std::vector<std::vector<double>> margin;
  std::vector<std::vector<std::vector<size_t>>> group_past;
};
CausalRelationMatrix derive_causal_relations(const std::vector<Party>& parties, const Thresholds& th,
                                             const Compressor& c);

// A scenario is causal when at least one party has no incoming group-past
// relation; otherwise every party sits in the causal future of some party set.
enum class ScenarioClass { causal, non_causal };
const char* scenario_class_name(ScenarioClass s);
ScenarioClass classify_scenario(const CausalRelationMatrix& m);

// Exact classification of one relation: consistency by exhaustive fixed-point
// check; causal structure from the idealized per-round distribution (uniform
// ops, uniform fixed-point choice) using exact integer weights, so a party set
// precedes a target iff the target's input bit is non-constant and exactly
// correlated with the set's outputs. This is the infinite-round limit of
// derive_causal_relations.
enum class RelationClass { inconsistent, consistent_causal, consistent_non_causal };
const char* relation_class_name(RelationClass r);
RelationClass classify_relation(const GlobalRelation& g);

// Full census of every bit-wise relation on k parties (k <= 3; k = 3 walks
// 2^24 relations). Exemplars are the lowest-index relation of each class.
struct CensusExemplar {
  uint64_t index = 0;
  GlobalRelation relation;
};
struct CensusReport {
  uint32_t k = 0;
  uint64_t total = 0;
  uint64_t inconsistent = 0;
  uint64_t consistent_causal = 0;
  uint64_t consistent_non_causal = 0;
  uint64_t consistent_probabilistic = 0;  // consistent relations with a multi-point combo
  std::optional<CensusExemplar> exemplar_inconsistent;
  std::optional<CensusExemplar> exemplar_causal;
  std::optional<CensusExemplar> exemplar_non_causal;
};
CensusReport census(uint32_t k);         // parallel when built with OpenMP
CensusReport census_serial(uint32_t k);  // reference implementation

// JSON truth table {k, rows: output vector -> input vector}; vectors are
// binary strings with party 0 first.
void write_relation_json(const GlobalRelation& g, const std::string& path);
GlobalRelation read_relation_json(const std::string& path);

// One CSV row per class: class, count, exemplar index, exemplar table
// ('|'-joined inputs in output order), exemplar fixed points per combo.
void write_census_csv(const CensusReport& r, const std::string& path);

}  // namespace kausal

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kausal/complexity.hpp"
#include "kausal/prng.hpp"

namespace kausal {

enum class GateKind { not_gate, cnot, toffoli };

// Self-inverse reversible gates; control/target indices must be distinct.
struct Gate {
  GateKind kind = GateKind::not_gate;
  uint32_t a = 0, b = 0, c = 0;  // NOT: target a. CNOT: control a, target b. TOFFOLI: controls a,b, target c.

  static Gate make_not(uint32_t target);
  static Gate make_cnot(uint32_t control, uint32_t target);
  static Gate make_toffoli(uint32_t c1, uint32_t c2, uint32_t target);
  uint32_t max_index() const;
  bool operator==(const Gate& o) const { return kind == o.kind && a == o.a && b == o.b && c == o.c; }
};

void apply_gate(BitString& tape, const Gate& g);
uint64_t apply_gate_word(uint64_t tape, const Gate& g);  // width ≤ 64 fast path

// Whole-program application without snapshots (bulk property tests).
BitString apply_program(BitString tape, const std::vector<Gate>& program);
uint64_t apply_program_word(uint64_t tape, const std::vector<Gate>& program);
uint64_t apply_inverse_word(uint64_t tape, const std::vector<Gate>& program);

// Fixed-width tape, gate program, application history. Every gate is its
// own inverse, so invert() replays the history backwards and restores the
// initial tape exactly; the tape length never changes.
struct ReversibleMachine {
  ReversibleMachine(BitString tape, std::vector<Gate> program);  // GateIndexOutOfRange

  void step();                  // apply program[pc], log it, advance
  bool done() const { return pc >= program.size(); }
  std::vector<BitString> run();  // to completion; trace[t] = tape after t steps (trace[0] = start)
  void invert();                 // undo the logged history, reset pc

  BitString tape;
  std::vector<Gate> program;
  size_t pc = 0;
  std::vector<Gate> history;
};

std::vector<Gate> random_program(size_t gates, size_t width, const Seed& seed, uint64_t stream);

struct FuelReport {
  size_t len_S = 0;
  uint64_t lower_bound_bits = 0;  // len(S) − helper-compressed length, clipped to [0, len(S)]
  uint64_t upper_bound_bits = 0;  // len(S) − K̂(S|X)
  size_t extracted_zeros = 0;     // filled by a constructive run, 0 otherwise
  double work_per_bit_joules = 0.0;
  double lower_bound_joules = 0.0;
  double upper_bound_joules = 0.0;
};

// Extractable-zeros bounds: compression with helper X gives the achievable
// lower bound, the conditional estimate the information-theoretic upper one.
FuelReport fuel_bounds(const BitString& S, const BitString& X, const Compressor& c, double temperature = 300.0);

struct BennettResult {
  BitString final_tape;       // S-region zeroed, X and scratch restored
  size_t extracted_zeros = 0;
  size_t transcript_gates = 0;  // forward + xor + uncompute steps, all reversible
};

// Tape layout [S | X | copy | scratch]; the generator program may address
// anything except the S region and must leave a copy of S in the copy
// region. The copy is XORed onto S (zeroing it), then the generator is
// uncomputed, restoring X, copy and scratch. A wrong copy raises
// GeneratorMismatch after restoring the tape.
BennettResult bennett_extract(const BitString& S, const BitString& X, const std::vector<Gate>& generator,
                              size_t scratch_bits = 0);

struct SecondLawViolation {
  size_t t1 = 0, t2 = 0;
  uint64_t k1 = 0, k2 = 0;
  double allowance = 0.0;  // slope·log2(t2−t1) + slack
  double excess = 0.0;     // k1 − k2 − allowance, positive = violation
};

struct SecondLawReport {
  size_t pairs_checked = 0;
  std::vector<uint64_t> complexities;  // K̂ per snapshot
  std::vector<SecondLawViolation> violations;
  double worst_excess = 0.0;  // max over all pairs, ≤ 0 when clean
};

// Checks K̂(tape_t1) ≤ K̂(tape_t2) + slope·log2(t2−t1) + slack for all t1<t2.
SecondLawReport second_law_audit(const std::vector<BitString>& trace, const Compressor& c, double slope = 8.0,
                                 double slack = 128.0);

struct LandauerLedger {
  int64_t delta_bits = 0;  // K̂(A) − K̂(B); positive = minimum cost of A→B
  double kT_ln2_joules = 0.0;
  double joules = 0.0;
};

LandauerLedger landauer_ledger(const BitString& a, const BitString& b, const Compressor& c,
                               double temperature = 300.0);

// Restricted model family standing in for arbitrary finite sets: every
// member has an explicit description cost and exact log-cardinality, making
// the structure function total and reproducible.
struct ModelSpec {
  std::string family;  // constant | full_cube | prefix_cylinder | suffix_cylinder | hamming_shell | run_profile
  BitString witness;   // constant: the string itself; cylinders: the fixed bits
  size_t param = 0;    // cylinders: fixed length; shell: weight
};

bool model_contains(const ModelSpec& m, const BitString& s, size_t n);
double model_cost_bits(const ModelSpec& m, size_t n, const Compressor& c);
double model_log2_size(const ModelSpec& m, size_t n);
std::vector<ModelSpec> default_model_registry(const BitString& s);

struct StructurePoint {
  double k = 0.0;         // description budget (bits)
  double log2_size = 0.0; // best covering model cardinality within the budget
};

struct StructureFunction {
  std::vector<StructurePoint> points;  // pruned staircase, increasing k
  double k0 = 0.0;                     // sufficiency point (first slope ≥ −1−tol)
  ModelSpec macrostate;
  double macrostate_cost_bits = 0.0;
  double macrostate_log2_size = 0.0;
  double fuel_bound_bits = 0.0;  // n − cost − log_size at the macrostate
  uint64_t khat_bits = 0;        // K̂(S), for the k0 + log|M| cross-check
};

StructureFunction structure_function(const BitString& s, const Compressor& c);
StructureFunction structure_function(const BitString& s, const Compressor& c,
                                     const std::vector<ModelSpec>& registry);

// 1-D two-species mixing demo: start 0…01…1, seeded adjacent swaps, one
// snapshot every `stride` swaps (snapshot 0 is the initial state).
std::vector<BitString> mixing_automaton(size_t n, size_t steps, size_t stride, const Seed& seed);

}  // namespace kausal

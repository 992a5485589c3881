#include "kausal/reversible.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace kausal {

namespace {

constexpr double kBoltzmann = 1.380649e-23;  // J/K
constexpr double kSlopeTol = 0.1;            // sufficiency: forward slope ≥ −1−tol

double ln2() { return 0.6931471805599453; }

uint32_t ceil_log2(uint64_t v) {
  uint32_t b = 0;
  while ((uint64_t{1} << b) < v) ++b;
  return b;
}

void check_distinct(const Gate& g) {
  bool ok = true;
  if (g.kind == GateKind::cnot) ok = g.a != g.b;
  if (g.kind == GateKind::toffoli) ok = g.a != g.b && g.a != g.c && g.b != g.c;
  if (!ok) throw std::invalid_argument("gate indices must be distinct");
}

std::vector<size_t> run_lengths(const BitString& s) {
  std::vector<size_t> runs;
  size_t len = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    ++len;
    if (i + 1 == s.size() || s.get(i + 1) != s.get(i)) {
      runs.push_back(len);
      len = 0;
    }
  }
  return runs;
}

std::map<size_t, size_t> run_profile(const BitString& s) {
  std::map<size_t, size_t> prof;
  for (size_t r : run_lengths(s)) ++prof[r];
  return prof;
}

double log2_binomial(uint64_t n, uint64_t w) {
  if (w > n) return 0.0;
  return (std::lgamma(double(n) + 1) - std::lgamma(double(w) + 1) - std::lgamma(double(n - w) + 1)) / ln2();
}

double log2_multinomial(const std::map<size_t, size_t>& counts) {
  size_t total = 0;
  for (const auto& [len, cnt] : counts) total += cnt;
  double v = std::lgamma(double(total) + 1);
  for (const auto& [len, cnt] : counts) v -= std::lgamma(double(cnt) + 1);
  return v / ln2();
}

}  // namespace

Gate Gate::make_not(uint32_t target) { return Gate{GateKind::not_gate, target, 0, 0}; }

Gate Gate::make_cnot(uint32_t control, uint32_t target) {
  Gate g{GateKind::cnot, control, target, 0};
  check_distinct(g);
  return g;
}

Gate Gate::make_toffoli(uint32_t c1, uint32_t c2, uint32_t target) {
  Gate g{GateKind::toffoli, c1, c2, target};
  check_distinct(g);
  return g;
}

uint32_t Gate::max_index() const {
  switch (kind) {
    case GateKind::not_gate: return a;
    case GateKind::cnot: return std::max(a, b);
    case GateKind::toffoli: return std::max(a, std::max(b, c));
  }
  return a;
}

void apply_gate(BitString& tape, const Gate& g) {
  switch (g.kind) {
    case GateKind::not_gate: tape.flip(g.a); break;
    case GateKind::cnot:
      if (tape.get(g.a)) tape.flip(g.b);
      break;
    case GateKind::toffoli:
      if (tape.get(g.a) && tape.get(g.b)) tape.flip(g.c);
      break;
  }
}

uint64_t apply_gate_word(uint64_t tape, const Gate& g) {
  switch (g.kind) {
    case GateKind::not_gate: return tape ^ (uint64_t{1} << g.a);
    case GateKind::cnot: return tape ^ (((tape >> g.a) & 1u) << g.b);
    case GateKind::toffoli: return tape ^ ((((tape >> g.a) & (tape >> g.b)) & 1u) << g.c);
  }
  return tape;
}

BitString apply_program(BitString tape, const std::vector<Gate>& program) {
  for (const Gate& g : program) apply_gate(tape, g);
  return tape;
}

uint64_t apply_program_word(uint64_t tape, const std::vector<Gate>& program) {
  for (const Gate& g : program) tape = apply_gate_word(tape, g);
  return tape;
}

uint64_t apply_inverse_word(uint64_t tape, const std::vector<Gate>& program) {
  for (auto it = program.rbegin(); it != program.rend(); ++it) tape = apply_gate_word(tape, *it);
  return tape;
}

ReversibleMachine::ReversibleMachine(BitString t, std::vector<Gate> prog)
    : tape(std::move(t)), program(std::move(prog)) {
  for (const Gate& g : program) {
    check_distinct(g);
    if (g.max_index() >= tape.size())
      throw GateIndexOutOfRange("gate index " + std::to_string(g.max_index()) + " on a " +
                                std::to_string(tape.size()) + "-bit tape");
  }
}

void ReversibleMachine::step() {
  if (done()) return;
  apply_gate(tape, program[pc]);
  history.push_back(program[pc]);
  ++pc;
}

std::vector<BitString> ReversibleMachine::run() {
  std::vector<BitString> trace;
  trace.push_back(tape);
  while (!done()) {
    step();
    trace.push_back(tape);
  }
  return trace;
}

void ReversibleMachine::invert() {
  for (auto it = history.rbegin(); it != history.rend(); ++it) apply_gate(tape, *it);
  history.clear();
  pc = 0;
}

std::vector<Gate> random_program(size_t gates, size_t width, const Seed& seed, uint64_t stream) {
  if (width < 1) throw std::invalid_argument("random_program: width must be positive");
  ChaChaStream st(seed, stream);
  auto below = [&](uint64_t m) { return static_cast<uint32_t>(st.next_below(m)); };
  std::vector<Gate> prog;
  prog.reserve(gates);
  uint64_t kinds = width >= 3 ? 3 : width;  // narrow tapes fall back to the gates that fit
  for (size_t i = 0; i < gates; ++i) {
    switch (below(kinds)) {
      case 0: prog.push_back(Gate::make_not(below(width))); break;
      case 1: {
        uint32_t c = below(width), t = below(width);
        while (t == c) t = below(width);
        prog.push_back(Gate::make_cnot(c, t));
        break;
      }
      default: {
        uint32_t c1 = below(width), c2 = below(width), t = below(width);
        while (c2 == c1) c2 = below(width);
        while (t == c1 || t == c2) t = below(width);
        prog.push_back(Gate::make_toffoli(c1, c2, t));
        break;
      }
    }
  }
  return prog;
}

FuelReport fuel_bounds(const BitString& S, const BitString& X, const Compressor& c, double temperature) {
  if (S.empty()) throw std::invalid_argument("fuel_bounds: S must be nonempty");
  FuelReport r;
  r.len_S = S.size();
  uint64_t helper_bits = X.empty() ? c.compressed_bits(S) : c.cond_code_bits(S, X);
  r.lower_bound_bits = helper_bits >= S.size() ? 0 : S.size() - helper_bits;
  uint64_t khat = estimate_K_cond(S, X, c).value_bits;
  r.upper_bound_bits = S.size() - khat;  // khat is clamped to len(S)
  r.work_per_bit_joules = kBoltzmann * temperature * ln2();
  r.lower_bound_joules = double(r.lower_bound_bits) * r.work_per_bit_joules;
  r.upper_bound_joules = double(r.upper_bound_bits) * r.work_per_bit_joules;
  return r;
}

BennettResult bennett_extract(const BitString& S, const BitString& X, const std::vector<Gate>& generator,
                              size_t scratch_bits) {
  size_t ns = S.size(), nx = X.size();
  if (ns == 0) throw std::invalid_argument("bennett_extract: S must be nonempty");
  size_t total = ns + nx + ns + scratch_bits;
  for (const Gate& g : generator) {
    check_distinct(g);
    if (g.max_index() >= total)
      throw GateIndexOutOfRange("generator gate index " + std::to_string(g.max_index()) + " on a " +
                                std::to_string(total) + "-bit tape");
    uint32_t lo = g.a;
    if (g.kind == GateKind::cnot) lo = std::min(g.a, g.b);
    if (g.kind == GateKind::toffoli) lo = std::min(g.a, std::min(g.b, g.c));
    if (lo < ns) throw std::invalid_argument("bennett_extract: generator may not address the fuel region");
  }

  BitString tape = S + X + BitString(ns + scratch_bits);
  BennettResult res;
  for (const Gate& g : generator) {
    apply_gate(tape, g);
    ++res.transcript_gates;
  }
  BitString copy = tape.slice(ns + nx, ns);
  if (!(copy == S)) {
    for (auto it = generator.rbegin(); it != generator.rend(); ++it) apply_gate(tape, *it);
    throw GeneratorMismatch("generator produced a copy that differs from S; tape restored");
  }
  for (size_t i = 0; i < ns; ++i) {
    apply_gate(tape, Gate::make_cnot(static_cast<uint32_t>(ns + nx + i), static_cast<uint32_t>(i)));
    ++res.transcript_gates;
  }
  for (auto it = generator.rbegin(); it != generator.rend(); ++it) {
    apply_gate(tape, *it);
    ++res.transcript_gates;
  }
  res.final_tape = std::move(tape);
  res.extracted_zeros = ns;
  return res;
}

SecondLawReport second_law_audit(const std::vector<BitString>& trace, const Compressor& c, double slope,
                                 double slack) {
  SecondLawReport rep;
  size_t T = trace.size();
  rep.complexities.resize(T);
#ifdef KAUSAL_OPENMP
  #pragma omp parallel for schedule(dynamic)
#endif
  for (int64_t t = 0; t < static_cast<int64_t>(T); ++t)
    rep.complexities[static_cast<size_t>(t)] = estimate_K(trace[static_cast<size_t>(t)], c).value_bits;

  rep.worst_excess = -1e300;
  for (size_t t1 = 0; t1 < T; ++t1)
    for (size_t t2 = t1 + 1; t2 < T; ++t2) {
      ++rep.pairs_checked;
      double allowance = slope * std::log2(double(t2 - t1)) + slack;
      double excess = double(rep.complexities[t1]) - double(rep.complexities[t2]) - allowance;
      rep.worst_excess = std::max(rep.worst_excess, excess);
      if (excess > 0.0)
        rep.violations.push_back({t1, t2, rep.complexities[t1], rep.complexities[t2], allowance, excess});
    }
  if (rep.pairs_checked == 0) rep.worst_excess = 0.0;
  return rep;
}

LandauerLedger landauer_ledger(const BitString& a, const BitString& b, const Compressor& c, double temperature) {
  LandauerLedger l;
  uint64_t ka = a.empty() ? 0 : estimate_K(a, c).value_bits;
  uint64_t kb = b.empty() ? 0 : estimate_K(b, c).value_bits;
  l.delta_bits = static_cast<int64_t>(ka) - static_cast<int64_t>(kb);
  l.kT_ln2_joules = kBoltzmann * temperature * ln2();
  l.joules = double(l.delta_bits) * l.kT_ln2_joules;
  return l;
}

bool model_contains(const ModelSpec& m, const BitString& s, size_t n) {
  if (s.size() != n) return false;
  if (m.family == "full_cube") return true;
  if (m.family == "constant") return s == m.witness;
  if (m.family == "prefix_cylinder") return m.param <= n && s.prefix(m.param) == m.witness;
  if (m.family == "suffix_cylinder") return m.param <= n && s.slice(n - m.param, m.param) == m.witness;
  if (m.family == "hamming_shell") return s.weight() == m.param;
  if (m.family == "run_profile") return run_profile(s) == run_profile(m.witness);
  throw std::invalid_argument("unknown model family " + m.family);
}

double model_cost_bits(const ModelSpec& m, size_t n, const Compressor& c) {
  double tag = 8.0, nbits = double(ceil_log2(n + 1));
  if (m.family == "full_cube") return tag + nbits;
  if (m.family == "constant") return tag + double(estimate_K(m.witness, c).value_bits);
  if (m.family == "prefix_cylinder" || m.family == "suffix_cylinder") {
    double fixed = m.param == 0 ? 0.0 : double(estimate_K(m.witness, c).value_bits);
    return tag + nbits + fixed;
  }
  if (m.family == "hamming_shell") return tag + 2.0 * nbits;
  if (m.family == "run_profile") return tag + 2.0 * nbits * double(run_profile(m.witness).size());
  throw std::invalid_argument("unknown model family " + m.family);
}

double model_log2_size(const ModelSpec& m, size_t n) {
  if (m.family == "full_cube") return double(n);
  if (m.family == "constant") return 0.0;
  if (m.family == "prefix_cylinder" || m.family == "suffix_cylinder") return double(n - m.param);
  if (m.family == "hamming_shell") return log2_binomial(n, m.param);
  if (m.family == "run_profile") {
    // distinct orderings of the run multiset; the first run's bit value is free
    return log2_multinomial(run_profile(m.witness)) + 1.0;
  }
  throw std::invalid_argument("unknown model family " + m.family);
}

std::vector<ModelSpec> default_model_registry(const BitString& s) {
  size_t n = s.size();
  std::vector<ModelSpec> reg;
  reg.push_back({"full_cube", BitString(), 0});
  reg.push_back({"constant", s, 0});
  for (size_t eighths = 1; eighths <= 7; ++eighths) {
    size_t m = n * eighths / 8;
    if (m == 0 || m == n) continue;
    reg.push_back({"prefix_cylinder", s.prefix(m), m});
    reg.push_back({"suffix_cylinder", s.slice(n - m, m), m});
  }
  reg.push_back({"hamming_shell", BitString(), s.weight()});
  reg.push_back({"run_profile", s, 0});
  return reg;
}

StructureFunction structure_function(const BitString& s, const Compressor& c) {
  return structure_function(s, c, default_model_registry(s));
}

StructureFunction structure_function(const BitString& s, const Compressor& c,
                                     const std::vector<ModelSpec>& registry) {
  if (s.empty()) throw std::invalid_argument("structure_function: empty subject");
  size_t n = s.size();

  struct Entry {
    double cost, log_size;
    const ModelSpec* spec;
  };
  std::vector<Entry> entries;
  for (const ModelSpec& m : registry)
    if (model_contains(m, s, n)) entries.push_back({model_cost_bits(m, n, c), model_log2_size(m, n), &m});
  if (entries.empty()) throw NoCoveringModel("no registry model contains the subject");

  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.cost < b.cost || (a.cost == b.cost && a.log_size < b.log_size);
  });
  std::vector<Entry> stair;  // prune: keep strict improvements in log_size
  for (const Entry& e : entries)
    if (stair.empty() || e.log_size < stair.back().log_size) {
      if (!stair.empty() && e.cost == stair.back().cost)
        stair.back() = e;
      else
        stair.push_back(e);
    }

  StructureFunction sf;
  for (const Entry& e : stair) sf.points.push_back({e.cost, e.log_size});

  size_t pick = stair.size() - 1;
  for (size_t i = 0; i + 1 < stair.size(); ++i) {
    double dk = stair[i + 1].cost - stair[i].cost;
    double dl = stair[i + 1].log_size - stair[i].log_size;
    if (dk <= 0.0 || dl / dk >= -(1.0 + kSlopeTol)) {
      pick = i;
      break;
    }
  }
  sf.k0 = stair[pick].cost;
  sf.macrostate = *stair[pick].spec;
  sf.macrostate_cost_bits = stair[pick].cost;
  sf.macrostate_log2_size = stair[pick].log_size;
  sf.fuel_bound_bits = double(n) - sf.macrostate_cost_bits - sf.macrostate_log2_size;
  sf.khat_bits = estimate_K(s, c).value_bits;
  return sf;
}

std::vector<BitString> mixing_automaton(size_t n, size_t steps, size_t stride, const Seed& seed) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("mixing_automaton: n must be even and >= 2");
  if (stride == 0) throw std::invalid_argument("mixing_automaton: stride must be positive");
  BitString state(n);
  for (size_t i = n / 2; i < n; ++i) state.set(i, true);
  ChaChaStream st(seed, 7);
  std::vector<BitString> trace{state};
  for (size_t step = 1; step <= steps; ++step) {
    size_t pos = static_cast<size_t>(st.next_below(n - 1));
    bool l = state.get(pos), r = state.get(pos + 1);
    state.set(pos, r);
    state.set(pos + 1, l);
    if (step % stride == 0) trace.push_back(state);
  }
  return trace;
}

}  // namespace kausal

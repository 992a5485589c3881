#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kausal/reversible.hpp"

using namespace kausal;

namespace {

const Lz77Compressor lz;
const Thresholds th;

}  // namespace

TEST_CASE("gates follow their truth tables and factories reject collisions") {
  BitString t = BitString::parse_ascii01("110");
  apply_gate(t, Gate::make_toffoli(0, 1, 2));
  CHECK(t.to_ascii01() == "111");
  apply_gate(t, Gate::make_toffoli(0, 1, 2));
  CHECK(t.to_ascii01() == "110");

  BitString u = BitString::parse_ascii01("10");
  apply_gate(u, Gate::make_cnot(0, 1));
  CHECK(u.to_ascii01() == "11");
  apply_gate(u, Gate::make_not(0));
  CHECK(u.to_ascii01() == "01");
  apply_gate(u, Gate::make_cnot(0, 1));  // control now 0: no-op
  CHECK(u.to_ascii01() == "01");

  CHECK_THROWS_AS(Gate::make_cnot(3, 3), std::invalid_argument);
  CHECK_THROWS_AS(Gate::make_toffoli(1, 2, 2), std::invalid_argument);
}

TEST_CASE("word and bitstring gate paths agree") {
  Seed seed = Seed::from_u64(4001);
  for (uint64_t s = 0; s < 32; ++s) {
    std::vector<Gate> prog = random_program(64, 24, seed, s);
    ChaChaStream st(seed, 1000 + s);
    uint64_t w = st.next_u64() & ((uint64_t{1} << 24) - 1);
    BitString tape(24);
    for (size_t i = 0; i < 24; ++i) tape.set(i, (w >> i) & 1);
    BitString out = apply_program(tape, prog);
    uint64_t wout = apply_program_word(w, prog);
    for (size_t i = 0; i < 24; ++i) CHECK(out.get(i) == (((wout >> i) & 1) != 0));
    CHECK(apply_inverse_word(wout, prog) == w);
  }
}

TEST_CASE("a NOT applied twice is the identity") {
  ReversibleMachine m(BitString(8), {Gate::make_not(0), Gate::make_not(0)});
  auto trace = m.run();
  REQUIRE(trace.size() == 3);
  CHECK(trace[1].get(0));
  CHECK(trace[2] == trace[0]);
}

TEST_CASE("invert restores the tape after a long random run") {
  Seed seed = Seed::from_u64(4002);
  BitString tape = random_bits(seed, 1, 64);
  std::vector<Gate> prog = random_program(1000, 64, seed, 2);
  ReversibleMachine m(tape, prog);
  auto trace = m.run();
  CHECK(trace.size() == 1001);
  CHECK_FALSE(m.tape == tape);  // overwhelmingly likely to have moved
  m.invert();
  CHECK(m.tape == tape);
  CHECK(m.pc == 0);
  CHECK(m.history.empty());
}

TEST_CASE("machine rejects out-of-range gates") {
  CHECK_THROWS_AS(ReversibleMachine(BitString(4), {Gate::make_not(4)}), GateIndexOutOfRange);
  CHECK_THROWS_AS(ReversibleMachine(BitString(4), {Gate::make_toffoli(0, 1, 7)}), GateIndexOutOfRange);
}

TEST_CASE("exhaustive reversibility at width 16 and randomized at width 4096") {
  Seed seed = Seed::from_u64(4003);
  for (uint64_t p = 0; p < 10; ++p) {  // acceptance suite runs the full 100
    std::vector<Gate> prog = random_program(256, 16, seed, p);
    for (uint64_t t = 0; t < (uint64_t{1} << 16); ++t) {
      uint64_t out = apply_program_word(t, prog);
      if (apply_inverse_word(out, prog) != t) {
        REQUIRE(false);  // report the failing tape immediately
      }
    }
  }
  for (uint64_t p = 0; p < 5; ++p) {
    BitString tape = random_bits(seed, 50 + p, 4096);
    std::vector<Gate> prog = random_program(2000, 4096, seed, 100 + p);
    BitString out = apply_program(tape, prog);
    ReversibleMachine m(out, {});
    m.history = prog;  // replay the log backwards
    m.invert();
    CHECK(m.tape == tape);
  }
}

TEST_CASE("fuel bounds match the three canonical regimes") {
  Seed seed = Seed::from_u64(4004);
  size_t n = 16384;

  FuelReport zeros = fuel_bounds(BitString(n), BitString(), lz);
  CHECK(zeros.lower_bound_bits >= uint64_t(0.98 * n));
  CHECK(zeros.lower_bound_bits <= zeros.upper_bound_bits);

  BitString r = sample_incompressible(n, seed);
  FuelReport incomp = fuel_bounds(r, BitString(), lz);
  CHECK(incomp.lower_bound_bits <= uint64_t(0.05 * n));
  CHECK(incomp.upper_bound_bits <= uint64_t(0.05 * n));

  FuelReport known = fuel_bounds(r, r, lz);
  CHECK(known.upper_bound_bits >= uint64_t(0.9 * n));
  CHECK(known.lower_bound_bits >= uint64_t(0.9 * n));
  CHECK(known.lower_bound_bits <= known.upper_bound_bits);

  CHECK(zeros.work_per_bit_joules == doctest::Approx(1.380649e-23 * 300.0 * 0.6931471805599453));
  CHECK(fuel_bounds(BitString(64), BitString(), lz, 600.0).work_per_bit_joules ==
        doctest::Approx(2.0 * zeros.work_per_bit_joules));
  CHECK_THROWS_AS(fuel_bounds(BitString(), BitString(), lz), std::invalid_argument);
}

TEST_CASE("bennett extraction zeroes S and restores X") {
  Seed seed = Seed::from_u64(4005);

  // empty generator on an all-zero S
  BennettResult r0 = bennett_extract(BitString(32), BitString(), {});
  CHECK(r0.extracted_zeros == 32);
  CHECK(r0.final_tape == BitString(64));

  // copy-from-X generator with X = S
  BitString s = random_bits(seed, 1, 64);
  std::vector<Gate> gen;
  for (uint32_t i = 0; i < 64; ++i) gen.push_back(Gate::make_cnot(64 + i, 128 + i));
  BennettResult r1 = bennett_extract(s, s, gen);
  CHECK(r1.extracted_zeros == 64);
  CHECK(r1.final_tape.prefix(64) == BitString(64));       // S zeroed
  CHECK(r1.final_tape.slice(64, 64) == s);                // X intact
  CHECK(r1.final_tape.slice(128, 64) == BitString(64));   // copy uncomputed
  CHECK(r1.transcript_gates == 64 + 64 + 64);

  // one wrong bit: mismatch, nothing extracted
  std::vector<Gate> bad = gen;
  bad.push_back(Gate::make_not(128));
  CHECK_THROWS_AS(bennett_extract(s, s, bad), GeneratorMismatch);

  // the fuel region is off limits
  CHECK_THROWS_AS(bennett_extract(s, s, {Gate::make_not(0)}), std::invalid_argument);
  CHECK_THROWS_AS(bennett_extract(s, s, {Gate::make_not(500)}), GateIndexOutOfRange);
}

TEST_CASE("second law audit is clean on reversible traces and flags overwrites") {
  Seed seed = Seed::from_u64(4006);
  BitString tape = random_bits(seed, 1, 4096);
  ReversibleMachine m(tape, random_program(1000, 4096, seed, 2));
  auto trace = m.run();
  // keep every 20th snapshot: 51 tapes, still spans the full run
  std::vector<BitString> sub;
  for (size_t i = 0; i < trace.size(); i += 20) sub.push_back(trace[i]);
  SecondLawReport rep = second_law_audit(sub, lz);
  CHECK(rep.violations.empty());
  CHECK(rep.worst_excess <= 0.0);
  CHECK(rep.pairs_checked == sub.size() * (sub.size() - 1) / 2);

  // zero-start tape: complexity only climbs
  ReversibleMachine mz(BitString(4096), random_program(1000, 4096, seed, 3));
  auto tz = mz.run();
  std::vector<BitString> subz;
  for (size_t i = 0; i < tz.size(); i += 20) subz.push_back(tz[i]);
  CHECK(second_law_audit(subz, lz).violations.empty());

  // irreversible overwrite: incompressible tape collapses to zeros
  std::vector<BitString> owr{tape, BitString(4096)};
  SecondLawReport bad = second_law_audit(owr, lz);
  REQUIRE(bad.violations.size() == 1);
  CHECK(bad.violations[0].t1 == 0);
  CHECK(bad.violations[0].excess > 3000.0);

  // constant trace is trivially monotone
  std::vector<BitString> flat{tape, tape, tape};
  CHECK(second_law_audit(flat, lz).violations.empty());
}

TEST_CASE("landauer ledger prices erasure and its converse") {
  Seed seed = Seed::from_u64(4007);
  size_t n = 8192;
  BitString a = random_bits(seed, 1, n);
  LandauerLedger cost = landauer_ledger(a, BitString(n), lz);
  CHECK(cost.delta_bits > int64_t(0.9 * n));
  CHECK(cost.joules == doctest::Approx(double(cost.delta_bits) * cost.kT_ln2_joules));

  LandauerLedger release = landauer_ledger(BitString(n), a, lz);
  CHECK(release.delta_bits < -int64_t(0.9 * n));
  CHECK(release.joules < 0.0);

  CHECK(landauer_ledger(a, a, lz).delta_bits == 0);
}

TEST_CASE("structure function finds the right macrostates") {
  Seed seed = Seed::from_u64(4008);
  size_t n = 8192;

  StructureFunction zf = structure_function(BitString(n), lz);
  CHECK(zf.macrostate.family == "constant");
  CHECK(zf.macrostate_log2_size == 0.0);
  CHECK(zf.k0 < 64.0);

  BitString r = sample_incompressible(n, seed);
  StructureFunction rf = structure_function(r, lz);
  CHECK(rf.macrostate.family == "full_cube");
  CHECK(rf.macrostate_log2_size == double(n));
  CHECK(rf.k0 < 64.0);

  BitString half = BitString(n / 2) + random_bits(seed, 2, n / 2);
  StructureFunction hf = structure_function(half, lz);
  CHECK(hf.macrostate.family == "prefix_cylinder");
  CHECK(hf.macrostate.param == n / 2);
  CHECK(hf.macrostate_log2_size == double(n / 2));

  // staircase shape + sufficiency identity on all three
  for (const StructureFunction* sf : {&zf, &rf, &hf}) {
    for (size_t i = 0; i + 1 < sf->points.size(); ++i) {
      CHECK(sf->points[i].k < sf->points[i + 1].k);
      CHECK(sf->points[i].log2_size > sf->points[i + 1].log2_size);
    }
    CHECK(std::abs(double(sf->khat_bits) - (sf->k0 + sf->macrostate_log2_size)) <= 0.1 * double(n));
    CHECK(sf->fuel_bound_bits <= double(n));
  }

  // alternating string: fully structured, so the chosen class is tiny
  BitString alt(n);
  for (size_t i = 0; i < n; i += 2) alt.set(i, true);
  StructureFunction af = structure_function(alt, lz);
  CHECK(af.macrostate_log2_size <= 1.0);
  CHECK(af.k0 <= 64.0);

  // model primitives directly: run profiles and hamming shells
  ModelSpec rp{"run_profile", alt, 0};
  CHECK(model_contains(rp, alt, n));
  CHECK(model_contains(rp, bs_not(alt), n));  // complement shares the profile
  CHECK_FALSE(model_contains(rp, BitString(n), n));
  CHECK(model_log2_size(rp, n) == doctest::Approx(1.0));  // exactly two members

  ModelSpec shell{"hamming_shell", BitString(), 3};
  BitString w3(8);
  w3.set(0, true); w3.set(3, true); w3.set(7, true);
  CHECK(model_contains(shell, w3, 8));
  w3.set(7, false);
  CHECK_FALSE(model_contains(shell, w3, 8));
  CHECK(model_log2_size(shell, 8) == doctest::Approx(std::log2(56.0)).epsilon(1e-9));
  CHECK_THROWS_AS(model_log2_size(ModelSpec{"no_such_family", BitString(), 0}, 8),
                  std::invalid_argument);

  CHECK_THROWS_AS(structure_function(BitString(), lz), std::invalid_argument);
  std::vector<ModelSpec> empty_reg{{"constant", BitString(n), 0}};  // wrong constant: no cover
  CHECK_THROWS_AS(structure_function(r, lz, empty_reg), NoCoveringModel);
}

TEST_CASE("mixing automaton spreads structure and the macrostate grows") {
  Seed seed = Seed::from_u64(4009);
  size_t n = 4096;
  auto trace = mixing_automaton(n, 200000, 200000, seed);
  REQUIRE(trace.size() == 2);
  CHECK(trace[0].weight() == n / 2);
  CHECK(trace[1].weight() == n / 2);  // swaps conserve species

  StructureFunction initial = structure_function(trace[0], lz);
  StructureFunction final_state = structure_function(trace.back(), lz);
  CHECK(initial.macrostate_log2_size <= 64.0);  // two giant runs: tiny class
  CHECK(final_state.macrostate_log2_size >= initial.macrostate_log2_size);
  CHECK(final_state.macrostate_log2_size >= 0.9 * double(n));

  CHECK_THROWS_AS(mixing_automaton(7, 10, 1, seed), std::invalid_argument);
  CHECK_THROWS_AS(mixing_automaton(8, 10, 0, seed), std::invalid_argument);
}

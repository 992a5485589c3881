#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "kausal/process.hpp"

using namespace kausal;

namespace {

const Lz77Compressor lz;
const Thresholds th;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<LocalOpChoice> combo_of(std::initializer_list<LocalOpChoice> ops) { return {ops}; }

uint8_t joint_output(const std::vector<Party>& ps, size_t r) {
  uint8_t o = 0;
  for (size_t p = 0; p < ps.size(); ++p)
    if (ps[p].A_O.get(r)) o |= uint8_t(1) << p;
  return o;
}

}  // namespace

TEST_CASE("the four local operations follow the control-pair rule") {
  CHECK(universal_local_op(BitString::parse_ascii01("01"), BitString::parse_ascii01("1")).to_ascii01() == "1");
  CHECK(universal_local_op(BitString::parse_ascii01("10"), BitString::parse_ascii01("1")).to_ascii01() == "0");
  CHECK(universal_local_op(BitString::parse_ascii01("0011"), BitString::parse_ascii01("10")).to_ascii01() == "01");
  CHECK_THROWS_AS(universal_local_op(BitString(5), BitString(2)), LengthMismatch);

  for (bool b : {false, true}) {
    CHECK(apply_local_op(LocalOpChoice::const0, b) == false);
    CHECK(apply_local_op(LocalOpChoice::const1, b) == true);
    CHECK(apply_local_op(LocalOpChoice::id, b) == b);
    CHECK(apply_local_op(LocalOpChoice::neg, b) == !b);
  }
  CHECK(op_from_control(false, true) == LocalOpChoice::id);
  CHECK(op_from_control(true, false) == LocalOpChoice::neg);
  CHECK(std::string(local_op_name(LocalOpChoice::neg)) == "negation");

  // with an incompressible control string the output inherits full complexity
  Seed seed = Seed::from_u64(5001);
  size_t n = 16384;
  BitString pc = sample_incompressible(2 * n, seed);
  BitString out = universal_local_op(pc, BitString(n));
  CHECK(double(estimate_K(out, lz).value_bits) / double(n) >= 0.9);
}

TEST_CASE("fixed points of the bundled relations") {
  GlobalRelation swap = two_way_swap();
  CHECK(fixed_points(swap, combo_of({LocalOpChoice::id, LocalOpChoice::neg})).empty());
  CHECK(fixed_points(swap, combo_of({LocalOpChoice::id, LocalOpChoice::id})) == std::vector<uint8_t>{0, 3});

  GlobalRelation chan = one_way_channel();
  CHECK(fixed_points(chan, combo_of({LocalOpChoice::id, LocalOpChoice::id})) == std::vector<uint8_t>{0});

  CHECK_THROWS_AS(fixed_points(chan, combo_of({LocalOpChoice::id})), std::invalid_argument);
}

TEST_CASE("consistency verdicts for the three bundled relations") {
  ConsistencyVerdict chan = check_logical_consistency(one_way_channel());
  CHECK(chan.consistent);
  CHECK(chan.deterministic_process);
  CHECK(chan.per_combo.size() == 16);
  for (const auto& fps : chan.per_combo) CHECK(fps.size() == 1);
  CHECK(chan.failing_combos.empty());

  ConsistencyVerdict swap = check_logical_consistency(two_way_swap());
  CHECK_FALSE(swap.consistent);
  CHECK_FALSE(swap.deterministic_process);
  REQUIRE(swap.failing_combos.size() == 2);  // (neg, id) then (id, neg), ascending
  CHECK(swap.failing_combos[0] == combo_of({LocalOpChoice::neg, LocalOpChoice::id}));
  CHECK(swap.failing_combos[1] == combo_of({LocalOpChoice::id, LocalOpChoice::neg}));

  ConsistencyVerdict cyc = check_logical_consistency(cyclic_inhibition());
  CHECK(cyc.consistent);
  CHECK(cyc.deterministic_process);
  CHECK(cyc.per_combo.size() == 64);
  for (const auto& fps : cyc.per_combo) CHECK(fps.size() == 1);

  CHECK_THROWS_AS(check_logical_consistency(cyclic_inhibition(), 2), TooManyParties);
  GlobalRelation broken;
  broken.k = 2;
  broken.table = {0, 1, 2};
  CHECK_THROWS_AS(check_logical_consistency(broken), std::invalid_argument);
}

TEST_CASE("fixed_points agrees with the verdict tables") {
  GlobalRelation g = one_way_channel();
  ConsistencyVerdict v = check_logical_consistency(g);
  for (uint64_t c = 0; c < 16; ++c) {
    auto combo = combo_of({static_cast<LocalOpChoice>(c & 3), static_cast<LocalOpChoice>((c >> 2) & 3)});
    CHECK(fixed_points(g, combo) == v.per_combo[c]);
  }
}

TEST_CASE("a one-way channel run reproduces the relation exactly") {
  Seed seed = Seed::from_u64(5002);
  size_t rounds = 4096;
  auto ps = run_scenario(one_way_channel(), seed, rounds);
  REQUIRE(ps.size() == 2);
  CHECK(ps[0].name == "A");
  CHECK(ps[1].name == "B");
  CHECK(ps[0].A_I == BitString(rounds));  // the sender receives nothing
  CHECK(ps[1].A_I == ps[0].A_O);          // the receiver gets the sender's output
  for (const Party& p : ps) {
    CHECK(p.rounds() == rounds);
    CHECK(p.control.size() == 2 * rounds);
    CHECK(p.local_relation.size() == rounds);
    // outputs are exactly the local op applied to inputs
    CHECK(p.A_O == universal_local_op(p.control, p.A_I));
    for (size_t r = 0; r < 64; ++r)
      CHECK(p.local_relation[r] == op_from_control(p.control.get(2 * r), p.control.get(2 * r + 1)));
  }

  // replay-exact determinism
  auto again = run_scenario(one_way_channel(), seed, rounds);
  CHECK(again[0].A_O == ps[0].A_O);
  CHECK(again[1].A_I == ps[1].A_I);
  auto other = run_scenario(one_way_channel(), Seed::from_u64(5003), rounds);
  CHECK_FALSE(other[0].A_O == ps[0].A_O);

  // every realized round sits in the fixed-point set of its op combo
  GlobalRelation g = one_way_channel();
  for (size_t r = 0; r < rounds; r += 97) {
    auto combo = combo_of({ps[0].local_relation[r], ps[1].local_relation[r]});
    auto fps = fixed_points(g, combo);
    REQUIRE(fps.size() == 1);  // deterministic relation
    CHECK(fps[0] == joint_output(ps, r));
  }

  CHECK_THROWS_AS(run_scenario(two_way_swap(), seed, rounds), InconsistentRelation);
  CHECK_THROWS_AS(run_scenario(one_way_channel(), seed, 0), std::invalid_argument);
  CHECK_THROWS_AS(run_scenario(one_way_channel(), seed, 8, {"A"}), std::invalid_argument);
  CHECK_THROWS_AS(run_scenario(one_way_channel(), seed, 8, {"X", "X"}), std::invalid_argument);
  auto named = run_scenario(one_way_channel(), seed, 8, {"src", "dst"});
  CHECK(named[0].name == "src");
  CHECK(named[1].name == "dst");
}

TEST_CASE("the cyclic inhibition table and runs match the defining formulas") {
  GlobalRelation g = cyclic_inhibition();
  CHECK(g.table[0b000] == 0b000);
  CHECK(g.table[0b011] == 0b010);  // outputs (1,1,0): only the second input fires

  Seed seed = Seed::from_u64(5004);
  auto ps = run_scenario(g, seed, 4096);
  REQUIRE(ps.size() == 3);
  for (size_t r = 0; r < 4096; ++r) {
    bool a = ps[0].A_O.get(r), b = ps[1].A_O.get(r), c = ps[2].A_O.get(r);
    CHECK(ps[0].A_I.get(r) == (!b && c));
    CHECK(ps[1].A_I.get(r) == (a && !c));
    CHECK(ps[2].A_I.get(r) == (!a && b));
  }
}

TEST_CASE("derived relations make the one-way channel causal") {
  Seed seed = Seed::from_u64(5005);
  size_t rounds = 16384;
  auto ps = run_scenario(one_way_channel(), seed, rounds);
  CausalRelationMatrix m = derive_causal_relations(ps, th, lz);
  CHECK(m.names == std::vector<std::string>{"A", "B"});
  CHECK(m.pair[0][1] == PairwiseCausal::precedes);
  CHECK(m.pair[1][0] == PairwiseCausal::not_precedes);
  CHECK(m.pair[0][0] == PairwiseCausal::not_precedes);
  CHECK(m.margin[0][1] > 0.2);
  CHECK(m.margin[1][0] < -0.03);
  CHECK(m.group_past[0].empty());                                // nothing explains A's constant input
  CHECK(m.group_past[1] == std::vector<std::vector<size_t>>{{0}});
  CHECK(classify_scenario(m) == ScenarioClass::causal);
  CHECK(std::string(scenario_class_name(ScenarioClass::causal)) == "causal");

  CHECK_THROWS_AS(derive_causal_relations(run_scenario(one_way_channel(), seed, 128), th, lz), TooShort);
  CHECK_THROWS_AS(derive_causal_relations({ps[0]}, th, lz), std::invalid_argument);
}

TEST_CASE("derived relations make the cyclic inhibition run non-causal") {
  Seed seed = Seed::from_u64(5006);
  auto ps = run_scenario(cyclic_inhibition(), seed, 16384);
  CausalRelationMatrix m = derive_causal_relations(ps, th, lz);
  // each party's input is an exact function of the other two outputs
  std::vector<size_t> bc{1, 2}, ac{0, 2}, ab{0, 1};
  auto has = [](const std::vector<std::vector<size_t>>& sets, const std::vector<size_t>& want) {
    for (const auto& s : sets)
      if (s == want) return true;
    return false;
  };
  CHECK(has(m.group_past[0], bc));
  CHECK(has(m.group_past[1], ac));
  CHECK(has(m.group_past[2], ab));
  CHECK(classify_scenario(m) == ScenarioClass::non_causal);
}

TEST_CASE("hand-built constant parties derive an empty matrix") {
  std::vector<Party> ps(2);
  for (size_t p = 0; p < 2; ++p) {
    ps[p].name = std::string(1, char('A' + p));
    ps[p].A_I = BitString(8192);
    ps[p].A_O = BitString(8192);
    ps[p].control = BitString(16384);
  }
  CausalRelationMatrix m = derive_causal_relations(ps, th, lz);
  CHECK(m.pair[0][1] == PairwiseCausal::not_precedes);
  CHECK(m.pair[1][0] == PairwiseCausal::not_precedes);
  CHECK(m.group_past[0].empty());
  CHECK(m.group_past[1].empty());
  CHECK(classify_scenario(m) == ScenarioClass::causal);
}

TEST_CASE("exact classification of the bundled relations") {
  CHECK(classify_relation(one_way_channel()) == RelationClass::consistent_causal);
  CHECK(classify_relation(two_way_swap()) == RelationClass::inconsistent);
  CHECK(classify_relation(cyclic_inhibition()) == RelationClass::consistent_non_causal);
  CHECK(std::string(relation_class_name(RelationClass::consistent_non_causal)) == "consistent_non_causal");
}

TEST_CASE("census of one and two parties") {
  CensusReport r1 = census(1);
  CHECK(r1.total == 4);
  CHECK(r1.inconsistent == 2);  // the identity and negation loops
  CHECK(r1.consistent_causal == 2);
  CHECK(r1.consistent_non_causal == 0);
  CHECK(r1.consistent_probabilistic == 0);
  REQUIRE(r1.exemplar_inconsistent);
  CHECK(r1.exemplar_inconsistent->index == 1);
  CHECK_FALSE(r1.exemplar_non_causal);

  CensusReport r2 = census(2);
  CHECK(r2.total == 256);
  CHECK(r2.inconsistent == 244);
  // the 12 consistent relations are exactly the one-way layouts: one party's
  // input constant, the other's a unary function of the first's output
  CHECK(r2.consistent_causal == 12);
  CHECK(r2.consistent_non_causal == 0);  // two parties cannot evade causal order
  CHECK(r2.consistent_probabilistic == 0);
  CHECK(classify_relation(relation_from_index(2, r2.exemplar_causal->index)) == RelationClass::consistent_causal);

  CensusReport s2 = census_serial(2);
  CHECK(s2.inconsistent == r2.inconsistent);
  CHECK(s2.consistent_causal == r2.consistent_causal);
  CHECK(s2.consistent_non_causal == r2.consistent_non_causal);
  CHECK(s2.exemplar_inconsistent->index == r2.exemplar_inconsistent->index);
  CHECK(s2.exemplar_causal->index == r2.exemplar_causal->index);

  CHECK_THROWS_AS(census(0), std::invalid_argument);
  CHECK_THROWS_AS(census(4), TooManyParties);
}

TEST_CASE("census of three parties finds the non-causal island") {
  CensusReport r = census(3);
  CHECK(r.total == 16777216);
  CHECK(r.inconsistent == 16776472);
  CHECK(r.consistent_causal == 680);
  CHECK(r.consistent_non_causal == 64);
  CHECK(r.consistent_probabilistic == 0);  // every consistent relation is deterministic
  REQUIRE(r.exemplar_non_causal);
  CHECK(r.exemplar_non_causal->index == 54877);
  CHECK(classify_relation(r.exemplar_non_causal->relation) == RelationClass::consistent_non_causal);
  CHECK(check_logical_consistency(r.exemplar_non_causal->relation).consistent);
  // our showcase relation is one of the 64
  CHECK(relation_index(cyclic_inhibition()) == 1086736);
}

TEST_CASE("relation indices round-trip") {
  CHECK(relation_index(one_way_channel()) == 136);
  CHECK(relation_index(two_way_swap()) == 216);
  CHECK(relation_from_index(2, 136).table == one_way_channel().table);
  Seed seed = Seed::from_u64(5007);
  ChaChaStream st(seed, 1);
  for (int i = 0; i < 20; ++i) {
    uint64_t idx = st.next_below(uint64_t{1} << 24);
    CHECK(relation_index(relation_from_index(3, idx)) == idx);
  }
  CHECK_THROWS_AS(relation_from_index(2, 256), std::invalid_argument);
  CHECK_THROWS_AS(relation_from_index(4, 0), TooManyParties);
}

TEST_CASE("relation JSON round-trips and rejects malformed files") {
  std::string path = "/tmp/kausal_relation.json";
  write_relation_json(cyclic_inhibition(), path);
  GlobalRelation back = read_relation_json(path);
  CHECK(back.k == 3);
  CHECK(back.table == cyclic_inhibition().table);

  write_relation_json(one_way_channel(), path);
  std::string text = slurp(path);
  CHECK(text.find("\"10\": \"01\"") != std::string::npos);  // sender's 1 lands at the receiver

  std::ofstream(path) << "{\"k\": 2}\n";
  CHECK_THROWS_AS(read_relation_json(path), MalformedFile);
  std::ofstream(path) << "{\"k\": 2, \"rows\": {\"00\": \"00\", \"10\": \"00\", \"01\": \"00\", \"11\": \"0x\"}}\n";
  CHECK_THROWS_AS(read_relation_json(path), MalformedFile);
  std::ofstream(path) << "{\"k\": 2, \"rows\": {\"00\": \"00\"}}\n";
  CHECK_THROWS_AS(read_relation_json(path), MalformedFile);
  std::ofstream(path) << "not json\n";
  CHECK_THROWS_AS(read_relation_json(path), MalformedFile);
  CHECK_THROWS_AS(read_relation_json("/tmp/kausal_no_such_file.json"), MalformedFile);
  std::remove(path.c_str());
}

TEST_CASE("census CSV lists one row per class") {
  std::string path = "/tmp/kausal_census.csv";
  write_census_csv(census(2), path);
  std::string text = slurp(path);
  CHECK(text.find("class,count,exemplar_index,exemplar_table,exemplar_fixed_points\n") == 0);
  CHECK(text.find("inconsistent,244,1,") != std::string::npos);
  CHECK(text.find("consistent_causal,12,0,0|0|0|0,") != std::string::npos);
  CHECK(text.find("consistent_non_causal,0,-,-,-") != std::string::npos);
  std::remove(path.c_str());
}

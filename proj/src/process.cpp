#include "kausal/process.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

namespace kausal {

namespace {

using nlohmann::ordered_json;

constexpr uint64_t kSelectionStream = 9;     // uniform pick among multiple fixed points
constexpr uint64_t kControlStreamBase = 10;  // party p's control seed label

// lcm(1 .. 2^k): clears every divisor |F_m|, so all census weights are integers.
constexpr int64_t kWeightUnit[4] = {0, 2, 12, 840};

uint64_t relation_count(uint32_t k) { return uint64_t{1} << (k * (uint32_t{1} << k)); }

std::vector<LocalOpChoice> decode_combo(uint64_t c, uint32_t k) {
  std::vector<LocalOpChoice> ops(k);
  for (uint32_t p = 0; p < k; ++p) ops[p] = static_cast<LocalOpChoice>((c >> (2 * p)) & 3);
  return ops;
}

uint8_t combo_output(uint64_t combo, uint32_t k, uint8_t input) {
  uint8_t o = 0;
  for (uint32_t p = 0; p < k; ++p) {
    auto op = static_cast<LocalOpChoice>((combo >> (2 * p)) & 3);
    if (apply_local_op(op, ((input >> p) & 1) != 0)) o |= uint8_t(1) << p;
  }
  return o;
}

std::string vector_bits(uint8_t v, uint32_t k) {
  std::string s(k, '0');
  for (uint32_t p = 0; p < k; ++p) s[p] = char('0' + ((v >> p) & 1));
  return s;
}

uint8_t parse_vector_bits(const std::string& s, uint32_t k, const std::string& path) {
  if (s.size() != k) throw MalformedFile(path + ": vector '" + s + "' is not " + std::to_string(k) + " bits");
  uint8_t v = 0;
  for (uint32_t p = 0; p < k; ++p) {
    if (s[p] != '0' && s[p] != '1') throw MalformedFile(path + ": vector '" + s + "' is not binary");
    if (s[p] == '1') v |= uint8_t(1) << p;
  }
  return v;
}

// Census kernel tables for one k: mask[o][v] is the bitset of op combos m with
// combo_output(m, v) == o, so relation g fixes o under exactly the combos
// mask[o][g(o)] and consistency is one OR per output vector.
struct CensusTables {
  uint32_t k = 0;
  size_t nk = 0, combos = 0;
  uint64_t full = 0;
  int64_t unit = 0;
  std::vector<std::vector<uint64_t>> mask;
};

CensusTables census_tables(uint32_t k) {
  CensusTables t;
  t.k = k;
  t.nk = size_t{1} << k;
  t.combos = t.nk * t.nk;  // 4^k
  t.full = t.combos == 64 ? ~uint64_t{0} : (uint64_t{1} << t.combos) - 1;
  t.unit = kWeightUnit[k];
  t.mask.assign(t.nk, std::vector<uint64_t>(t.nk, 0));
  for (size_t m = 0; m < t.combos; ++m)
    for (size_t v = 0; v < t.nk; ++v) t.mask[combo_output(m, k, uint8_t(v))][v] |= uint64_t{1} << m;
  return t;
}

uint8_t drop_bit(uint8_t v, uint32_t t) {
  return uint8_t(((v >> (t + 1)) << t) | (v & ((1u << t) - 1)));
}

// Exact classifier for one relation given its table digits. Returns the class
// and reports whether any combo has several fixed points.
RelationClass classify_with_tables(const CensusTables& t, const uint8_t* table, bool* probabilistic) {
  uint64_t chosen[8];
  uint64_t all = 0;
  for (size_t o = 0; o < t.nk; ++o) {
    chosen[o] = t.mask[o][table[o]];
    all |= chosen[o];
  }
  if (probabilistic) *probabilistic = false;
  if (all != t.full) return RelationClass::inconsistent;

  // Per-round weights: each combo has mass `unit`, split over its fixed points.
  int64_t W[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  for (size_t m = 0; m < t.combos; ++m) {
    int cnt = 0;
    for (size_t o = 0; o < t.nk; ++o) cnt += int((chosen[o] >> m) & 1);
    if (cnt > 1 && probabilistic) *probabilistic = true;
    int64_t share = t.unit / cnt;
    for (size_t o = 0; o < t.nk; ++o)
      if ((chosen[o] >> m) & 1) W[o] += share;
  }
  const int64_t total = int64_t(t.combos) * t.unit;

  // Causal iff some party is past-free: its input bit is constant, or exactly
  // independent of the joint outputs of all other parties (mutual information
  // is monotone, so the full complement decides every subset at once).
  for (uint32_t p = 0; p < t.k; ++p) {
    int64_t w1 = 0;
    for (size_t o = 0; o < t.nk; ++o)
      if ((table[o] >> p) & 1) w1 += W[o];
    if (w1 == 0 || w1 == total) return RelationClass::consistent_causal;

    int64_t joint[2][4] = {{0, 0, 0, 0}, {0, 0, 0, 0}};
    for (size_t o = 0; o < t.nk; ++o) joint[(table[o] >> p) & 1][drop_bit(uint8_t(o), p)] += W[o];
    size_t ns = t.nk >> 1;
    bool dependent = false;
    for (size_t b = 0; b < 2 && !dependent; ++b)
      for (size_t s = 0; s < ns && !dependent; ++s) {
        int64_t wb = joint[b][0];
        for (size_t s2 = 1; s2 < ns; ++s2) wb += joint[b][s2];
        int64_t ws = joint[0][s] + joint[1][s];
        if (joint[b][s] * total != wb * ws) dependent = true;
      }
    if (!dependent) return RelationClass::consistent_causal;
  }
  return RelationClass::consistent_non_causal;
}

struct CensusPartial {
  uint64_t inconsistent = 0, causal = 0, non_causal = 0, probabilistic = 0;
  uint64_t first_inconsistent = UINT64_MAX, first_causal = UINT64_MAX, first_non_causal = UINT64_MAX;

  void merge(const CensusPartial& o) {
    inconsistent += o.inconsistent;
    causal += o.causal;
    non_causal += o.non_causal;
    probabilistic += o.probabilistic;
    first_inconsistent = std::min(first_inconsistent, o.first_inconsistent);
    first_causal = std::min(first_causal, o.first_causal);
    first_non_causal = std::min(first_non_causal, o.first_non_causal);
  }
};

void census_one(const CensusTables& t, uint64_t index, CensusPartial& acc) {
  uint8_t table[8];
  for (size_t o = 0; o < t.nk; ++o) table[o] = uint8_t((index >> (t.k * o)) & (t.nk - 1));
  bool prob = false;
  switch (classify_with_tables(t, table, &prob)) {
    case RelationClass::inconsistent:
      ++acc.inconsistent;
      acc.first_inconsistent = std::min(acc.first_inconsistent, index);
      return;
    case RelationClass::consistent_causal:
      ++acc.causal;
      acc.first_causal = std::min(acc.first_causal, index);
      break;
    case RelationClass::consistent_non_causal:
      ++acc.non_causal;
      acc.first_non_causal = std::min(acc.first_non_causal, index);
      break;
  }
  if (prob) ++acc.probabilistic;
}

CensusReport assemble_census(uint32_t k, const CensusPartial& p) {
  CensusReport r;
  r.k = k;
  r.total = relation_count(k);
  r.inconsistent = p.inconsistent;
  r.consistent_causal = p.causal;
  r.consistent_non_causal = p.non_causal;
  r.consistent_probabilistic = p.probabilistic;
  if (p.first_inconsistent != UINT64_MAX)
    r.exemplar_inconsistent = CensusExemplar{p.first_inconsistent, relation_from_index(k, p.first_inconsistent)};
  if (p.first_causal != UINT64_MAX)
    r.exemplar_causal = CensusExemplar{p.first_causal, relation_from_index(k, p.first_causal)};
  if (p.first_non_causal != UINT64_MAX)
    r.exemplar_non_causal = CensusExemplar{p.first_non_causal, relation_from_index(k, p.first_non_causal)};
  return r;
}

void require_census_k(uint32_t k) {
  if (k == 0) throw std::invalid_argument("census: k must be positive");
  if (k > 3) throw TooManyParties("census: k = " + std::to_string(k) + " exceeds the supported 3");
}

}  // namespace

const char* local_op_name(LocalOpChoice op) {
  switch (op) {
    case LocalOpChoice::const0: return "const0";
    case LocalOpChoice::id: return "identity";
    case LocalOpChoice::neg: return "negation";
    case LocalOpChoice::const1: return "const1";
  }
  return "?";
}

BitString universal_local_op(const BitString& P_C, const BitString& P_I) {
  if (P_C.size() != 2 * P_I.size())
    throw LengthMismatch("universal_local_op: control has " + std::to_string(P_C.size()) + " bits for " +
                         std::to_string(P_I.size()) + " rounds");
  BitString out(P_I.size());
  for (size_t r = 0; r < P_I.size(); ++r)
    out.set(r, apply_local_op(op_from_control(P_C.get(2 * r), P_C.get(2 * r + 1)), P_I.get(r)));
  return out;
}

void GlobalRelation::validate() const {
  if (k < 1 || k > 8) throw std::invalid_argument("GlobalRelation: k must be in [1, 8]");
  if (table.size() != (size_t{1} << k))
    throw std::invalid_argument("GlobalRelation: table must have 2^k entries");
  for (uint8_t v : table)
    if (k < 8 && v >= (1u << k)) throw std::invalid_argument("GlobalRelation: table entry out of range");
}

GlobalRelation one_way_channel() {
  GlobalRelation g;
  g.k = 2;
  g.table = {0b00, 0b10, 0b00, 0b10};  // receiver's input is the sender's output
  return g;
}

GlobalRelation two_way_swap() {
  GlobalRelation g;
  g.k = 2;
  g.table = {0b00, 0b10, 0b01, 0b11};
  return g;
}

GlobalRelation cyclic_inhibition() {
  GlobalRelation g;
  g.k = 3;
  g.table.resize(8);
  for (uint8_t o = 0; o < 8; ++o) {
    bool a = o & 1, b = (o >> 1) & 1, c = (o >> 2) & 1;
    bool x = !b && c, y = a && !c, z = !a && b;
    g.table[o] = uint8_t((x ? 1 : 0) | (y ? 2 : 0) | (z ? 4 : 0));
  }
  return g;
}

GlobalRelation relation_from_index(uint32_t k, uint64_t index) {
  require_census_k(k);
  if (index >= relation_count(k))
    throw std::invalid_argument("relation_from_index: index out of range");
  GlobalRelation g;
  g.k = k;
  size_t nk = size_t{1} << k;
  g.table.resize(nk);
  for (size_t o = 0; o < nk; ++o) g.table[o] = uint8_t((index >> (k * o)) & (nk - 1));
  return g;
}

uint64_t relation_index(const GlobalRelation& g) {
  g.validate();
  require_census_k(g.k);
  uint64_t index = 0;
  for (size_t o = 0; o < g.table.size(); ++o) index |= uint64_t(g.table[o]) << (g.k * o);
  return index;
}

std::vector<uint8_t> fixed_points(const GlobalRelation& g, const std::vector<LocalOpChoice>& combo) {
  g.validate();
  if (combo.size() != g.k) throw std::invalid_argument("fixed_points: combo size must equal k");
  uint64_t c = 0;
  for (uint32_t p = 0; p < g.k; ++p) c |= uint64_t(static_cast<uint8_t>(combo[p])) << (2 * p);
  std::vector<uint8_t> fps;
  for (size_t o = 0; o < g.table.size(); ++o)
    if (combo_output(c, g.k, g.table[o]) == uint8_t(o)) fps.push_back(uint8_t(o));
  return fps;
}

ConsistencyVerdict check_logical_consistency(const GlobalRelation& g, uint32_t max_parties) {
  g.validate();
  if (g.k > max_parties)
    throw TooManyParties("check_logical_consistency: k = " + std::to_string(g.k) + " exceeds limit " +
                         std::to_string(max_parties));
  ConsistencyVerdict v;
  v.consistent = true;
  v.deterministic_process = true;
  size_t combos = size_t{1} << (2 * g.k);
  v.per_combo.resize(combos);
  for (size_t c = 0; c < combos; ++c) {
    std::vector<uint8_t>& fps = v.per_combo[c];
    for (size_t o = 0; o < g.table.size(); ++o)
      if (combo_output(c, g.k, g.table[o]) == uint8_t(o)) fps.push_back(uint8_t(o));
    if (fps.empty()) {
      v.consistent = false;
      v.failing_combos.push_back(decode_combo(c, g.k));
    }
    if (fps.size() != 1) v.deterministic_process = false;
  }
  return v;
}

std::vector<Party> run_scenario(const GlobalRelation& g, const Seed& seed, size_t rounds,
                                const std::vector<std::string>& names) {
  if (rounds == 0) throw std::invalid_argument("run_scenario: rounds must be positive");
  ConsistencyVerdict verdict = check_logical_consistency(g);
  if (!verdict.consistent)
    throw InconsistentRelation("run_scenario: relation is logically inconsistent, refusing to run");

  std::vector<std::string> nm = names;
  if (nm.empty())
    for (uint32_t p = 0; p < g.k; ++p) nm.emplace_back(1, char('A' + p));
  if (nm.size() != g.k) throw std::invalid_argument("run_scenario: need one name per party");
  if (std::set<std::string>(nm.begin(), nm.end()).size() != nm.size())
    throw std::invalid_argument("run_scenario: party names must be unique");

  std::vector<Party> parties(g.k);
  for (uint32_t p = 0; p < g.k; ++p) {
    parties[p].name = nm[p];
    parties[p].control = sample_incompressible(2 * rounds, seed.derive(kControlStreamBase + p));
    parties[p].A_I = BitString(rounds);
    parties[p].A_O = BitString(rounds);
    parties[p].local_relation.reserve(rounds);
  }

  ChaChaStream select(seed, kSelectionStream);
  for (size_t r = 0; r < rounds; ++r) {
    uint64_t c = 0;
    for (uint32_t p = 0; p < g.k; ++p) {
      LocalOpChoice op = op_from_control(parties[p].control.get(2 * r), parties[p].control.get(2 * r + 1));
      parties[p].local_relation.push_back(op);
      c |= uint64_t(static_cast<uint8_t>(op)) << (2 * p);
    }
    const std::vector<uint8_t>& fps = verdict.per_combo[c];
    if (fps.empty())  // unreachable after the upfront check; kept as the per-round guard
      throw InconsistentRelation("run_scenario: no fixed point at round " + std::to_string(r));
    uint8_t o = fps.size() == 1 ? fps[0] : fps[size_t(select.next_below(fps.size()))];
    uint8_t in = g.table[o];
    for (uint32_t p = 0; p < g.k; ++p) {
      parties[p].A_O.set(r, ((o >> p) & 1) != 0);
      parties[p].A_I.set(r, ((in >> p) & 1) != 0);
    }
  }
  return parties;
}

CausalRelationMatrix derive_causal_relations(const std::vector<Party>& parties, const Thresholds& th,
                                             const Compressor& c) {
  th.validate();
  size_t k = parties.size();
  if (k < 2) throw std::invalid_argument("derive_causal_relations: need at least two parties");
  size_t n = parties[0].rounds();
  for (const Party& p : parties) {
    if (p.A_I.size() != n || p.A_O.size() != n)
      throw LengthMismatch("derive_causal_relations: parties disagree on round count");
  }
  if (n < th.n_min)
    throw TooShort("derive_causal_relations: " + std::to_string(n) + " rounds, need " + std::to_string(th.n_min));

  CausalRelationMatrix m;
  m.rounds = n;
  for (const Party& p : parties) m.names.push_back(p.name);
  m.pair.assign(k, std::vector<PairwiseCausal>(k, PairwiseCausal::not_precedes));
  m.margin.assign(k, std::vector<double>(k, 0.0));
  m.group_past.assign(k, {});

  std::vector<double> plain(k);
  for (size_t t = 0; t < k; ++t) plain[t] = double(estimate_K(parties[t].A_I, c).value_bits) / double(n);

  const double band = 0.1 * th.eps_dep;
  for (size_t t = 0; t < k; ++t) {
    std::vector<size_t> others;
    for (size_t i = 0; i < k; ++i)
      if (i != t) others.push_back(i);
    for (uint64_t bits = 1; bits < (uint64_t{1} << others.size()); ++bits) {
      std::vector<size_t> subset;
      for (size_t i = 0; i < others.size(); ++i)
        if ((bits >> i) & 1) subset.push_back(others[i]);
      std::vector<size_t> by_name = subset;  // conditioning layout is canonical: name order
      std::sort(by_name.begin(), by_name.end(),
                [&](size_t a, size_t b) { return parties[a].name < parties[b].name; });
      BitString cond = parties[by_name[0]].A_O;
      for (size_t i = 1; i < by_name.size(); ++i) cond = cond + parties[by_name[i]].A_O;

      double given = double(estimate_K_cond(parties[t].A_I, cond, c).value_bits) / double(n);
      double drop = plain[t] - given;
      double margin = std::min(plain[t] - th.eps_zero, drop - th.eps_dep);
      bool precedes = plain[t] > th.eps_zero && drop >= th.eps_dep;
      if (precedes) m.group_past[t].push_back(subset);
      if (subset.size() == 1) {
        size_t i = subset[0];
        m.margin[i][t] = margin;
        m.pair[i][t] = precedes ? PairwiseCausal::precedes
                                : (margin >= -band ? PairwiseCausal::indeterminate
                                                   : PairwiseCausal::not_precedes);
      }
    }
  }
  return m;
}

const char* scenario_class_name(ScenarioClass s) {
  return s == ScenarioClass::causal ? "causal" : "non_causal";
}

ScenarioClass classify_scenario(const CausalRelationMatrix& m) {
  for (const auto& incoming : m.group_past)
    if (incoming.empty()) return ScenarioClass::causal;
  return m.group_past.empty() ? ScenarioClass::causal : ScenarioClass::non_causal;
}

const char* relation_class_name(RelationClass r) {
  switch (r) {
    case RelationClass::inconsistent: return "inconsistent";
    case RelationClass::consistent_causal: return "consistent_causal";
    case RelationClass::consistent_non_causal: return "consistent_non_causal";
  }
  return "?";
}

RelationClass classify_relation(const GlobalRelation& g) {
  g.validate();
  require_census_k(g.k);
  CensusTables t = census_tables(g.k);
  return classify_with_tables(t, g.table.data(), nullptr);
}

CensusReport census_serial(uint32_t k) {
  require_census_k(k);
  CensusTables t = census_tables(k);
  CensusPartial acc;
  uint64_t total = relation_count(k);
  for (uint64_t r = 0; r < total; ++r) census_one(t, r, acc);
  return assemble_census(k, acc);
}

CensusReport census(uint32_t k) {
  require_census_k(k);
#ifdef KAUSAL_OPENMP
  CensusTables t = census_tables(k);
  CensusPartial acc;
  int64_t total = int64_t(relation_count(k));
#pragma omp parallel
  {
    CensusPartial mine;
#pragma omp for schedule(static) nowait
    for (int64_t r = 0; r < total; ++r) census_one(t, uint64_t(r), mine);
#pragma omp critical
    acc.merge(mine);
  }
  return assemble_census(k, acc);
#else
  return census_serial(k);
#endif
}

void write_relation_json(const GlobalRelation& g, const std::string& path) {
  g.validate();
  ordered_json rows = ordered_json::object();
  for (size_t o = 0; o < g.table.size(); ++o)
    rows[vector_bits(uint8_t(o), g.k)] = vector_bits(g.table[o], g.k);
  ordered_json doc{{"k", g.k}, {"rows", rows}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MalformedFile("cannot open for write: " + path);
  out << doc.dump(2) << '\n';
}

GlobalRelation read_relation_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedFile("cannot open: " + path);
  ordered_json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedFile(path + ": " + e.what());
  }
  if (!doc.contains("k") || !doc["k"].is_number_unsigned() || !doc.contains("rows") || !doc["rows"].is_object())
    throw MalformedFile(path + ": expected fields k and rows");
  GlobalRelation g;
  g.k = doc["k"].get<uint32_t>();
  if (g.k < 1 || g.k > 8) throw MalformedFile(path + ": k out of range");
  size_t nk = size_t{1} << g.k;
  if (doc["rows"].size() != nk) throw MalformedFile(path + ": rows must have exactly 2^k entries");
  g.table.assign(nk, 0);
  for (size_t o = 0; o < nk; ++o) {
    std::string key = vector_bits(uint8_t(o), g.k);
    if (!doc["rows"].contains(key)) throw MalformedFile(path + ": missing row " + key);
    if (!doc["rows"][key].is_string()) throw MalformedFile(path + ": row " + key + " must be a string");
    g.table[o] = parse_vector_bits(doc["rows"][key].get<std::string>(), g.k, path);
  }
  return g;
}

void write_census_csv(const CensusReport& r, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MalformedFile("cannot open for write: " + path);
  out << "class,count,exemplar_index,exemplar_table,exemplar_fixed_points\n";
  auto row = [&](const char* name, uint64_t count, const std::optional<CensusExemplar>& ex) {
    out << name << ',' << count << ',';
    if (!ex) {
      out << "-,-,-\n";
      return;
    }
    out << ex->index << ',';
    for (size_t o = 0; o < ex->relation.table.size(); ++o)
      out << (o ? "|" : "") << unsigned(ex->relation.table[o]);
    out << ',';
    ConsistencyVerdict v = check_logical_consistency(ex->relation);
    for (size_t c = 0; c < v.per_combo.size(); ++c) {
      if (c) out << ';';
      for (size_t i = 0; i < v.per_combo[c].size(); ++i) out << (i ? "|" : "") << unsigned(v.per_combo[c][i]);
    }
    out << '\n';
  };
  row("inconsistent", r.inconsistent, r.exemplar_inconsistent);
  row("consistent_causal", r.consistent_causal, r.exemplar_causal);
  row("consistent_non_causal", r.consistent_non_causal, r.exemplar_non_causal);
}

}  // namespace kausal

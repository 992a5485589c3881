#include "kausal/causal_poset.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>

#include <json.hpp>

namespace kausal {

namespace {

using nlohmann::ordered_json;

// Connected components over `equivalent` entries (estimates need not be
// transitive, so this is a deliberate union, not a congruence).
struct Classes {
  std::vector<size_t> comp_of;            // element index -> class id
  std::vector<size_t> rep;                // class id -> representative element index
  std::vector<std::vector<size_t>> members;
};

size_t find_root(std::vector<size_t>& up, size_t i) {
  while (up[i] != i) {
    up[i] = up[up[i]];
    i = up[i];
  }
  return i;
}

Classes collapse(const CausalPoset& p) {
  size_t n = p.size();
  std::vector<size_t> up(n);
  std::iota(up.begin(), up.end(), 0);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j)
      if (p.relation[i][j] == CausalRelation::equivalent) up[find_root(up, i)] = find_root(up, j);

  Classes cs;
  cs.comp_of.resize(n);
  std::vector<int> id_of_root(n, -1);
  for (size_t i = 0; i < n; ++i) {
    size_t r = find_root(up, i);
    if (id_of_root[r] < 0) {
      id_of_root[r] = static_cast<int>(cs.members.size());
      cs.members.emplace_back();
    }
    size_t cid = static_cast<size_t>(id_of_root[r]);
    cs.comp_of[i] = cid;
    cs.members[cid].push_back(i);
  }
  cs.rep.resize(cs.members.size());
  for (size_t cid = 0; cid < cs.members.size(); ++cid) {
    size_t best = cs.members[cid][0];
    for (size_t m : cs.members[cid])
      if (p.elements[m].name < p.elements[best].name) best = m;
    cs.rep[cid] = best;
  }
  return cs;
}

// Class order via representatives: deterministic even when in-class
// estimates disagree slightly.
bool class_leq(const CausalPoset& p, const Classes& cs, size_t c, size_t d) {
  return c == d || p.leq(cs.rep[c], cs.rep[d]);
}

void throw_if_violation_inside(const CausalPoset& p, const std::set<size_t>& involved_elems) {
  for (const TransitivityViolation& v : p.violations)
    if (involved_elems.count(v.i) && involved_elems.count(v.j) && involved_elems.count(v.k))
      throw OrderInconsistent("transitivity violation among elements " + p.elements[v.i].name + ", " +
                              p.elements[v.j].name + ", " + p.elements[v.k].name +
                              " makes the bound ill-defined");
}

std::optional<std::string> bound(const CausalPoset& p, const std::vector<std::string>& subset, bool upper) {
  if (subset.empty()) throw std::invalid_argument("bound query: empty subset");
  Classes cs = collapse(p);
  std::set<size_t> subset_classes;
  for (const std::string& name : subset) subset_classes.insert(cs.comp_of[p.index_of(name)]);

  std::vector<size_t> candidates;
  for (size_t c = 0; c < cs.members.size(); ++c) {
    bool ok = true;
    for (size_t s : subset_classes)
      if (upper ? !class_leq(p, cs, s, c) : !class_leq(p, cs, c, s)) ok = false;
    if (ok) candidates.push_back(c);
  }
  std::set<size_t> involved;
  for (size_t c : subset_classes)
    for (size_t m : cs.members[c]) involved.insert(m);
  for (size_t c : candidates)
    for (size_t m : cs.members[c]) involved.insert(m);
  throw_if_violation_inside(p, involved);

  for (size_t c : candidates) {
    bool extreme = true;
    for (size_t d : candidates)
      if (upper ? !class_leq(p, cs, c, d) : !class_leq(p, cs, d, c)) extreme = false;
    if (extreme) return p.elements[cs.rep[c]].name;
  }
  return std::nullopt;
}

}  // namespace

const char* relation_name(CausalRelation r) {
  switch (r) {
    case CausalRelation::precedes: return "precedes";
    case CausalRelation::succeeds: return "succeeds";
    case CausalRelation::equivalent: return "equivalent";
    case CausalRelation::spacelike: return "spacelike";
    case CausalRelation::indeterminate: return "indeterminate";
  }
  return "?";
}

size_t CausalPoset::index_of(const std::string& name) const {
  for (size_t i = 0; i < elements.size(); ++i)
    if (elements[i].name == name) return i;
  throw std::invalid_argument("poset: no element named " + name);
}

bool CausalPoset::leq(size_t i, size_t j) const {
  return relation[i][j] == CausalRelation::precedes || relation[i][j] == CausalRelation::equivalent;
}

namespace {

CausalPoset assemble(const std::vector<NamedString>& c, const Thresholds& th, const Compressor& comp,
                     bool parallel) {
  th.validate();
  if (c.size() < 2) throw std::invalid_argument("build_poset: need at least two elements");
  for (const NamedString& e : c)
    if (e.bits.size() < th.n_min)
      throw TooShort("build_poset: element " + e.name + " shorter than n_min");

  size_t n = c.size();
  CausalPoset p;
  p.elements = c;
  p.thresholds = th;
  p.relation.assign(n, std::vector<CausalRelation>(n, CausalRelation::equivalent));
  p.cond_ratio.assign(n, std::vector<double>(n, 0.0));
  p.margins.assign(n, std::vector<double>(n, th.eps_zero));

  std::vector<std::pair<uint32_t, uint32_t>> pairs;
  for (uint32_t i = 0; i < n; ++i)
    for (uint32_t j = 0; j < n; ++j)
      if (i != j) pairs.emplace_back(i, j);

#ifdef KAUSAL_OPENMP
  #pragma omp parallel for schedule(dynamic) if (parallel)
#endif
  for (int64_t t = 0; t < static_cast<int64_t>(pairs.size()); ++t) {
    auto [i, j] = pairs[static_cast<size_t>(t)];
    p.cond_ratio[i][j] = estimate_K_cond(c[i].bits, c[j].bits, comp).ratio();
  }
#ifndef KAUSAL_OPENMP
  (void)parallel;
#endif

  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      p.margins[i][j] = th.eps_zero - p.cond_ratio[i][j];
      bool fwd = p.cond_ratio[i][j] <= th.eps_zero;
      bool bwd = p.cond_ratio[j][i] <= th.eps_zero;
      p.relation[i][j] = fwd ? (bwd ? CausalRelation::equivalent : CausalRelation::precedes)
                             : (bwd ? CausalRelation::succeeds : CausalRelation::spacelike);
    }
  }
  for (uint32_t i = 0; i < n; ++i)
    for (uint32_t j = 0; j < n; ++j)
      for (uint32_t k = 0; k < n; ++k) {
        if (i == j || j == k || i == k) continue;
        if (p.leq(i, j) && p.leq(j, k) && !p.leq(i, k)) p.violations.push_back({i, j, k});
      }
  return p;
}

}  // namespace

CausalPoset build_poset(const std::vector<NamedString>& c, const Thresholds& th, const Compressor& comp) {
  return assemble(c, th, comp, true);
}

CausalPoset build_poset_serial(const std::vector<NamedString>& c, const Thresholds& th, const Compressor& comp) {
  return assemble(c, th, comp, false);
}

std::optional<std::string> common_effect(const CausalPoset& p, const std::vector<std::string>& subset) {
  return bound(p, subset, true);
}

std::optional<std::string> common_cause(const CausalPoset& p, const std::vector<std::string>& subset) {
  return bound(p, subset, false);
}

ExtremesReport detect_extremes(const CausalPoset& p) {
  Classes cs = collapse(p);
  size_t nc = cs.members.size();
  ExtremesReport rep;
  std::vector<bool> minimal(nc, true), maximal(nc, true);
  for (size_t c = 0; c < nc; ++c)
    for (size_t d = 0; d < nc; ++d) {
      if (c == d) continue;
      if (class_leq(p, cs, d, c)) minimal[c] = false;
      if (class_leq(p, cs, c, d)) maximal[c] = false;
    }
  for (size_t c = 0; c < nc; ++c) {
    bool below_all = true, above_all = true;
    for (size_t d = 0; d < nc; ++d) {
      if (!class_leq(p, cs, c, d)) below_all = false;
      if (!class_leq(p, cs, d, c)) above_all = false;
    }
    if (below_all && !rep.big_bang) rep.big_bang = p.elements[cs.rep[c]].name;
    if (above_all && !rep.big_crunch) rep.big_crunch = p.elements[cs.rep[c]].name;
  }
  for (size_t i = 0; i < p.size(); ++i) {
    if (minimal[cs.comp_of[i]]) rep.causeless.push_back(p.elements[i].name);
    if (maximal[cs.comp_of[i]]) rep.effectless.push_back(p.elements[i].name);
  }
  return rep;
}

DeterminismReport classify_determinism(const CausalPoset& p, const Compressor& comp) {
  DeterminismReport rep;
  for (size_t y = 0; y < p.size(); ++y) {
    BitString causes;
    for (size_t x = 0; x < p.size(); ++x)
      if (x != y && p.relation[x][y] == CausalRelation::precedes) causes = causes + p.elements[x].bits;
    if (causes.empty()) continue;  // causeless: vacuously fine
    double r = estimate_K_cond(p.elements[y].bits, causes, comp).ratio();
    if (r > p.thresholds.eps_zero) rep.witnesses.push_back(p.elements[y].name);
  }
  rep.cls = rep.witnesses.empty() ? DeterminismClass::deterministic : DeterminismClass::probabilistic;
  return rep;
}

TrivialityReport check_triviality(const CausalPoset& p, const Compressor& comp) {
  TrivialityReport rep;
  DeterminismReport det = classify_determinism(p, comp);
  if (det.cls != DeterminismClass::deterministic) {
    rep.note = "skipped: structure is probabilistic, theorem hypothesis unmet";
    return rep;
  }
  ExtremesReport ext = detect_extremes(p);
  if (!ext.big_bang) {
    rep.note = "skipped: no big bang, theorem hypothesis unmet";
    return rep;
  }
  rep.status = TrivialityStatus::confirmed;
  rep.note = "deterministic with big bang " + *ext.big_bang;
  rep.worst_margin = p.thresholds.eps_zero;  // margins never exceed this
  for (size_t i = 0; i < p.size(); ++i)
    for (size_t j = i + 1; j < p.size(); ++j) {
      double m = std::min(p.margins[i][j], p.margins[j][i]);
      rep.worst_margin = std::min(rep.worst_margin, m);
      if (p.relation[i][j] != CausalRelation::equivalent) {
        rep.status = TrivialityStatus::counterexample;
        rep.counterexamples.emplace_back(p.elements[i].name, p.elements[j].name);
      }
    }
  return rep;
}

CausalDistance causal_distance(const NamedString& from, const NamedString& to, const Thresholds& th,
                               const Compressor& comp) {
  if (from.bits.size() < th.n_min || to.bits.size() < th.n_min)
    throw TooShort("causal_distance: operand shorter than n_min");
  CausalDistance d;
  d.from = from.name;
  d.to = to.name;
  d.value_bits = estimate_K_cond(to.bits, from.bits, comp).value_bits;
  return d;
}

void write_poset_json(const std::string& path, const CausalPoset& p) {
  ordered_json doc;
  doc["elements"] = ordered_json::array();
  for (const NamedString& e : p.elements) doc["elements"].push_back({{"name", e.name}, {"n", e.bits.size()}});
  doc["relation"] = ordered_json::array();
  doc["margins"] = ordered_json::array();
  for (size_t i = 0; i < p.size(); ++i) {
    ordered_json row = ordered_json::array(), mrow = ordered_json::array();
    for (size_t j = 0; j < p.size(); ++j) {
      row.push_back(relation_name(p.relation[i][j]));
      mrow.push_back(p.margins[i][j]);
    }
    doc["relation"].push_back(row);
    doc["margins"].push_back(mrow);
  }
  doc["violations"] = ordered_json::array();
  for (const TransitivityViolation& v : p.violations) doc["violations"].push_back({v.i, v.j, v.k});
  doc["thresholds"] = {{"eps_zero", p.thresholds.eps_zero},
                       {"eps_incomp", p.thresholds.eps_incomp},
                       {"eps_dep", p.thresholds.eps_dep},
                       {"n_min", p.thresholds.n_min}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MalformedFile("cannot open for write: " + path);
  out << doc.dump(2) << '\n';
}

std::vector<std::vector<NamedString>> triviality_corpus(size_t sets, size_t n, const Seed& seed) {
  if (n % 64 != 0 || n < 512) throw std::invalid_argument("triviality_corpus: n must be a multiple of 64, >= 512");
  auto periodic = [n](std::initializer_list<bool> unit) {
    std::vector<bool> u(unit);
    BitString s(n);
    for (size_t p = 0; p < n; ++p) s.set(p, u[p % u.size()]);
    return s;
  };
  auto rotl = [n](const BitString& b, size_t k) { return b.slice(k, n - k) + b.slice(0, k); };

  std::vector<std::vector<NamedString>> corpus;
  for (size_t s = 0; s < sets; ++s) {
    BitString base = random_bits(seed, 100 + s, n);
    std::vector<NamedString> set;
    switch (s % 3) {
      case 0: {  // xor with periodic masks
        set.push_back({"base", base});
        set.push_back({"mask2", bs_xor(base, periodic({true, false}))});
        set.push_back({"mask4", bs_xor(base, periodic({true, true, false, false}))});
        if (s % 2 == 0) set.push_back({"mask8", bs_xor(base, periodic({true, false, false, false, false, false, false, false}))});
        break;
      }
      case 1: {  // word-aligned rotations
        set.push_back({"rot0", base});
        set.push_back({"rot64", rotl(base, 64)});
        set.push_back({"rot128", rotl(base, 128)});
        if (s % 2 == 1) set.push_back({"rot192", rotl(base, 192)});
        break;
      }
      default: {  // extension by own prefixes
        set.push_back({"whole", base});
        set.push_back({"plus-quarter", base + base.prefix(n / 4)});
        set.push_back({"plus-half", base + base.prefix(n / 2)});
        break;
      }
    }
    corpus.push_back(std::move(set));
  }
  return corpus;
}

void write_poset_dot(const std::string& path, const CausalPoset& p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MalformedFile("cannot open for write: " + path);
  out << "digraph poset {\n";
  for (const NamedString& e : p.elements) out << "  \"" << e.name << "\";\n";
  for (size_t i = 0; i < p.size(); ++i)
    for (size_t j = 0; j < p.size(); ++j) {
      if (i == j) continue;
      if (p.relation[i][j] == CausalRelation::precedes)
        out << "  \"" << p.elements[i].name << "\" -> \"" << p.elements[j].name << "\";\n";
      else if (p.relation[i][j] == CausalRelation::equivalent && i < j)
        out << "  \"" << p.elements[i].name << "\" -> \"" << p.elements[j].name
            << "\" [dir=both, style=dashed];\n";
    }
  out << "}\n";
}

}  // namespace kausal

#include "kausal/nonlocality.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#ifdef KAUSAL_OPENMP
#include <omp.h>
#endif

namespace kausal {

namespace {

using nlohmann::ordered_json;

constexpr uint64_t kStreamA = 1;
constexpr uint64_t kStreamB = 2;
constexpr uint64_t kStreamX = 3;
constexpr uint64_t kStreamLambda = 4;
constexpr uint64_t kStreamNoise = 5;

const BitString& as_bits(const Track& t, const char* what) {
  if (!std::holds_alternative<BitString>(t)) throw MalformedFile(std::string(what) + ": expected a bit track");
  return std::get<BitString>(t);
}

const SymbolString& as_symbols(const Track& t, const char* what) {
  if (!std::holds_alternative<SymbolString>(t)) throw MalformedFile(std::string(what) + ": expected a symbol track");
  return std::get<SymbolString>(t);
}

// Magic square decode: answer cells of Alice's row (indexed by column) and
// Bob's column (indexed by row). Symbols 1..4 carry the two free bits
// row-major; the third cell restores even (row) / odd (column) parity.
std::array<int, 4> row_cells(uint16_t x) {
  int t1 = (x - 1) >> 1, t2 = (x - 1) & 1;
  return {0, t1, t2, t1 ^ t2};
}

std::array<int, 4> col_cells(uint16_t y) {
  int u1 = (y - 1) >> 1, u2 = (y - 1) & 1;
  return {0, u1, u2, u1 ^ u2 ^ 1};
}

bool magic_win(uint16_t a, uint16_t b, uint16_t x, uint16_t y) { return row_cells(x)[b] == col_cells(y)[a]; }

uint32_t read_block(const BitString& s, size_t round, uint32_t block_len) {
  uint32_t v = 0;
  for (uint32_t k = 0; k < block_len; ++k)
    if (s.get(round * block_len + k)) v |= 1u << k;
  return v;
}

void write_block(BitString& s, size_t round, uint32_t block_len, uint32_t v) {
  for (uint32_t k = 0; k < block_len; ++k) s.set(round * block_len + k, (v >> k) & 1u);
}

Verdict combine(const Verdict& a, const Verdict& b) {
  Verdict v;
  v.value = a.value && b.value;
  v.margin = std::min(a.margin, b.margin);
  v.indeterminate = a.indeterminate || b.indeterminate;
  if (!a.note.empty()) v.note = a.note;
  if (!b.note.empty()) v.note = v.note.empty() ? b.note : v.note + "; " + b.note;
  return v;
}

uint16_t promise_partner(uint16_t a, uint16_t m) { return a == m ? uint16_t{1} : uint16_t(a + 1); }

}  // namespace

size_t track_len(const Track& t) {
  return std::visit([](const auto& s) { return s.size(); }, t);
}

BitString track_bits(const Track& t) {
  if (std::holds_alternative<BitString>(t)) return std::get<BitString>(t);
  return std::get<SymbolString>(t).to_bits();
}

void Quadruple::validate() const {
  size_t n = track_len(a);
  if (track_len(b) != n || track_len(x) != n || track_len(y) != n)
    throw MalformedFile("quadruple: track lengths differ");
  switch (kind) {
    case SystemKind::pr: {
      as_bits(a, "a");
      as_bits(b, "b");
      as_bits(x, "x");
      as_bits(y, "y");
      if (m != 2) throw MalformedFile("pr quadruple: m must be 2");
      break;
    }
    case SystemKind::chained: {
      const auto& sa = as_symbols(a, "a");
      const auto& sb = as_symbols(b, "b");
      as_bits(x, "x");
      as_bits(y, "y");
      if (m < 3 || sa.alphabet() != m || sb.alphabet() != m) throw MalformedFile("chained quadruple: bad alphabet");
      for (size_t i = 0; i < n; ++i) {
        uint16_t ai = sa.get(i), bi = sb.get(i);
        if (bi != ai && bi != promise_partner(ai, m))
          throw MalformedFile("chained quadruple: promise violated at round " + std::to_string(i));
      }
      break;
    }
    case SystemKind::magic_square: {
      const auto& sa = as_symbols(a, "a");
      const auto& sb = as_symbols(b, "b");
      const auto& sx = as_symbols(x, "x");
      const auto& sy = as_symbols(y, "y");
      if (m != 3 || sa.alphabet() != 3 || sb.alphabet() != 3 || sx.alphabet() != 4 || sy.alphabet() != 4)
        throw MalformedFile("magic-square quadruple: bad alphabet");
      break;
    }
  }
}

LocalStrategy LocalStrategy::unary(LocalOpKind f, LocalOpKind g) {
  auto is_lambda_op = [](LocalOpKind k) {
    return k == LocalOpKind::xor_lambda || k == LocalOpKind::copy_lambda || k == LocalOpKind::and_lambda ||
           k == LocalOpKind::or_lambda;
  };
  auto eval = [](LocalOpKind k, uint32_t in, uint32_t lam) -> uint32_t {
    switch (k) {
      case LocalOpKind::const0: return 0;
      case LocalOpKind::const1: return 1;
      case LocalOpKind::copy: return in;
      case LocalOpKind::negate: return in ^ 1u;
      case LocalOpKind::xor_lambda: return in ^ lam;
      case LocalOpKind::copy_lambda: return lam;
      case LocalOpKind::and_lambda: return in & lam;
      case LocalOpKind::or_lambda: return in | lam;
    }
    return 0;
  };
  auto op_name = [](LocalOpKind k) -> std::string {
    switch (k) {
      case LocalOpKind::const0: return "const0";
      case LocalOpKind::const1: return "const1";
      case LocalOpKind::copy: return "copy";
      case LocalOpKind::negate: return "negate";
      case LocalOpKind::xor_lambda: return "xor_lambda";
      case LocalOpKind::copy_lambda: return "copy_lambda";
      case LocalOpKind::and_lambda: return "and_lambda";
      case LocalOpKind::or_lambda: return "or_lambda";
    }
    return "?";
  };
  LocalStrategy s;
  s.name = op_name(f) + "/" + op_name(g);
  s.block_len = 1;
  s.uses_lambda = is_lambda_op(f) || is_lambda_op(g);
  size_t domain = s.uses_lambda ? 4 : 2;
  s.f_table.resize(domain);
  s.g_table.resize(domain);
  for (uint32_t idx = 0; idx < domain; ++idx) {
    uint32_t in = idx & 1u, lam = idx >> 1;
    s.f_table[idx] = eval(f, in, lam);
    s.g_table[idx] = eval(g, in, lam);
  }
  return s;
}

LocalStrategy LocalStrategy::from_tables(std::string name, uint32_t block_len, bool uses_lambda,
                                         std::vector<uint32_t> f, std::vector<uint32_t> g) {
  LocalStrategy s;
  s.name = std::move(name);
  s.block_len = block_len;
  s.uses_lambda = uses_lambda;
  s.f_table = std::move(f);
  s.g_table = std::move(g);
  return s;
}

void LocalStrategy::validate(size_t n) const {
  if (block_len < 1 || block_len > 8) throw std::invalid_argument("local strategy: block_len out of range");
  if (n % block_len != 0)
    throw BadBlockAlignment("n = " + std::to_string(n) + " not a multiple of block_len = " +
                            std::to_string(block_len));
  size_t domain = size_t{1} << (block_len * (uses_lambda ? 2 : 1));
  if (f_table.size() != domain || g_table.size() != domain)
    throw std::invalid_argument("local strategy: table not total on its domain");
  for (uint32_t v : f_table)
    if (v >> block_len) throw std::invalid_argument("local strategy: f output exceeds block");
  for (uint32_t v : g_table)
    if (v >> block_len) throw std::invalid_argument("local strategy: g output exceeds block");
}

uint32_t LocalStrategy::apply_f(uint32_t in_block, uint32_t lambda_block) const {
  return f_table[uses_lambda ? (in_block | lambda_block << block_len) : in_block];
}

uint32_t LocalStrategy::apply_g(uint32_t in_block, uint32_t lambda_block) const {
  return g_table[uses_lambda ? (in_block | lambda_block << block_len) : in_block];
}

PrSample gen_pr(size_t n, const Seed& seed, const PrStrategy& strategy) {
  if (n < 1) throw std::invalid_argument("gen_pr: n must be >= 1");
  BitString a = random_bits(seed, kStreamA, n);
  BitString b = random_bits(seed, kStreamB, n);

  PrSample out;
  out.q.kind = SystemKind::pr;
  out.q.m = 2;

  if (std::holds_alternative<LocalStrategy>(strategy)) {
    const auto& strat = std::get<LocalStrategy>(strategy);
    strat.validate(n);
    BitString lambda;
    if (strat.uses_lambda) {
      if (strat.shared) {
        if (strat.shared->size() != n) throw BadBlockAlignment("shared λ length differs from n");
        lambda = *strat.shared;
      } else {
        lambda = random_bits(seed, kStreamLambda, n);
      }
    }
    BitString x(n), y(n);
    size_t rounds = n / strat.block_len;
    for (size_t r = 0; r < rounds; ++r) {
      uint32_t lam = strat.uses_lambda ? read_block(lambda, r, strat.block_len) : 0;
      write_block(x, r, strat.block_len, strat.apply_f(read_block(a, r, strat.block_len), lam));
      write_block(y, r, strat.block_len, strat.apply_g(read_block(b, r, strat.block_len), lam));
    }
    out.q.a = std::move(a);
    out.q.b = std::move(b);
    out.q.x = std::move(x);
    out.q.y = std::move(y);
    out.lambda = std::move(lambda);
    return out;
  }

  BitString x(n);
  if (std::holds_alternative<NonlocalUnbiased>(strategy)) {
    x = random_bits(seed, kStreamX, n);
  } else {
    double p = std::get<Biased>(strategy).p;
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("gen_pr: bias outside [0,1]");
    ChaChaStream st(seed, kStreamX);
    auto threshold = static_cast<uint64_t>(p * 4294967296.0);
    for (size_t i = 0; i < n; ++i)
      if ((st.next_u64() & 0xffffffffu) < threshold) x.set(i, true);
  }
  BitString y = bs_xor(x, bs_and(a, b));
  out.q.a = std::move(a);
  out.q.b = std::move(b);
  out.q.x = std::move(x);
  out.q.y = std::move(y);
  return out;
}

RelationCheck check_relation(const Quadruple& q) {
  q.validate();
  RelationCheck rc;
  size_t n = q.rounds();
  switch (q.kind) {
    case SystemKind::pr: {
      const auto &a = as_bits(q.a, "a"), &b = as_bits(q.b, "b"), &x = as_bits(q.x, "x"), &y = as_bits(q.y, "y");
      for (size_t i = 0; i < n; ++i) {
        if ((x.get(i) ^ y.get(i)) == (a.get(i) && b.get(i)))
          ++rc.ok_count;
        else
          rc.violations.push_back(static_cast<uint32_t>(i));
      }
      break;
    }
    case SystemKind::chained: {
      const auto &a = as_symbols(q.a, "a"), &b = as_symbols(q.b, "b");
      const auto &x = as_bits(q.x, "x"), &y = as_bits(q.y, "y");
      BitString chi = chained_indicator(a, b);
      for (size_t i = 0; i < n; ++i) {
        if ((x.get(i) ^ y.get(i)) == chi.get(i))
          ++rc.ok_count;
        else
          rc.violations.push_back(static_cast<uint32_t>(i));
      }
      break;
    }
    case SystemKind::magic_square: {
      const auto &a = as_symbols(q.a, "a"), &b = as_symbols(q.b, "b");
      const auto &x = as_symbols(q.x, "x"), &y = as_symbols(q.y, "y");
      for (size_t i = 0; i < n; ++i) {
        if (magic_win(a.get(i), b.get(i), x.get(i), y.get(i)))
          ++rc.ok_count;
        else
          rc.violations.push_back(static_cast<uint32_t>(i));
      }
      break;
    }
  }
  return rc;
}

NoSignalingReport test_no_signaling(const Quadruple& q, const Thresholds& th, const Compressor& c) {
  q.validate();
  BitString ab = track_bits(q.a) + track_bits(q.b);
  BitString xb = track_bits(q.x), yb = track_bits(q.y);
  NoSignalingReport r;
  r.x_given_a = estimate_K_cond(xb, track_bits(q.a), c);
  r.x_given_ab = estimate_K_cond(xb, ab, c);
  r.y_given_b = estimate_K_cond(yb, track_bits(q.b), c);
  r.y_given_ab = estimate_K_cond(yb, ab, c);
  r.alice = judge_approx_equal(r.x_given_a, r.x_given_ab, th);
  r.bob = judge_approx_equal(r.y_given_b, r.y_given_ab, th);
  r.overall = combine(r.alice, r.bob);
  return r;
}

LocalityReport test_locality(const Quadruple& q, const std::optional<HiddenVariable>& lambda, const Thresholds& th,
                             const Compressor& c) {
  q.validate();
  BitString a_bits = track_bits(q.a), b_bits = track_bits(q.b);
  BitString xb = track_bits(q.x), yb = track_bits(q.y);
  BitString inputs = a_bits + b_bits;

  LocalityReport rep;
  BitString cand;
  if (lambda.has_value()) {
    rep.certificate = "supplied-lambda";
    cand = lambda->lambda;
  } else {
    // Only the sufficient certificates are tried; λ := (x,y) realizes both.
    cand = xb + yb;
    if (judge_approx_zero(estimate_K(inputs, c), th).value)
      rep.certificate = "trivial-inputs";
    else if (judge_approx_zero(estimate_K(cand, c), th).value)
      rep.certificate = "trivial-outputs";
    else
      rep.certificate = "outputs-as-lambda";
  }
  if (cand.empty()) {
    // λ-free strategy data: an empty λ certifies locality iff both outputs
    // are computable from their local inputs alone.
    rep.independence = Verdict{true, th.eps_dep, true, "empty λ"};
  } else {
    rep.independence = judge_independent(inputs, cand, c, th);
  }
  rep.x_cond = judge_approx_zero(estimate_K_cond(xb, a_bits + cand, c), th);
  rep.y_cond = judge_approx_zero(estimate_K_cond(yb, b_bits + cand, c), th);
  bool ok = rep.independence.value && rep.x_cond.value && rep.y_cond.value;
  rep.status = ok ? LocalityStatus::local : LocalityStatus::not_certified;
  if (!ok && !lambda.has_value()) rep.certificate.clear();
  return rep;
}

namespace {

PrParallelResult parallel_value_impl(int r, bool use_parallel) {
  if (r != 1 && r != 2) throw TooLarge("pr_parallel_value: r must be 1 or 2");
  const uint32_t inputs = uint32_t{1} << r;            // points per side
  const uint32_t outs = uint32_t{1} << r;              // output block values
  uint64_t strategies = 1;
  for (uint32_t i = 0; i < inputs; ++i) strategies *= outs;  // outs^inputs

  auto table_of = [&](uint64_t idx) {
    std::array<uint32_t, 4> t{};
    for (uint32_t i = 0; i < inputs; ++i) {
      t[i] = static_cast<uint32_t>(idx % outs);
      idx /= outs;
    }
    return t;
  };

  uint32_t best = 0;
#ifdef KAUSAL_OPENMP
  #pragma omp parallel for schedule(dynamic) reduction(max : best) if (use_parallel)
#endif
  for (int64_t fi = 0; fi < static_cast<int64_t>(strategies); ++fi) {
    auto f = table_of(static_cast<uint64_t>(fi));
    for (uint64_t gi = 0; gi < strategies; ++gi) {
      auto g = table_of(gi);
      uint32_t count = 0;
      for (uint32_t a = 0; a < inputs; ++a)
        for (uint32_t b = 0; b < inputs; ++b)
          if ((f[a] ^ g[b]) == (a & b)) ++count;
      best = std::max(best, count);
    }
  }
#ifndef KAUSAL_OPENMP
  (void)use_parallel;
#endif
  PrParallelResult res;
  res.rounds = r;
  res.best_count = best;
  res.pairs_checked = strategies * strategies;
  return res;
}

}  // namespace

PrParallelResult pr_parallel_value(int r) { return parallel_value_impl(r, true); }
PrParallelResult pr_parallel_value_serial(int r) { return parallel_value_impl(r, false); }

Quadruple gen_chained(size_t n, uint16_t m, const Seed& seed, std::optional<double> error_rate) {
  if (m < 3) throw std::invalid_argument("gen_chained: m must be >= 3");
  double rate = error_rate.value_or(1.0 / (double(m) * double(m)));
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("gen_chained: error_rate outside [0,1)");

  ChaChaStream sa(seed, kStreamA);
  ChaChaStream sb(seed, kStreamB);
  ChaChaStream noise(seed, kStreamNoise);
  std::vector<uint16_t> av(n), bv(n);
  for (size_t i = 0; i < n; ++i) {
    av[i] = static_cast<uint16_t>(sa.next_below(m) + 1);
    bv[i] = sb.next_bit() ? promise_partner(av[i], m) : av[i];
  }
  SymbolString a(std::move(av), m), b(std::move(bv), m);
  BitString x = random_bits(seed, kStreamX, n);
  BitString y = bs_xor(x, chained_indicator(a, b));
  auto threshold = static_cast<uint64_t>(rate * 4294967296.0);
  for (size_t i = 0; i < n; ++i)
    if ((noise.next_u64() & 0xffffffffu) < threshold) y.flip(i);

  Quadruple q;
  q.kind = SystemKind::chained;
  q.m = m;
  q.a = std::move(a);
  q.b = std::move(b);
  q.x = std::move(x);
  q.y = std::move(y);
  return q;
}

BitString chained_indicator(const SymbolString& a, const SymbolString& b) {
  if (a.size() != b.size()) throw LengthMismatch("chained_indicator: lengths differ");
  if (a.alphabet() != b.alphabet()) throw std::invalid_argument("chained_indicator: alphabets differ");
  uint16_t m = a.alphabet();
  BitString chi(a.size());
  for (size_t i = 0; i < a.size(); ++i)
    if (a.get(i) == m && b.get(i) == 1) chi.set(i, true);
  return chi;
}

Quadruple gen_magic_square(size_t n, const Seed& seed, MagicStrategy strategy) {
  ChaChaStream sa(seed, kStreamA);
  ChaChaStream sb(seed, kStreamB);
  ChaChaStream free_bits(seed, kStreamX);
  std::vector<uint16_t> av(n), bv(n), xv(n), yv(n);

  if (strategy == MagicStrategy::best_deterministic) {
    MagicSquareValue v = magic_square_value();
    for (size_t i = 0; i < n; ++i) {
      av[i] = static_cast<uint16_t>(sa.next_below(3) + 1);
      bv[i] = static_cast<uint16_t>(sb.next_below(3) + 1);
      xv[i] = v.alice_table[av[i] - 1];
      yv[i] = v.bob_table[bv[i] - 1];
    }
  } else {
    for (size_t i = 0; i < n; ++i) {
      uint16_t a = static_cast<uint16_t>(sa.next_below(3) + 1);
      uint16_t b = static_cast<uint16_t>(sb.next_below(3) + 1);
      int v = free_bits.next_bit();
      int w1 = free_bits.next_bit();
      int w2 = free_bits.next_bit();
      // Alice's row: cell at column b is v, parity even; first free column
      // gets w1. Bob's column: cell at row a is v, parity odd; first free
      // row gets w2.
      std::array<int, 4> t{}, u{};
      t[b] = v;
      u[a] = v;
      int c1 = (b == 1) ? 2 : 1, c2 = (b == 3) ? 2 : 3;
      t[c1] = w1;
      t[c2] = w1 ^ v;
      int r1 = (a == 1) ? 2 : 1, r2 = (a == 3) ? 2 : 3;
      u[r1] = w2;
      u[r2] = w2 ^ 1 ^ v;
      av[i] = a;
      bv[i] = b;
      xv[i] = static_cast<uint16_t>(1 + (t[1] << 1 | t[2]));
      yv[i] = static_cast<uint16_t>(1 + (u[1] << 1 | u[2]));
    }
  }
  Quadruple q;
  q.kind = SystemKind::magic_square;
  q.m = 3;
  q.a = SymbolString(std::move(av), 3);
  q.b = SymbolString(std::move(bv), 3);
  q.x = SymbolString(std::move(xv), 4);
  q.y = SymbolString(std::move(yv), 4);
  return q;
}

MagicSquareValue magic_square_value() {
  MagicSquareValue best;
  for (uint32_t ai = 0; ai < 64; ++ai) {
    std::array<uint8_t, 3> at{static_cast<uint8_t>(1 + (ai & 3)), static_cast<uint8_t>(1 + ((ai >> 2) & 3)),
                              static_cast<uint8_t>(1 + ((ai >> 4) & 3))};
    for (uint32_t bi = 0; bi < 64; ++bi) {
      std::array<uint8_t, 3> bt{static_cast<uint8_t>(1 + (bi & 3)), static_cast<uint8_t>(1 + ((bi >> 2) & 3)),
                                static_cast<uint8_t>(1 + ((bi >> 4) & 3))};
      uint32_t wins = 0;
      for (uint16_t a = 1; a <= 3; ++a)
        for (uint16_t b = 1; b <= 3; ++b)
          if (magic_win(a, b, at[a - 1], bt[b - 1])) ++wins;
      if (wins > best.wins) {
        best.wins = wins;
        best.alice_table = at;
        best.bob_table = bt;
      }
    }
  }
  return best;
}

namespace {

std::string kind_name(SystemKind k) {
  switch (k) {
    case SystemKind::pr: return "pr";
    case SystemKind::chained: return "chained";
    case SystemKind::magic_square: return "magic_square";
  }
  return "?";
}

std::string track_line(const Track& t) {
  if (std::holds_alternative<BitString>(t)) return std::get<BitString>(t).to_ascii01();
  return std::get<SymbolString>(t).serialize();
}

Track parse_track(const std::string& line, bool bits, uint16_t alphabet) {
  if (bits) return BitString::parse_ascii01(line);
  return SymbolString::parse(line, alphabet);
}

}  // namespace

void write_quadruple(const std::string& path, const Quadruple& q,
                     const std::vector<std::pair<std::string, std::string>>& meta) {
  q.validate();
  ordered_json header;
  header["kind"] = kind_name(q.kind);
  header["m"] = q.m;
  header["n"] = q.rounds();
  for (const auto& [k, v] : meta) header[k] = v;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MalformedFile("cannot open for write: " + path);
  out << header.dump() << '\n'
      << track_line(q.a) << '\n'
      << track_line(q.b) << '\n'
      << track_line(q.x) << '\n'
      << track_line(q.y) << '\n';
  if (!out) throw MalformedFile("write failed: " + path);
}

Quadruple read_quadruple(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedFile("cannot open: " + path);
  std::string header_line;
  std::array<std::string, 4> lines;
  if (!std::getline(in, header_line)) throw MalformedFile("quadruple file: missing header");
  for (auto& l : lines)
    if (!std::getline(in, l)) throw MalformedFile("quadruple file: missing track line");

  ordered_json header = ordered_json::parse(header_line, nullptr, false);
  if (header.is_discarded() || !header.contains("kind") || !header.contains("m"))
    throw MalformedFile("quadruple file: bad header");
  std::string kind = header["kind"].get<std::string>();
  uint16_t m = header["m"].get<uint16_t>();

  Quadruple q;
  q.m = m;
  if (kind == "pr") {
    q.kind = SystemKind::pr;
    q.a = parse_track(lines[0], true, 2);
    q.b = parse_track(lines[1], true, 2);
    q.x = parse_track(lines[2], true, 2);
    q.y = parse_track(lines[3], true, 2);
  } else if (kind == "chained") {
    q.kind = SystemKind::chained;
    q.a = parse_track(lines[0], false, m);
    q.b = parse_track(lines[1], false, m);
    q.x = parse_track(lines[2], true, 2);
    q.y = parse_track(lines[3], true, 2);
  } else if (kind == "magic_square") {
    q.kind = SystemKind::magic_square;
    q.a = parse_track(lines[0], false, 3);
    q.b = parse_track(lines[1], false, 3);
    q.x = parse_track(lines[2], false, 4);
    q.y = parse_track(lines[3], false, 4);
  } else {
    throw MalformedFile("quadruple file: unknown kind " + kind);
  }
  q.validate();
  return q;
}

std::vector<LocalStrategy> bundled_local_strategies() {
  std::vector<LocalStrategy> out;
  out.push_back(LocalStrategy::unary(LocalOpKind::const0, LocalOpKind::const0));
  out.push_back(LocalStrategy::unary(LocalOpKind::const1, LocalOpKind::const1));
  out.push_back(LocalStrategy::unary(LocalOpKind::copy, LocalOpKind::copy));
  out.push_back(LocalStrategy::unary(LocalOpKind::negate, LocalOpKind::negate));
  out.push_back(LocalStrategy::unary(LocalOpKind::xor_lambda, LocalOpKind::xor_lambda));
  out.push_back(LocalStrategy::unary(LocalOpKind::copy_lambda, LocalOpKind::copy_lambda));
  out.push_back(LocalStrategy::unary(LocalOpKind::and_lambda, LocalOpKind::and_lambda));
  out.push_back(LocalStrategy::unary(LocalOpKind::or_lambda, LocalOpKind::or_lambda));
  out.push_back(LocalStrategy::unary(LocalOpKind::negate, LocalOpKind::xor_lambda));

  // Two-bit block tables: f = (a0⊕λ1, a1∧λ0), g = (b1, λ0⊕b0).
  std::vector<uint32_t> f(16), g(16);
  for (uint32_t idx = 0; idx < 16; ++idx) {
    uint32_t in = idx & 3u, lam = idx >> 2;
    uint32_t i0 = in & 1u, i1 = in >> 1, l0 = lam & 1u, l1 = lam >> 1;
    f[idx] = (i0 ^ l1) | ((i1 & l0) << 1);
    g[idx] = i1 | ((l0 ^ i0) << 1);
  }
  out.push_back(LocalStrategy::from_tables("block2-table", 2, true, std::move(f), std::move(g)));
  return out;
}

}  // namespace kausal

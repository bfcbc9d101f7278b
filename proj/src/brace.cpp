#include "braceforge/brace.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <sstream>
#include <unordered_set>

namespace braceforge {

std::string kind_name(BraceKind k) {
  switch (k) {
    case BraceKind::brace: return "brace";
    case BraceKind::pseudobrace: return "pseudobrace";
    default: return "unverified";
  }
}

// ---- Brace ----

Brace Brace::from_table(GroupShape shape, std::vector<u32> table,
                        BraceKind kind, std::string label) {
  Brace b;
  b.shape_ = std::make_shared<GroupShape>(std::move(shape));
  if (table.size() != b.shape_->order() * b.shape_->order())
    throw structural_error("Brace::from_table: table size mismatch");
  for (u32 e : table)
    if (e >= b.shape_->order())
      throw structural_error("Brace::from_table: entry out of range");
  b.table_ = std::make_shared<const std::vector<u32>>(std::move(table));
  b.kind_ = kind;
  b.label_ = std::move(label);
  return b;
}

Brace Brace::from_rule(GroupShape shape, std::function<u64(u64, u64)> rule,
                       BraceKind kind, std::string label) {
  Brace b;
  b.shape_ = std::make_shared<GroupShape>(std::move(shape));
  b.rule_ = std::move(rule);
  b.kind_ = kind;
  b.label_ = std::move(label);
  return b;
}

GElement Brace::circ(const GElement& a, const GElement& b) const {
  shape_->require_element(a);
  shape_->require_element(b);
  return shape_->element(circ(shape_->index_of(a), shape_->index_of(b)));
}

GElement Brace::star(const GElement& a, const GElement& b) const {
  return shape_->sub(shape_->sub(circ(a, b), a), b);
}

u64 Brace::circ_inv(u64 a) const {
  const u64 N = shape_->order();
  if (table_) {
    if (!inv_cache_) inv_cache_ = std::make_shared<std::vector<i64>>(N, -1);
    i64& slot = (*inv_cache_)[a];
    if (slot >= 0) return static_cast<u64>(slot);
    const u32* row = table_->data() + a * N;
    for (u64 x = 0; x < N; ++x) {
      if (row[x] == 0) {
        slot = static_cast<i64>(x);
        return x;
      }
    }
    throw structural_error("circ_inv: no inverse for " + shape_->str_idx(a));
  }
  // rule backing: a^{ord-1} is the inverse once a^{ord} = 0
  u64 cur = a, prev = 0;
  for (u64 t = 1; t <= N; ++t) {
    if (cur == 0) return prev;  // a^{t} = 0 -> inverse is a^{t-1}
    prev = cur;
    cur = circ(a, cur);
  }
  throw structural_error("circ_inv: ∘-powers of " + shape_->str_idx(a) +
                         " never reach 0");
}

u64 Brace::circ_pow(u64 a, i64 j) const {
  if (j == 0) return 0;
  u64 base = a;
  u64 e;
  if (j < 0) {
    base = circ_inv(a);
    e = static_cast<u64>(-j);
  } else {
    e = static_cast<u64>(j);
  }
  u64 result = 0;  // ∘-identity
  while (e) {
    if (e & 1) result = circ(result, base);
    base = circ(base, base);
    e >>= 1;
  }
  return result;
}

u64 Brace::circ_order(u64 a) const {
  const u64 N = shape_->order();
  u64 cur = a;
  for (u64 t = 1; t <= N; ++t) {
    if (cur == 0) return t;
    cur = circ(a, cur);
  }
  throw structural_error("circ_order: no finite ∘-order for " +
                         shape_->str_idx(a));
}

std::shared_ptr<const std::vector<u32>> Brace::dense_table(u64 cap) const {
  const u64 N = shape_->order();
  if (table_) return table_;
  if (N > cap)
    throw precondition_error("dense_table: order " + std::to_string(N) +
                             " exceeds cap " + std::to_string(cap));
  auto tab = std::make_shared<std::vector<u32>>(N * N);
  parallel_chunks(N, 64, [&](u64, u64 b, u64 e) {
    for (u64 a = b; a < e; ++a)
      for (u64 x = 0; x < N; ++x)
        (*tab)[a * N + x] = static_cast<u32>(rule_(a, x));
  });
  return tab;
}

// ---- reports ----

std::string BraceReport::summary() const {
  std::ostringstream os;
  os << (passed ? "passed" : "FAILED");
  os << (exhaustive ? " exhaustive" : " sampled=" + std::to_string(samples));
  if (!failures.empty()) {
    os << " first_failure=" << failures.front().axiom;
    os << " witness=";
    for (u64 w : failures.front().witness) os << w << ";";
  }
  return os.str();
}

namespace {

struct ChunkWitness {
  u64 chunk;
  AxiomFailure failure;
};

// Deterministic merge: the failure from the smallest chunk index wins.
void merge_witness(std::vector<std::optional<AxiomFailure>>& per_chunk,
                   BraceReport& rep) {
  for (auto& w : per_chunk) {
    if (w) {
      rep.failures.push_back(*w);
      rep.passed = false;
      return;
    }
  }
}

// Precomputed index add table for small orders; falls back to shape ops.
struct AddOps {
  const GroupShape& shape;
  std::vector<u32> add_table;
  bool have_table = false;

  explicit AddOps(const GroupShape& s, bool build) : shape(s) {
    const u64 N = s.order();
    if (build && N <= 2400) {
      add_table.resize(N * N);
      for (u64 a = 0; a < N; ++a)
        for (u64 b = 0; b < N; ++b)
          add_table[a * N + b] = static_cast<u32>(s.idx_add(a, b));
      have_table = true;
    }
  }
  u64 add(u64 a, u64 b) const {
    return have_table ? add_table[a * shape.order() + b] : shape.idx_add(a, b);
  }
};

}  // namespace

BraceReport verify_brace(const Brace& B, const Budget& budget,
                         bool fail_fast) {
  const GroupShape& shape = B.shape();
  const u64 N = shape.order();
  BraceReport rep;
  rep.seed = budget.seed;
  rep.passed = true;
  rep.exhaustive = budget.exhaustive_triples(N);

  // identity element 0
  for (u64 b = 0; b < N; ++b) {
    if (B.circ(0, b) != b || B.circ(b, 0) != b) {
      rep.passed = false;
      rep.failures.push_back({"identity", {b}, "0 is not a ∘-identity"});
      if (fail_fast) return rep;
      break;
    }
  }

  // inverses, two-sided (group axiom)
  if (rep.passed || !fail_fast) {
    for (u64 a = 0; a < N; ++a) {
      bool ok = false;
      if (B.table_backed()) {
        const u32* row = B.table().data() + a * N;
        for (u64 x = 0; x < N; ++x) {
          if (row[x] == 0 && B.circ(x, a) == 0) {
            ok = true;
            break;
          }
        }
      } else {
        try {
          u64 x = B.circ_inv(a);
          ok = B.circ(a, x) == 0 && B.circ(x, a) == 0;
        } catch (const structural_error&) {
          ok = false;
        }
      }
      if (!ok) {
        rep.passed = false;
        rep.failures.push_back({"inverse", {a}, "no two-sided ∘-inverse"});
        if (fail_fast) return rep;
        break;
      }
    }
  }

  const u64 grain = 4;
  if (rep.exhaustive) {
    auto tab = B.dense_table(std::max<u64>(Brace::kTableCap, N));
    const u32* T = tab->data();
    AddOps add(shape, true);
    std::atomic<bool> found{false};

    // distributivity via lambda additivity: T[a][b+c] - a == (T[a][b]-a) + (T[a][c]-a)
    {
      std::vector<std::optional<AxiomFailure>> wit(chunk_count(N, grain));
      parallel_chunks(N, grain, [&](u64 chunk, u64 abeg, u64 aend) {
        if (fail_fast && found.load(std::memory_order_relaxed)) return;
        std::vector<u32> lam(N);
        for (u64 a = abeg; a < aend; ++a) {
          const u32* row = T + a * N;
          for (u64 x = 0; x < N; ++x)
            lam[x] = static_cast<u32>(shape.idx_sub(row[x], a));
          for (u64 b = 0; b < N && !wit[chunk]; ++b) {
            for (u64 c = 0; c < N; ++c) {
              u64 bc = add.add(b, c);
              if (lam[bc] != add.add(lam[b], lam[c])) {
                wit[chunk] = AxiomFailure{
                    "distributivity", {a, b, c},
                    "a∘(b+c)+a != a∘b+a∘c"};
                found.store(true, std::memory_order_relaxed);
                break;
              }
            }
          }
          if (wit[chunk]) break;
        }
      });
      merge_witness(wit, rep);
      rep.checked_triples += N * N * N;
      if (!rep.passed && fail_fast) return rep;
    }

    // associativity
    {
      std::vector<std::optional<AxiomFailure>> wit(chunk_count(N, grain));
      parallel_chunks(N, grain, [&](u64 chunk, u64 abeg, u64 aend) {
        if (fail_fast && found.load(std::memory_order_relaxed)) return;
        for (u64 a = abeg; a < aend; ++a) {
          const u32* rowa = T + a * N;
          for (u64 b = 0; b < N && !wit[chunk]; ++b) {
            const u32* rowab = T + static_cast<u64>(rowa[b]) * N;
            const u32* rowb = T + b * N;
            for (u64 c = 0; c < N; ++c) {
              if (rowab[c] != rowa[rowb[c]]) {
                wit[chunk] = AxiomFailure{"associativity", {a, b, c},
                                          "(a∘b)∘c != a∘(b∘c)"};
                found.store(true, std::memory_order_relaxed);
                break;
              }
            }
          }
          if (wit[chunk]) break;
        }
      });
      merge_witness(wit, rep);
      rep.checked_triples += N * N * N;
    }
  } else {
    rep.samples = budget.samples;
    const u64 S = budget.samples;
    std::vector<std::optional<AxiomFailure>> wit(chunk_count(S, 4096));
    parallel_chunks(S, 4096, [&](u64 chunk, u64 beg, u64 end) {
      for (u64 t = beg; t < end && !wit[chunk]; ++t) {
        u64 a = rng_below(rng_stream(budget.seed, 3 * t), N);
        u64 b = rng_below(rng_stream(budget.seed, 3 * t + 1), N);
        u64 c = rng_below(rng_stream(budget.seed, 3 * t + 2), N);
        if (B.circ(B.circ(a, b), c) != B.circ(a, B.circ(b, c)))
          wit[chunk] =
              AxiomFailure{"associativity", {a, b, c}, "(a∘b)∘c != a∘(b∘c)"};
        else {
          u64 lhs = shape.idx_add(B.circ(a, shape.idx_add(b, c)), a);
          u64 rhs = shape.idx_add(B.circ(a, b), B.circ(a, c));
          if (lhs != rhs)
            wit[chunk] = AxiomFailure{"distributivity", {a, b, c},
                                      "a∘(b+c)+a != a∘b+a∘c"};
        }
      }
    });
    merge_witness(wit, rep);
    rep.checked_triples = S;
  }

  if (rep.passed && N <= Brace::kTableCap) {
    LeftSeries ls = left_series(B);
    rep.series_length = static_cast<unsigned>(ls.terms.size());
    if (!ls.reached_zero) {
      rep.passed = false;
      rep.failures.push_back(
          {"left_series", {}, "A^{n+1} != 0 (series stabilized above 0)"});
    }
  }
  return rep;
}

// ---- spans and the left series ----

Span close_span(const GroupShape& shape, std::vector<u64> gens) {
  const u64 N = shape.order();
  Span s;
  constexpr u64 kSpanCap = u64(1) << 22;
  const bool small = N <= (u64(1) << 25);
  std::vector<bool> visited;
  std::unordered_set<u64> vset;
  auto seen = [&](u64 x) {
    return small ? bool(visited[x]) : vset.count(x) > 0;
  };
  auto mark = [&](u64 x) {
    if (small)
      visited[x] = true;
    else
      vset.insert(x);
  };
  if (small) visited.assign(N, false);
  s.elements.push_back(0);
  mark(0);
  std::vector<u64> stack;
  for (u64 g : gens) {
    if (seen(g)) continue;
    s.generators.push_back(g);
    s.elements.push_back(g);
    mark(g);
    stack.assign(s.elements.begin(), s.elements.end());
    while (!stack.empty()) {
      u64 e = stack.back();
      stack.pop_back();
      for (u64 h : s.generators) {
        u64 f = shape.idx_add(e, h);
        if (!seen(f)) {
          mark(f);
          s.elements.push_back(f);
          stack.push_back(f);
          if (s.elements.size() > kSpanCap)
            throw precondition_error("close_span: span exceeds cap");
        }
      }
    }
  }
  std::sort(s.elements.begin(), s.elements.end());
  return s;
}

LeftSeries left_series(const Brace& B, u64 left_cap, u64 sample_left,
                       u64 seed) {
  const GroupShape& shape = B.shape();
  const u64 N = shape.order();
  LeftSeries ls;

  Span full;
  for (unsigned i = 0; i < shape.rank(); ++i)
    full.generators.push_back(shape.index_of(shape.basis(i)));
  ls.terms.push_back(full);

  const bool all_left = N <= left_cap;
  ls.sampled_left_factors = !all_left;

  std::vector<u64> cur_gens = full.generators;
  u64 prev_size = N;
  const unsigned bound = shape.exponent_sum() + 2;
  for (unsigned step = 0; step < bound; ++step) {
    std::vector<u64> products;
    if (all_left) {
      for (u64 a = 0; a < N; ++a)
        for (u64 x : cur_gens) products.push_back(B.star(a, x));
    } else {
      for (u64 t = 0; t < sample_left; ++t) {
        u64 a = rng_below(rng_stream(seed, t), N);
        for (u64 x : cur_gens) products.push_back(B.star(a, x));
      }
      // always include the basis among left factors
      for (unsigned i = 0; i < shape.rank(); ++i)
        for (u64 x : cur_gens)
          products.push_back(B.star(shape.index_of(shape.basis(i)), x));
    }
    Span span = close_span(shape, std::move(products));
    ls.terms.push_back(span);
    if (span.is_zero()) {
      ls.reached_zero = true;
      break;
    }
    if (span.size() == prev_size) break;  // stabilized above zero
    prev_size = span.size();
    cur_gens = ls.terms.back().generators;
  }
  return ls;
}

// ---- ideals and quotients ----

IdealReport is_ideal(const Brace& B, const BoxSubgroup& S, const Budget& budget,
                     bool pseudo_clause) {
  const GroupShape& shape = B.shape();
  const u64 N = shape.order();
  const u64 M = S.subgroup_order();
  IdealReport rep;

  u128 pair_work = static_cast<u128>(N) * M;
  bool exhaustive = pair_work <= budget.max_triples;
  rep.exhaustive = exhaustive;

  auto test_pair = [&](u64 i_idx, u64 a,
                       std::optional<AxiomFailure>& wit) -> bool {
    if (!S.contains_idx(B.star(i_idx, a))) {
      wit = AxiomFailure{"ideal_i*a", {i_idx, a}, "i*a not in S"};
      return false;
    }
    if (!S.contains_idx(B.star(a, i_idx))) {
      wit = AxiomFailure{"ideal_a*i", {a, i_idx}, "a*i not in S"};
      return false;
    }
    return true;
  };

  if (exhaustive) {
    const u64 total = M * N;
    const u64 grain = 1 << 15;
    std::vector<std::optional<AxiomFailure>> wit(chunk_count(total, grain));
    parallel_chunks(total, grain, [&](u64 chunk, u64 beg, u64 end) {
      u64 cur_t = total;  // sentinel
      u64 i_idx = 0;
      for (u64 pair = beg; pair < end; ++pair) {
        u64 t = pair / N;
        if (t != cur_t) {
          cur_t = t;
          i_idx = shape.index_of(S.member(t));
        }
        if (!test_pair(i_idx, pair % N, wit[chunk])) return;
      }
    });
    for (auto& w : wit)
      if (w) {
        rep.is_ideal = false;
        rep.witness = *w;
        break;
      }
  } else {
    std::optional<AxiomFailure> w;
    for (u64 t = 0; t < budget.samples && rep.is_ideal; ++t) {
      u64 i_idx =
          shape.index_of(S.member(rng_below(rng_stream(budget.seed, 2 * t), M)));
      u64 a = rng_below(rng_stream(budget.seed, 2 * t + 1), N);
      if (!test_pair(i_idx, a, w)) {
        rep.is_ideal = false;
        rep.witness = w;
      }
    }
  }

  if (rep.is_ideal && pseudo_clause) {
    // (a+i)*(b+j) - a*b in S
    u128 quad = static_cast<u128>(N) * N * M * M;
    bool ex4 = quad <= budget.max_triples;
    rep.exhaustive = rep.exhaustive && ex4;
    u64 count = ex4 ? 0 : budget.samples;
    auto test_quad = [&](u64 a, u64 b, u64 ii, u64 jj) -> bool {
      u64 lhs = B.star(shape.idx_add(a, ii), shape.idx_add(b, jj));
      u64 d = shape.idx_sub(lhs, B.star(a, b));
      if (!S.contains_idx(d)) {
        rep.witness = AxiomFailure{
            "ideal_pseudo", {a, b, ii, jj}, "(a+i)*(b+j)-a*b not in S"};
        return false;
      }
      return true;
    };
    if (ex4) {
      for (u64 a = 0; a < N && rep.is_ideal; ++a)
        for (u64 b = 0; b < N && rep.is_ideal; ++b)
          for (u64 ti = 0; ti < M && rep.is_ideal; ++ti)
            for (u64 tj = 0; tj < M; ++tj) {
              if (!test_quad(a, b, shape.index_of(S.member(ti)),
                             shape.index_of(S.member(tj)))) {
                rep.is_ideal = false;
                break;
              }
            }
    } else {
      for (u64 t = 0; t < count && rep.is_ideal; ++t) {
        u64 a = rng_below(rng_stream(budget.seed, 4 * t), N);
        u64 b = rng_below(rng_stream(budget.seed, 4 * t + 1), N);
        u64 ii =
            shape.index_of(S.member(rng_below(rng_stream(budget.seed, 4 * t + 2), M)));
        u64 jj =
            shape.index_of(S.member(rng_below(rng_stream(budget.seed, 4 * t + 3), M)));
        if (!test_quad(a, b, ii, jj)) rep.is_ideal = false;
      }
    }
  }
  return rep;
}

Brace quotient(const Brace& B, const BoxSubgroup& I, const Budget& budget,
               bool skip_check) {
  B.shape().require_same(I.shape());
  if (!skip_check) {
    IdealReport ir =
        is_ideal(B, I, budget, B.kind() == BraceKind::pseudobrace);
    if (!ir.is_ideal)
      throw precondition_error("quotient: subgroup is not an ideal (" +
                               ir.witness->axiom + ")");
  }
  GroupShape qshape = I.quotient_shape();
  auto parent = std::make_shared<Brace>(B);
  auto box = std::make_shared<BoxSubgroup>(I);
  auto qs = std::make_shared<GroupShape>(qshape);
  auto rule = [parent, box, qs](u64 x, u64 y) -> u64 {
    u64 px = box->lift_idx(*qs, x);
    u64 py = box->lift_idx(*qs, y);
    return box->project_idx(*qs, parent->circ(px, py));
  };
  Brace Q = Brace::from_rule(qshape, rule, B.kind(), B.label() + "/box");
  if (qshape.order() <= Brace::kTableCap) {
    auto tab = Q.dense_table();
    return Brace::from_table(qshape, std::vector<u32>(*tab), B.kind(),
                             B.label() + "/box");
  }
  return Q;
}

Brace sub_pk(const Brace& B, unsigned k, const Budget& budget) {
  const GroupShape& shape = B.shape();
  const u64 pk = ipow(shape.p(), k);
  std::vector<unsigned> sub_exps;
  std::vector<unsigned> kept;
  for (unsigned i = 0; i < shape.rank(); ++i) {
    if (shape.exponents()[i] > k) {
      sub_exps.push_back(shape.exponents()[i] - k);
      kept.push_back(i);
    }
  }
  GroupShape sshape(shape.p(), sub_exps);
  auto parent = std::make_shared<Brace>(B);
  auto pshape = std::make_shared<GroupShape>(shape);
  auto keep = std::make_shared<std::vector<unsigned>>(kept);

  auto embed = [pshape, keep, pk](const GroupShape& ss, u64 s) -> u64 {
    GElement d = ss.element(s);
    GElement x = pshape->zero();
    for (unsigned t = 0; t < keep->size(); ++t) x[(*keep)[t]] = d[t] * pk;
    return pshape->index_of(x);
  };
  auto retract = [pshape, keep, pk](const GroupShape& ss, u64 x) -> u64 {
    GElement c = pshape->element(x);
    GElement d(ss.rank());
    for (unsigned t = 0; t < keep->size(); ++t) {
      if (c[(*keep)[t]] % pk != 0)
        throw precondition_error("sub_pk: ∘ left p^kA at element " +
                                 pshape->str(c));
    d[t] = c[(*keep)[t]] / pk;
    }
    for (unsigned i = 0; i < pshape->rank(); ++i) {
      bool is_kept = false;
      for (unsigned kk : *keep) is_kept |= (kk == i);
      if (!is_kept && c[i] != 0)
        throw precondition_error("sub_pk: ∘ left p^kA (dead coordinate)");
    }
    return ss.index_of(d);
  };

  auto sss = std::make_shared<GroupShape>(sshape);
  auto rule = [parent, embed, retract, sss](u64 a, u64 b) -> u64 {
    return retract(*sss, parent->circ(embed(*sss, a), embed(*sss, b)));
  };
  Brace S = Brace::from_rule(sshape, rule, B.kind(),
                             B.label() + "|p^" + std::to_string(k));

  // closure spot check
  const u64 NS = sshape.order();
  u64 checks = std::min<u64>(NS * NS, std::max<u64>(budget.samples, 1024));
  bool exhaustive = NS * NS <= checks;
  for (u64 t = 0; t < checks; ++t) {
    u64 a, b;
    if (exhaustive) {
      a = t / NS;
      b = t % NS;
    } else {
      a = rng_below(rng_stream(budget.seed, 2 * t), NS);
      b = rng_below(rng_stream(budget.seed, 2 * t + 1), NS);
    }
    S.circ(a, b);  // throws precondition_error on closure failure
  }
  if (NS <= Brace::kTableCap) {
    auto tab = S.dense_table();
    return Brace::from_table(sshape, std::vector<u32>(*tab), B.kind(),
                             S.label());
  }
  return S;
}

// ---- verify_pseudobrace ----

BraceReport verify_pseudobrace(const Brace& B, const Budget& budget) {
  const GroupShape& shape = B.shape();
  const u64 N = shape.order();
  BraceReport rep;
  rep.seed = budget.seed;
  rep.passed = true;
  rep.exhaustive = budget.exhaustive_triples(N);

  std::shared_ptr<const std::vector<u32>> tab;
  if (N <= Brace::kTableCap) tab = B.dense_table();
  auto circ = [&](u64 a, u64 b) {
    return tab ? (*tab)[a * N + b] : B.circ(a, b);
  };

  // axiom 2: every element has a ∘-inverse
  std::vector<u64> sample_elems;
  bool elems_exhaustive = N <= Brace::kTableCap || rep.exhaustive;
  if (elems_exhaustive) {
    sample_elems.resize(N);
    for (u64 a = 0; a < N; ++a) sample_elems[a] = a;
  } else {
    for (u64 t = 0; t < std::min<u64>(budget.samples, 2048); ++t)
      sample_elems.push_back(rng_below(rng_stream(budget.seed, t), N));
    rep.exhaustive = false;
  }

  // axiom 3 window cap for sampled structures
  const u64 window_cap = elems_exhaustive ? N : 64;

  for (u64 a : sample_elems) {
    // ∘-order via the defining left chain
    u64 ord = 0;
    {
      u64 cur = a;
      for (u64 t = 1; t <= N; ++t) {
        if (cur == 0) {
          ord = t;
          break;
        }
        cur = circ(a, cur);
      }
    }
    if (ord == 0) {
      rep.passed = false;
      rep.failures.push_back({"axiom2", {a}, "∘-powers never reach 0"});
      break;
    }
    u64 w = std::min<u64>(ord, window_cap);
    std::vector<u64> pow_pos(w + 1), pow_neg(w + 1);
    pow_pos[0] = 0;
    for (u64 t = 1; t <= w; ++t) pow_pos[t] = circ(a, pow_pos[t - 1]);
    u64 ainv = 0;
    bool have_inv = false;
    if (ord >= 1) {
      // a^{∘ ord-1} is a candidate inverse
      u64 cand = (ord == 1) ? 0 : pow_pos[std::min<u64>(w, ord - 1)];
      if (ord - 1 <= w && circ(a, cand) == 0) {
        ainv = cand;
        have_inv = true;
      } else {
        // long orders: walk
        u64 cur = a, prev = 0;
        for (u64 t = 1; t <= N; ++t) {
          if (cur == 0) {
            ainv = prev;
            have_inv = true;
            break;
          }
          prev = cur;
          cur = circ(a, cur);
        }
      }
    }
    if (!have_inv || circ(a, ainv) != 0) {
      rep.passed = false;
      rep.failures.push_back({"axiom2", {a}, "no ∘-inverse"});
      break;
    }
    pow_neg[0] = 0;
    if (w >= 1) pow_neg[1] = ainv;
    for (u64 t = 2; t <= w; ++t) pow_neg[t] = circ(ainv, pow_neg[t - 1]);

    auto pow_at = [&](i64 i) {
      return i >= 0 ? pow_pos[static_cast<u64>(i)]
                    : pow_neg[static_cast<u64>(-i)];
    };
    // power law: a^{∘i} ∘ a^{∘j} = a^{∘ i+j} within the window
    i64 W = static_cast<i64>(w);
    bool bad = false;
    for (i64 i = -W; i <= W && !bad; ++i) {
      for (i64 j = -W; j <= W; ++j) {
        if (i + j < -W || i + j > W) continue;
        if (circ(pow_at(i), pow_at(j)) != pow_at(i + j)) {
          rep.passed = false;
          rep.failures.push_back(
              {"axiom3_powers",
               {a, static_cast<u64>(i + W), static_cast<u64>(j + W)},
               "a^{∘i}∘a^{∘j} != a^{∘i+j}"});
          bad = true;
          break;
        }
      }
    }
    if (bad) break;
    // a^{∘i} ∘ b equals the i-fold left product
    u64 bcount = elems_exhaustive ? N : 16;
    for (u64 bt = 0; bt < bcount && !bad; ++bt) {
      u64 b = elems_exhaustive
                  ? bt
                  : rng_below(rng_stream(budget.seed ^ a, bt), N);
      u64 cur = b;
      for (u64 i = 1; i <= w; ++i) {
        cur = circ(a, cur);
        if (circ(pow_pos[i], b) != cur) {
          rep.passed = false;
          rep.failures.push_back({"axiom3_leftfold", {a, i, b},
                                  "a^{∘i}∘b != a∘(a∘(...∘b))"});
          bad = true;
          break;
        }
      }
    }
    if (bad) break;
  }
  if (!rep.passed) return rep;

  // axiom 4: A^{n+1} = 0
  bool series_ok = true;
  try {
    LeftSeries ls = left_series(B);
    rep.series_length = static_cast<unsigned>(ls.terms.size());
    series_ok = ls.reached_zero &&
                ls.terms.size() <= shape.exponent_sum() + 2;
    if (ls.sampled_left_factors) rep.note += "series_left_factors=sampled;";
    if (!series_ok)
      rep.failures.push_back({"axiom4", {}, "left series did not reach 0"});
  } catch (const precondition_error&) {
    // span too large: sampled product check
    rep.note += "axiom4=sampled_products;";
    unsigned len = shape.exponent_sum() + 1;
    for (u64 t = 0; t < std::min<u64>(budget.samples, 20000); ++t) {
      u64 cur = rng_below(rng_stream(budget.seed, t * (len + 1)), N);
      for (unsigned d = 1; d <= len; ++d) {
        u64 a = rng_below(rng_stream(budget.seed, t * (len + 1) + d), N);
        cur = B.star(a, cur);
      }
      if (cur != 0) {
        series_ok = false;
        rep.failures.push_back(
            {"axiom4", {cur}, "(n+1)-fold left product nonzero"});
        break;
      }
    }
    rep.exhaustive = false;
  }
  if (!series_ok) {
    rep.passed = false;
    return rep;
  }

  // axiom 5: a*(b+c) = a*b + a*c
  if (rep.exhaustive && tab) {
    const u32* T = tab->data();
    AddOps add(shape, true);
    std::vector<std::optional<AxiomFailure>> wit(chunk_count(N, 4));
    parallel_chunks(N, 4, [&](u64 chunk, u64 abeg, u64 aend) {
      std::vector<u32> lam(N);
      for (u64 a = abeg; a < aend; ++a) {
        const u32* row = T + a * N;
        for (u64 x = 0; x < N; ++x)
          lam[x] = static_cast<u32>(shape.idx_sub(row[x], a));
        for (u64 b = 0; b < N && !wit[chunk]; ++b)
          for (u64 c = 0; c < N; ++c) {
            if (lam[add.add(b, c)] != add.add(lam[b], lam[c])) {
              wit[chunk] =
                  AxiomFailure{"axiom5", {a, b, c}, "a*(b+c) != a*b+a*c"};
              break;
            }
          }
        if (wit[chunk]) break;
      }
    });
    merge_witness(wit, rep);
    rep.checked_triples += N * N * N;
  } else {
    rep.exhaustive = false;
    rep.samples = std::max(rep.samples, budget.samples);
    std::vector<std::optional<AxiomFailure>> wit(
        chunk_count(budget.samples, 4096));
    parallel_chunks(budget.samples, 4096, [&](u64 chunk, u64 beg, u64 end) {
      for (u64 t = beg; t < end && !wit[chunk]; ++t) {
        u64 a = rng_below(rng_stream(budget.seed, 3 * t), N);
        u64 b = rng_below(rng_stream(budget.seed, 3 * t + 1), N);
        u64 c = rng_below(rng_stream(budget.seed, 3 * t + 2), N);
        u64 lhs = B.star(a, shape.idx_add(b, c));
        u64 rhs = shape.idx_add(B.star(a, b), B.star(a, c));
        if (lhs != rhs)
          wit[chunk] = AxiomFailure{"axiom5", {a, b, c}, "a*(b+c) != a*b+a*c"};
      }
    });
    merge_witness(wit, rep);
  }
  return rep;
}

// ---- odot ----

OdotOp::OdotOp(const Brace& B, unsigned k, PullbackChoice choice)
    : B_(B),
      k_(k),
      choice_(choice),
      box_(annihilator(B.shape(), 2 * k)),
      qshape_(box_.quotient_shape()) {
  if (k == 0) throw precondition_error("odot: k must be positive");
}

u64 OdotOp::eval(u64 qx, u64 qy) const {
  return eval_reps(box_.lift_idx(qshape_, qx), box_.lift_idx(qshape_, qy));
}

u64 OdotOp::eval_reps(u64 px, u64 py) const {
  const GroupShape& shape = B_.shape();
  u64 pk = ipow(shape.p(), k_);
  u64 u = shape.idx_smul(static_cast<i64>(pk), px);
  u64 s = B_.star(u, py);
  u64 w = wp_inv_idx(shape, s, k_, choice_);
  return box_.project_idx(qshape_, w);
}

void OdotOp::check_preconditions(const Budget& budget) const {
  const GroupShape& shape = B_.shape();
  BoxSubgroup pkA = p_power_subgroup(shape, k_);
  BoxSubgroup annk = annihilator(shape, k_);
  bool pseudo = B_.kind() == BraceKind::pseudobrace;
  for (const BoxSubgroup* S : {static_cast<const BoxSubgroup*>(&pkA),
                               static_cast<const BoxSubgroup*>(&annk), &box_}) {
    IdealReport ir = is_ideal(B_, *S, budget, pseudo);
    if (!ir.is_ideal)
      throw precondition_error("odot: required subgroup is not an ideal: " +
                               ir.witness->axiom);
  }
  // (p^kA) * ann(p^{2k}) ⊆ ann(p^k)
  u64 M1 = pkA.subgroup_order(), M2 = box_.subgroup_order();
  bool exhaustive = static_cast<u128>(M1) * M2 <= budget.max_triples;
  u64 total = exhaustive ? M1 * M2 : budget.samples;
  for (u64 t = 0; t < total; ++t) {
    u64 i1 = exhaustive ? t / M2 : rng_below(rng_stream(budget.seed, 2 * t), M1);
    u64 i2 = exhaustive ? t % M2
                        : rng_below(rng_stream(budget.seed, 2 * t + 1), M2);
    u64 u = shape.index_of(pkA.member(i1));
    u64 v = shape.index_of(box_.member(i2));
    if (!annk.contains_idx(B_.star(u, v)))
      throw precondition_error(
          "odot: (p^kA)*ann(p^{2k}) not contained in ann(p^k), witness " +
          shape.str_idx(u) + "*" + shape.str_idx(v));
  }
}

WitnessReport verify_odot_representatives(const OdotOp& op,
                                          const Budget& budget) {
  WitnessReport rep;
  const GroupShape& qs = op.qshape();
  const BoxSubgroup& box = op.modulus();
  const GroupShape& shape = box.shape();
  u64 Q = qs.order();
  u64 F = box.subgroup_order();
  u128 work = static_cast<u128>(Q) * Q * F * F;
  rep.exhaustive = work <= budget.max_triples;

  auto run_one = [&](u64 qx, u64 qy, u64 tx, u64 ty) -> bool {
    u64 base = op.eval(qx, qy);
    u64 px = shape.idx_add(box.lift_idx(qs, qx), shape.index_of(box.member(tx)));
    u64 py = shape.idx_add(box.lift_idx(qs, qy), shape.index_of(box.member(ty)));
    u64 got = op.eval_reps(px, py);
    if (got != base) {
      rep.passed = false;
      rep.witness = AxiomFailure{
          "odot_representatives", {qx, qy, px, py},
          "⊙ value depends on the coset representative"};
      return false;
    }
    return true;
  };

  if (rep.exhaustive) {
    for (u64 qx = 0; qx < Q; ++qx)
      for (u64 qy = 0; qy < Q; ++qy)
        for (u64 tx = 0; tx < F; ++tx)
          for (u64 ty = 0; ty < F; ++ty)
            if (!run_one(qx, qy, tx, ty)) return rep;
  } else {
    rep.samples = budget.samples;
    for (u64 t = 0; t < budget.samples; ++t) {
      u64 qx = rng_below(rng_stream(budget.seed, 4 * t), Q);
      u64 qy = rng_below(rng_stream(budget.seed, 4 * t + 1), Q);
      u64 tx = rng_below(rng_stream(budget.seed, 4 * t + 2), F);
      u64 ty = rng_below(rng_stream(budget.seed, 4 * t + 3), F);
      if (!run_one(qx, qy, tx, ty)) return rep;
    }
  }
  return rep;
}

WitnessReport verify_odot_choices(const Brace& B, unsigned k,
                                  const std::vector<u64>& offset_seeds,
                                  const Budget& budget) {
  WitnessReport rep;
  OdotOp base(B, k, PullbackChoice::canonical());
  u64 Q = base.qshape().order();
  rep.exhaustive = static_cast<u128>(Q) * Q <= budget.max_triples;
  u64 total = rep.exhaustive ? Q * Q : budget.samples;
  if (!rep.exhaustive) rep.samples = budget.samples;
  for (u64 seed : offset_seeds) {
    OdotOp other(B, k, PullbackChoice::offset(seed));
    for (u64 t = 0; t < total; ++t) {
      u64 qx = rep.exhaustive ? t / Q : rng_below(rng_stream(budget.seed, 2 * t), Q);
      u64 qy = rep.exhaustive ? t % Q
                              : rng_below(rng_stream(budget.seed, 2 * t + 1), Q);
      if (base.eval(qx, qy) != other.eval(qx, qy)) {
        rep.passed = false;
        rep.witness = AxiomFailure{
            "odot_choice", {qx, qy, seed},
            "⊙ value depends on the pullback choice"};
        return rep;
      }
    }
  }
  return rep;
}

// ---- Yang-Baxter ----

std::pair<u64, u64> yb_solution(const Brace& B, u64 x, u64 y) {
  const GroupShape& shape = B.shape();
  u64 u = shape.idx_sub(B.circ(x, y), x);
  u64 z = B.circ_inv(u);
  return {u, B.circ(z, x)};
}

YbReport verify_ybe(const Brace& B, const Budget& budget) {
  const GroupShape& shape = B.shape();
  const u64 N = shape.order();
  YbReport rep;
  rep.exhaustive = budget.exhaustive_triples(N);

  std::vector<u32> ru, rv;
  bool have_tables = N <= Brace::kTableCap;
  if (have_tables) {
    ru.resize(N * N);
    rv.resize(N * N);
    for (u64 x = 0; x < N; ++x)
      for (u64 y = 0; y < N; ++y) {
        auto [u, v] = yb_solution(B, x, y);
        ru[x * N + y] = static_cast<u32>(u);
        rv[x * N + y] = static_cast<u32>(v);
      }
  }
  auto r = [&](u64 x, u64 y) -> std::pair<u64, u64> {
    if (have_tables) return {ru[x * N + y], rv[x * N + y]};
    return yb_solution(B, x, y);
  };

  // involutivity
  u64 pair_total = rep.exhaustive || have_tables ? N * N : budget.samples;
  bool pairs_exhaustive = rep.exhaustive || have_tables;
  for (u64 t = 0; t < pair_total; ++t) {
    u64 x = pairs_exhaustive ? t / N : rng_below(rng_stream(budget.seed, 2 * t), N);
    u64 y = pairs_exhaustive ? t % N
                             : rng_below(rng_stream(budget.seed, 2 * t + 1), N);
    auto [u, v] = r(x, y);
    auto [x2, y2] = r(u, v);
    if (x2 != x || y2 != y) {
      rep.involutive = false;
      rep.witness = AxiomFailure{"ybe_involutive", {x, y}, "r(r(x,y)) != (x,y)"};
      return rep;
    }
  }

  auto braid_at = [&](u64 x, u64 y, u64 z) -> bool {
    // r12 r23 r12 (x,y,z)
    auto [l1, l2] = r(x, y);
    auto [l3, l4] = r(l2, z);
    auto [l5, l6] = r(l1, l3);
    // r23 r12 r23 (x,y,z)
    auto [m1, m2] = r(y, z);
    auto [m3, m4] = r(x, m1);
    auto [m5, m6] = r(m4, m2);
    return l5 == m3 && l6 == m5 && l4 == m6;
  };

  if (rep.exhaustive) {
    std::vector<std::optional<AxiomFailure>> wit(chunk_count(N, 4));
    parallel_chunks(N, 4, [&](u64 chunk, u64 beg, u64 end) {
      for (u64 x = beg; x < end && !wit[chunk]; ++x)
        for (u64 y = 0; y < N && !wit[chunk]; ++y)
          for (u64 z = 0; z < N; ++z)
            if (!braid_at(x, y, z)) {
              wit[chunk] = AxiomFailure{"ybe_braid", {x, y, z},
                                        "braid relation fails"};
              break;
            }
    });
    for (auto& w : wit)
      if (w) {
        rep.braid = false;
        rep.witness = *w;
        break;
      }
  } else {
    rep.samples = budget.samples;
    for (u64 t = 0; t < budget.samples; ++t) {
      u64 x = rng_below(rng_stream(budget.seed, 3 * t), N);
      u64 y = rng_below(rng_stream(budget.seed, 3 * t + 1), N);
      u64 z = rng_below(rng_stream(budget.seed, 3 * t + 2), N);
      if (!braid_at(x, y, z)) {
        rep.braid = false;
        rep.witness = AxiomFailure{"ybe_braid", {x, y, z}, "braid relation fails"};
        break;
      }
    }
  }
  return rep;
}

}  // namespace braceforge

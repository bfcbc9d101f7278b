#include "braceforge/prelie.hpp"

#include <algorithm>

namespace braceforge {

// ---- PreLie ----

PreLie PreLie::from_table(GroupShape shape, std::vector<u32> table,
                          std::string label, bool verified) {
  PreLie P;
  P.shape_ = std::make_shared<GroupShape>(std::move(shape));
  if (table.size() != P.shape_->order() * P.shape_->order())
    throw structural_error("PreLie::from_table: table size mismatch");
  P.table_ = std::make_shared<const std::vector<u32>>(std::move(table));
  P.label_ = std::move(label);
  P.verified_ = verified;
  return P;
}

PreLie PreLie::from_rule(GroupShape shape, std::function<u64(u64, u64)> rule,
                         std::string label, bool verified) {
  PreLie P;
  P.shape_ = std::make_shared<GroupShape>(std::move(shape));
  P.rule_ = std::move(rule);
  P.label_ = std::move(label);
  P.verified_ = verified;
  return P;
}

GElement PreLie::dot(const GElement& a, const GElement& b) const {
  shape_->require_element(a);
  shape_->require_element(b);
  return shape_->element(dot(shape_->index_of(a), shape_->index_of(b)));
}

std::shared_ptr<const std::vector<u32>> PreLie::dense_table(u64 cap) const {
  const u64 N = shape_->order();
  if (table_) return table_;
  if (N > cap)
    throw precondition_error("PreLie::dense_table: order exceeds cap");
  auto tab = std::make_shared<std::vector<u32>>(N * N);
  parallel_chunks(N, 64, [&](u64, u64 b, u64 e) {
    for (u64 a = b; a < e; ++a)
      for (u64 x = 0; x < N; ++x)
        (*tab)[a * N + x] = static_cast<u32>(rule_(a, x));
  });
  return tab;
}

// ---- verification ----

BraceReport verify_prelie(const PreLie& P, const Budget& budget) {
  const GroupShape& shape = P.shape();
  const u64 N = shape.order();
  BraceReport rep;
  rep.seed = budget.seed;
  rep.passed = true;
  rep.exhaustive = budget.exhaustive_triples(N);

  auto prelie_defect = [&](u64 x, u64 y, u64 z) -> bool {
    u64 l = shape.idx_sub(P.dot(P.dot(x, y), z), P.dot(x, P.dot(y, z)));
    u64 r = shape.idx_sub(P.dot(P.dot(y, x), z), P.dot(y, P.dot(x, z)));
    return l == r;
  };

  if (rep.exhaustive) {
    auto tab = P.dense_table(std::max<u64>(PreLie::kTableCap, N));
    const u32* D = tab->data();
    std::vector<u32> add_tab(N * N), sub_tab(N * N);
    for (u64 a = 0; a < N; ++a)
      for (u64 b = 0; b < N; ++b) {
        add_tab[a * N + b] = static_cast<u32>(shape.idx_add(a, b));
        sub_tab[a * N + b] = static_cast<u32>(shape.idx_sub(a, b));
      }
    const u32* ADD = add_tab.data();
    const u32* SUB = sub_tab.data();
    std::vector<std::optional<AxiomFailure>> wit(chunk_count(N, 4));
    parallel_chunks(N, 4, [&](u64 chunk, u64 beg, u64 end) {
      for (u64 x = beg; x < end && !wit[chunk]; ++x) {
        const u32* rowx = D + x * N;
        for (u64 y = 0; y < N && !wit[chunk]; ++y) {
          const u32* rowy = D + y * N;
          const u32* rowxy = D + static_cast<u64>(rowx[y]) * N;
          const u32* rowyx = D + static_cast<u64>(rowy[x]) * N;
          const u32* rowsum = D + static_cast<u64>(ADD[x * N + y]) * N;
          const u32* addy = ADD + y * N;
          for (u64 z = 0; z < N; ++z) {
            u64 l = SUB[static_cast<u64>(rowxy[z]) * N + rowx[rowy[z]]];
            u64 r = SUB[static_cast<u64>(rowyx[z]) * N + rowy[rowx[z]]];
            if (l != r) {
              wit[chunk] = AxiomFailure{"prelie_identity", {x, y, z}, ""};
              break;
            }
            if (rowx[addy[z]] !=
                ADD[static_cast<u64>(rowx[y]) * N + rowx[z]]) {
              wit[chunk] = AxiomFailure{"right_additivity", {x, y, z}, ""};
              break;
            }
            if (rowsum[z] != ADD[static_cast<u64>(rowx[z]) * N + rowy[z]]) {
              wit[chunk] = AxiomFailure{"left_additivity", {x, y, z}, ""};
              break;
            }
          }
        }
      }
    });
    for (auto& w : wit)
      if (w) {
        rep.passed = false;
        rep.failures.push_back(*w);
        break;
      }
    rep.checked_triples = N * N * N;
  } else {
    rep.samples = budget.samples;
    std::vector<std::optional<AxiomFailure>> wit(
        chunk_count(budget.samples, 4096));
    parallel_chunks(budget.samples, 4096, [&](u64 chunk, u64 beg, u64 end) {
      for (u64 t = beg; t < end && !wit[chunk]; ++t) {
        u64 x = rng_below(rng_stream(budget.seed, 3 * t), N);
        u64 y = rng_below(rng_stream(budget.seed, 3 * t + 1), N);
        u64 z = rng_below(rng_stream(budget.seed, 3 * t + 2), N);
        if (!prelie_defect(x, y, z)) {
          wit[chunk] = AxiomFailure{"prelie_identity", {x, y, z}, ""};
          break;
        }
        if (P.dot(shape.idx_add(x, y), z) !=
            shape.idx_add(P.dot(x, z), P.dot(y, z))) {
          wit[chunk] = AxiomFailure{"left_additivity", {x, y, z}, ""};
          break;
        }
        if (P.dot(x, shape.idx_add(y, z)) !=
            shape.idx_add(P.dot(x, y), P.dot(x, z))) {
          wit[chunk] = AxiomFailure{"right_additivity", {x, y, z}, ""};
          break;
        }
      }
    });
    for (auto& w : wit)
      if (w) {
        rep.passed = false;
        rep.failures.push_back(*w);
        break;
      }
    rep.checked_triples = budget.samples;
  }
  return rep;
}

// ---- nilpotency chains ----
// Products are biadditive, so spans can be generated from generator pairs.

unsigned left_nilpotency_index(const PreLie& P) {
  const GroupShape& shape = P.shape();
  std::vector<u64> basis;
  for (unsigned i = 0; i < shape.rank(); ++i)
    basis.push_back(shape.index_of(shape.basis(i)));
  if (basis.empty()) return 1;

  std::vector<u64> cur = basis;
  u64 prev_size = shape.order();
  for (unsigned m = 2; m <= 2 * shape.exponent_sum() + 4; ++m) {
    std::vector<u64> prods;
    for (u64 g : basis)
      for (u64 x : cur) prods.push_back(P.dot(g, x));
    Span s = close_span(shape, std::move(prods));
    if (s.is_zero()) return m;
    if (s.size() == prev_size) return 0;
    prev_size = s.size();
    cur = s.generators;
  }
  return 0;
}

std::optional<unsigned> strong_nilpotency_index(const PreLie& P) {
  const GroupShape& shape = P.shape();
  std::vector<u64> basis;
  for (unsigned i = 0; i < shape.rank(); ++i)
    basis.push_back(shape.index_of(shape.basis(i)));
  if (basis.empty()) return 1;

  // gens[n] generates the span of all products of exactly n+1 elements
  std::vector<std::vector<u64>> gens{basis};
  const unsigned bound = 4 * shape.exponent_sum() + 8;
  for (unsigned m = 2; m <= bound; ++m) {
    std::vector<u64> prods;
    for (unsigned i = 1; i < m; ++i) {
      unsigned j = m - i;
      for (u64 x : gens[i - 1])
        for (u64 y : gens[j - 1]) prods.push_back(P.dot(x, y));
    }
    Span s = close_span(shape, std::move(prods));
    if (s.is_zero()) return m;
    gens.push_back(s.generators);
    // nested chain: stabilization above zero means never nilpotent
    if (m >= 3) {
      Span prev = close_span(shape, std::vector<u64>(gens[m - 2]));
      if (prev.size() == s.size()) return std::nullopt;
    }
  }
  return std::nullopt;
}

// ---- primitive roots and xi ----

u64 primitive_root(u64 p, unsigned n) {
  (void)n;  // a primitive root mod p^2 generates (Z/p^n)^x for every n
  if (p < 3 || !is_prime_u64(p))
    throw precondition_error("primitive_root: p must be an odd prime");
  // factor p-1
  std::vector<u64> qs;
  u64 m = p - 1;
  for (u64 d = 2; d * d <= m; ++d) {
    if (m % d == 0) {
      qs.push_back(d);
      while (m % d == 0) m /= d;
    }
  }
  if (m > 1) qs.push_back(m);
  for (u64 g = 2; g < p; ++g) {
    bool ok = true;
    for (u64 q : qs)
      if (powmod(g, (p - 1) / q, p) == 1) {
        ok = false;
        break;
      }
    if (!ok) continue;
    if (powmod(g, p - 1, p * p) == 1) continue;  // not primitive mod p^2
    return g;
  }
  throw structural_error("primitive_root: search failed");
}

std::vector<u64> XiContext::xi_powers() const {
  std::vector<u64> pw(p - 1);
  pw[0] = 1 % modulus;
  for (u64 i = 1; i < p - 1; ++i) pw[i] = mulmod(pw[i - 1], xi, modulus);
  return pw;
}

XiContext xi_context(u64 p, unsigned n) {
  XiContext c;
  c.p = p;
  c.n = n;
  c.modulus = ipow(p, n);
  c.gamma = primitive_root(p, n);
  c.xi = powmod(c.gamma, ipow(p, n - 1), c.modulus);
  // xi must have order exactly p-1 mod p^n
  if (powmod(c.xi, p - 1, c.modulus) != 1)
    throw structural_error("xi_context: xi^{p-1} != 1");
  for (u64 d = 1; d < p - 1; ++d)
    if ((p - 1) % d == 0 && powmod(c.xi, d, c.modulus) == 1)
      throw structural_error("xi_context: xi has order below p-1");
  u64 s = 0;
  for (unsigned t = 0; t <= n; ++t) s = (s + ipow(p, t) % c.modulus) % c.modulus;
  c.scale = (c.modulus - s) % c.modulus;
  return c;
}

// ---- extraction ----

WitnessReport check_extraction_preconditions(const Brace& B,
                                             const Budget& budget) {
  WitnessReport rep;
  const GroupShape& shape = B.shape();
  const unsigned e = shape.max_exponent();
  bool pseudo = B.kind() == BraceKind::pseudobrace;
  for (unsigned i = 1; i <= e; ++i) {
    for (const BoxSubgroup& S :
         {annihilator(shape, i), p_power_subgroup(shape, i)}) {
      IdealReport ir = is_ideal(B, S, budget, pseudo);
      rep.exhaustive = rep.exhaustive && ir.exhaustive;
      if (!ir.is_ideal) {
        rep.passed = false;
        rep.witness = ir.witness;
        return rep;
      }
    }
  }
  // (p^iA) * ann(p^j) ⊆ ann(p^{j-i}) for i <= j
  for (unsigned i = 1; i <= e; ++i) {
    for (unsigned j = i; j <= e; ++j) {
      BoxSubgroup piA = p_power_subgroup(shape, i);
      BoxSubgroup annj = annihilator(shape, j);
      BoxSubgroup target = annihilator(shape, j - i);
      u64 M1 = piA.subgroup_order(), M2 = annj.subgroup_order();
      bool ex = static_cast<u128>(M1) * M2 <= budget.max_triples;
      rep.exhaustive = rep.exhaustive && ex;
      u64 total = ex ? M1 * M2 : budget.samples;
      std::vector<std::optional<AxiomFailure>> wit(chunk_count(total, 1 << 15));
      parallel_chunks(total, 1 << 15, [&](u64 chunk, u64 beg, u64 end) {
        u64 cur1 = total;
        u64 u = 0;
        for (u64 t = beg; t < end; ++t) {
          u64 t1 = ex ? t / M2 : rng_below(rng_stream(budget.seed, 2 * t), M1);
          u64 t2 = ex ? t % M2
                      : rng_below(rng_stream(budget.seed, 2 * t + 1), M2);
          if (t1 != cur1) {
            cur1 = t1;
            u = shape.index_of(piA.member(t1));
          }
          u64 v = shape.index_of(annj.member(t2));
          if (!target.contains_idx(B.star(u, v))) {
            wit[chunk] = AxiomFailure{
                "containment", {u, v, i, j},
                "(p^iA)*ann(p^j) not within ann(p^{j-i})"};
            return;
          }
        }
      });
      for (auto& w : wit)
        if (w) {
          rep.passed = false;
          rep.witness = *w;
          return rep;
        }
    }
  }
  return rep;
}

PreLie extract_prelie(const Brace& B, unsigned k, const PullbackChoice& choice,
                      const Budget& budget, bool skip_checks) {
  const GroupShape& shape = B.shape();
  if (k == 0) throw precondition_error("extract_prelie: k must be positive");
  if (!skip_checks) {
    WitnessReport pre = check_extraction_preconditions(B, budget);
    if (!pre.passed)
      throw precondition_error("extract_prelie: precondition failed: " +
                               pre.witness->axiom);
  }
  XiContext xc = xi_context(shape.p(), shape.exponent_sum());
  auto box = std::make_shared<BoxSubgroup>(annihilator(shape, 2 * k));
  GroupShape qshape = box->quotient_shape();
  auto qs = std::make_shared<GroupShape>(qshape);
  auto parent = std::make_shared<Brace>(B);
  auto xipow = std::make_shared<std::vector<u64>>(xc.xi_powers());
  auto pkA = std::make_shared<BoxSubgroup>(p_power_subgroup(shape, k));
  const u64 p = shape.p();
  const u64 pk = ipow(p, k);
  const u64 scale = xc.scale;
  auto ch = std::make_shared<PullbackChoice>(choice);

  auto rule = [parent, box, qs, xipow, pkA, p, pk, scale, ch,
               kk = k](u64 qa, u64 qb) -> u64 {
    const GroupShape& sh = parent->shape();
    u64 pa = box->lift_idx(*qs, qa);
    u64 pb = box->lift_idx(*qs, qb);
    u64 acc = 0;
    for (u64 i = 0; i + 1 <= p - 1; ++i) {
      u64 xi_i = (*xipow)[i];
      u64 xi_rev = (*xipow)[(p - 1 - i) % (p - 1)];
      u64 u = sh.idx_smul(static_cast<i64>(xi_i),
                          sh.idx_smul(static_cast<i64>(pk), pa));
      u64 s = parent->star(u, pb);
      acc = sh.idx_add(acc, sh.idx_smul(static_cast<i64>(xi_rev), s));
    }
    acc = sh.idx_smul(static_cast<i64>(scale), acc);
    if (!pkA->contains_idx(acc))
      throw critical_error(
          "extract_prelie: xi-sum left p^kA; Property-1 bookkeeping "
          "violated at " +
          sh.str_idx(acc));
    return box->project_idx(*qs, wp_inv_idx(sh, acc, kk, *ch));
  };

  PreLie P = PreLie::from_rule(qshape, rule,
                               B.label() + "->prelie(k=" + std::to_string(k) +
                                   ")");
  if (qshape.order() <= PreLie::kTableCap) {
    auto tab = P.dense_table();
    return PreLie::from_table(qshape, std::vector<u32>(*tab), P.label());
  }
  return P;
}

// ---- classic flows (Lazard range) ----

Brace classic_exp_log(const PreLie& P) {
  const GroupShape& shape = P.shape();
  const u64 N = shape.order();
  std::optional<unsigned> strong = strong_nilpotency_index(P);
  if (!strong || *strong >= shape.p())
    throw precondition_error(
        "classic_exp_log: strong nilpotency index not below p");
  const unsigned S = *strong;
  const u64 mod = ipow(shape.p(), shape.max_exponent());

  // inverse factorials mod p^{max exponent}; j < p so j! is a unit
  std::vector<u64> invfact(S + 1, 1);
  u64 fact = 1;
  for (unsigned j = 1; j <= S; ++j) {
    fact = mulmod(fact, j % mod, mod);
    invfact[j] = invmod(fact, mod);
  }

  auto w_atom = [&](u64 a) -> u64 {
    u64 acc = 0;
    u64 cur = a;  // left-normed product of j copies of a
    for (unsigned j = 1; j < S; ++j) {
      acc = shape.idx_add(acc, shape.idx_smul(static_cast<i64>(invfact[j]), cur));
      cur = P.dot(a, cur);
    }
    return acc;
  };
  auto w_bin = [&](u64 x, u64 b) -> u64 {
    u64 acc = 0;
    u64 cur = b;
    for (unsigned j = 1; j < S; ++j) {
      cur = P.dot(x, cur);
      acc = shape.idx_add(acc, shape.idx_smul(static_cast<i64>(invfact[j]), cur));
    }
    return acc;
  };

  if (N > Brace::kTableCap)
    throw precondition_error("classic_exp_log: order exceeds table cap");
  std::vector<u32> w_tab(N), omega(N);
  std::vector<i64> inv(N, -1);
  for (u64 a = 0; a < N; ++a) w_tab[a] = static_cast<u32>(w_atom(a));
  for (u64 a = 0; a < N; ++a) {
    if (inv[w_tab[a]] >= 0)
      throw critical_error("classic_exp_log: W is not injective");
    inv[w_tab[a]] = static_cast<i64>(a);
  }
  for (u64 a = 0; a < N; ++a) omega[a] = static_cast<u32>(inv[a]);

  std::vector<u32> table(N * N);
  parallel_chunks(N, 16, [&](u64, u64 beg, u64 end) {
    for (u64 a = beg; a < end; ++a) {
      u64 oa = omega[a];
      for (u64 b = 0; b < N; ++b)
        table[a * N + b] =
            static_cast<u32>(shape.idx_add(shape.idx_add(a, b), w_bin(oa, b)));
    }
  });
  return Brace::from_table(shape, std::move(table), BraceKind::brace,
                           P.label() + "->classic_flows");
}

}  // namespace braceforge

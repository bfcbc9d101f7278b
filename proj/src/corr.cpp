#include "braceforge/corr.hpp"

#include "braceforge/props.hpp"

namespace braceforge {

CorrContext::CorrContext(Brace B, unsigned k, PullbackChoice choice,
                         const Budget& budget, bool skip_property_check)
    : B_(std::move(B)), k_(k), choice_(choice) {
  const GroupShape& shape = B_.shape();
  if (shape.p() < 7)
    throw precondition_error("CorrContext: requires p >= 7");
  if (k_ == 0) throw precondition_error("CorrContext: k must be positive");
  m_ = static_cast<unsigned>((shape.p() - 1) / 4);
  pk_ = ipow(shape.p(), k_);
  if (!skip_property_check) {
    PropertyReport p1 = check_property1(B_, budget);
    if (!p1.holds)
      throw precondition_error("CorrContext: brace fails Property 1 (" +
                               p1.witness->axiom + ")");
  }
  // binomial constants: C(p^k, j) = C(p^k, j-1) * (p^k - j + 1) / j,
  // tracked as p-valuation plus unit mod p^n
  const u64 mod = ipow(shape.p(), shape.exponent_sum());
  binom_s_.assign(pk_ + 1, 0);
  binom_sigma_.assign(pk_ + 1, 1 % mod);
  u64 unit = 1 % mod;
  i64 val = 0;
  for (u64 j = 1; j <= pk_; ++j) {
    u64 num = pk_ - j + 1;
    u64 den = j;
    while (num % shape.p() == 0) {
      num /= shape.p();
      ++val;
    }
    while (den % shape.p() == 0) {
      den /= shape.p();
      --val;
    }
    unit = mulmod(unit, num % mod, mod);
    unit = mulmod(unit, invmod(den % mod, mod), mod);
    unsigned sj = valuation(j, shape.p());
    binom_s_[j] = sj;
    if (val != static_cast<i64>(k_ - sj))
      throw structural_error("CorrContext: binomial valuation mismatch");
    binom_sigma_[j] = unit;
  }
}

u64 CorrContext::e_prime(unsigned i, u64 a, u64 x) const {
  u64 cur = x;
  while (i--) cur = B_.star(a, cur);
  return cur;
}

u64 CorrContext::e_prime_atom(unsigned i, u64 a) const {
  if (i == 0)
    throw precondition_error("e_prime_atom: undefined for i = 0");
  return e_prime(i - 1, a, a);
}

u64 CorrContext::e_zero(u64 a, u64 x) const {
  const GroupShape& shape = B_.shape();
  BoxSubgroup pA = p_power_subgroup(shape, 1);
  if (!pA.contains_idx(x))
    throw critical_error("e_zero: argument " + shape.str_idx(x) +
                         " outside pA (Property-1 bookkeeping violated)");
  u64 pulled = shape.index_of(rho_inv(shape, shape.element(x), choice_));
  return e_prime(static_cast<unsigned>((shape.p() - 1) / 2), a, pulled);
}

namespace {

u64 d_chain(const CorrContext& ctx, unsigned s, u64 a, u64 x) {
  u64 cur = x;
  while (s--) cur = ctx.e_zero(a, cur);
  return cur;
}

}  // namespace

u64 CorrContext::e_full(u64 j, u64 a, u64 x) const {
  const u64 p = B_.shape().p();
  if (j == 0) return e_zero(a, x);
  if (j % p != 0) return e_prime(static_cast<unsigned>(j), a, x);
  unsigned s = valuation(j, p);
  unsigned inner = static_cast<unsigned>(j) - static_cast<unsigned>((p - 1) * s / 2);
  return d_chain(*this, s, a, e_prime(inner, a, x));
}

u64 CorrContext::e_full_atom(u64 j, u64 a) const {
  const u64 p = B_.shape().p();
  if (j == 0) throw precondition_error("e_full_atom: j = 0 undefined");
  if (j % p != 0) return e_prime_atom(static_cast<unsigned>(j), a);
  unsigned s = valuation(j, p);
  unsigned inner = static_cast<unsigned>(j) - static_cast<unsigned>((p - 1) * s / 2);
  return d_chain(*this, s, a, e_prime_atom(inner, a));
}

u64 CorrContext::star_op(u64 a, u64 b) const {
  const GroupShape& shape = B_.shape();
  u64 acc = 0;
  for (u64 j = 1; j <= pk_; ++j) {
    u64 term = e_full(j, a, b);
    if (term)
      acc = shape.idx_add(
          acc, shape.idx_smul(static_cast<i64>(binom_sigma_[j]), term));
  }
  if (verify_on_eval) {
    u64 lhs = shape.idx_smul(static_cast<i64>(pk_), acc);
    u64 rhs = B_.star(B_.circ_pow(a, static_cast<i64>(pk_)), b);
    if (lhs != rhs)
      throw critical_error("star_op: p^k(a⋆b) != a^{∘p^k}*b at a=" +
                           shape.str_idx(a) + " b=" + shape.str_idx(b));
  }
  return acc;
}

u64 CorrContext::f_map(u64 a) const {
  const GroupShape& shape = B_.shape();
  u64 acc = 0;
  for (u64 j = 1; j <= pk_; ++j) {
    u64 term = e_full_atom(j, a);
    if (term)
      acc = shape.idx_add(
          acc, shape.idx_smul(static_cast<i64>(binom_sigma_[j]), term));
  }
  if (verify_on_eval) {
    u64 lhs = shape.idx_smul(static_cast<i64>(pk_), acc);
    u64 rhs = B_.circ_pow(a, static_cast<i64>(pk_));
    if (lhs != rhs)
      throw critical_error("f_map: p^k f(a) != a^{∘p^k} at a=" +
                           shape.str_idx(a));
  }
  return acc;
}

u64 CorrContext::star_iterate(unsigned i, u64 a, u64 b) const {
  u64 cur = b;
  while (i--) cur = star_op(a, cur);
  return cur;
}

GMap g_map(const CorrContext& ctx) {
  const GroupShape& shape = ctx.shape();
  BoxSubgroup box = annihilator(shape, 2 * ctx.k());
  GMap gm{box.quotient_shape(), {}, {}, 0};
  const u64 Q = gm.qshape.order();
  gm.f_induced.resize(Q);
  std::vector<i64> inv(Q, -1);
  for (u64 qa = 0; qa < Q; ++qa) {
    u64 a = box.lift_idx(gm.qshape, qa);
    u64 fq = box.project_idx(gm.qshape, ctx.f_map(a));
    gm.f_induced[qa] = static_cast<u32>(fq);
    if (inv[fq] >= 0)
      throw critical_error("g_map: induced f is not injective on the quotient");
    inv[fq] = static_cast<i64>(qa);
  }
  gm.g.resize(Q);
  for (u64 q = 0; q < Q; ++q) gm.g[q] = static_cast<u32>(inv[q]);
  std::vector<bool> seen(Q, false);
  for (u64 q = 0; q < Q; ++q) {
    if (seen[q]) continue;
    u64 len = 0, cur = q;
    while (!seen[cur]) {
      seen[cur] = true;
      cur = gm.f_induced[cur];
      ++len;
    }
    gm.max_cycle = std::max(gm.max_cycle, len);
  }
  return gm;
}

WitnessReport verify_wazny(const CorrContext& ctx, const Budget& budget) {
  WitnessReport rep;
  const Brace& B = ctx.brace();
  const GroupShape& shape = ctx.shape();
  const u64 N = shape.order();
  const i64 pk = static_cast<i64>(ctx.pk());

  rep.exhaustive = budget.exhaustive_pairs(N);
  u64 total = rep.exhaustive ? N * N : budget.samples;
  if (!rep.exhaustive) rep.samples = budget.samples;

  // the binary display, all (a, b)
  for (u64 t = 0; t < total; ++t) {
    u64 a = rep.exhaustive ? t / N : rng_below(rng_stream(budget.seed, 2 * t), N);
    u64 b = rep.exhaustive ? t % N
                           : rng_below(rng_stream(budget.seed, 2 * t + 1), N);
    u64 acc = 0;
    for (u64 j = 1; j <= ctx.pk(); ++j) {
      u64 term = ctx.e_full(j, a, b);
      if (term)
        acc = shape.idx_add(
            acc, shape.idx_smul(static_cast<i64>(ctx.binom_sigma(j)), term));
    }
    u64 lhs = B.star(B.circ_pow(a, pk), b);
    if (shape.idx_smul(pk, acc) != lhs) {
      rep.passed = false;
      rep.witness = AxiomFailure{"wazny_binary", {a, b},
                                 "a^{∘p^k}*b != p^k Σ σ_j e_j(a,b)"};
      return rep;
    }
  }

  // the atom display, all a
  for (u64 a = 0; a < N; ++a) {
    u64 acc = 0;
    for (u64 j = 1; j <= ctx.pk(); ++j) {
      u64 term = ctx.e_full_atom(j, a);
      if (term)
        acc = shape.idx_add(
            acc, shape.idx_smul(static_cast<i64>(ctx.binom_sigma(j)), term));
    }
    if (shape.idx_smul(pk, acc) != B.circ_pow(a, pk)) {
      rep.passed = false;
      rep.witness =
          AxiomFailure{"wazny_atom", {a}, "a^{∘p^k} != p^k Σ σ_j e_j(a)"};
      return rep;
    }
  }
  return rep;
}

WitnessReport verify_fstar_odot(const CorrContext& ctx, unsigned depth,
                                const Budget& budget) {
  WitnessReport rep;
  const GroupShape& shape = ctx.shape();
  OdotOp odot(ctx.brace(), ctx.k(), ctx.choice());
  const GroupShape& qs = odot.qshape();
  BoxSubgroup box = odot.modulus();
  const u64 Q = qs.order();

  rep.exhaustive = budget.exhaustive_pairs(Q * 4);  // lifting cost factored in
  u64 total = rep.exhaustive ? Q * Q : std::min<u64>(budget.samples, 65536);
  if (!rep.exhaustive) rep.samples = total;
  for (u64 t = 0; t < total; ++t) {
    u64 qa = rep.exhaustive ? t / Q : rng_below(rng_stream(budget.seed, 2 * t), Q);
    u64 qb = rep.exhaustive ? t % Q
                            : rng_below(rng_stream(budget.seed, 2 * t + 1), Q);
    u64 a = box.lift_idx(qs, qa);
    u64 b = box.lift_idx(qs, qb);
    u64 qf = box.project_idx(qs, ctx.f_map(a));
    // depth-1 identity and its bar/tilde iterates
    u64 bar = qb;
    u64 tilde = b;
    for (unsigned i = 1; i <= depth; ++i) {
      bar = odot.eval(qf, bar);
      tilde = ctx.star_iterate(1, a, tilde);
      if (bar != box.project_idx(qs, tilde)) {
        rep.passed = false;
        rep.witness = AxiomFailure{
            "fstar_odot", {qa, qb, i},
            "bar-e'_i([f(a)],[b]) != [tilde-e'_i(a,b)]"};
        return rep;
      }
    }
  }
  return rep;
}

WitnessReport verify_e0_lemma(const CorrContext& ctx, const Budget& budget) {
  WitnessReport rep;
  const Brace& B = ctx.brace();
  const GroupShape& shape = ctx.shape();
  const u64 N = shape.order();
  const u64 p = shape.p();
  const unsigned half = static_cast<unsigned>((p - 3) / 2);
  BoxSubgroup pA = p_power_subgroup(shape, 1);
  BoxSubgroup ann1 = annihilator(shape, 1);

  u64 acount = std::min<u64>(N, 512);
  rep.exhaustive = acount == N;
  if (!rep.exhaustive) rep.samples = acount;
  const u64 AN = ann1.subgroup_order();

  for (u64 ta = 0; ta < acount; ++ta) {
    u64 a = rep.exhaustive ? ta : rng_below(rng_stream(budget.seed, ta), N);
    // e_{(p-3)/2}(a, ann(p)) = 0
    for (u64 tx = 0; tx < std::min<u64>(AN, 512); ++tx) {
      u64 x = shape.index_of(ann1.member(tx));
      if (ctx.e_prime(half, a, x) != 0) {
        rep.passed = false;
        rep.witness =
            AxiomFailure{"e0_ann_kernel", {a, x}, "e_{(p-3)/2}(a,ann(p)) != 0"};
        return rep;
      }
    }
    // e_{(p-3)/2}(a, A) within pA; additivity of e_i; alternative e_0 form
    for (u64 tb = 0; tb < std::min<u64>(N, 512); ++tb) {
      u64 b = rng_below(rng_stream(budget.seed ^ ta, tb), N);
      if (!pA.contains_idx(ctx.e_prime(half, a, b))) {
        rep.passed = false;
        rep.witness =
            AxiomFailure{"e0_pA", {a, b}, "e_{(p-3)/2}(a,A) not in pA"};
        return rep;
      }
      u64 c = rng_below(rng_stream(budget.seed ^ (ta + 1), tb), N);
      for (unsigned i = 1; i <= 2; ++i) {
        u64 lhs = ctx.e_full(i, a, shape.idx_add(b, c));
        u64 rhs = shape.idx_add(ctx.e_full(i, a, b), ctx.e_full(i, a, c));
        if (lhs != rhs) {
          rep.passed = false;
          rep.witness =
              AxiomFailure{"e_additivity", {a, b, c, i}, "e_i not additive"};
          return rep;
        }
      }
      // e_0(a, x) = e_{(p-3)/2}(a, rho^{-1}(a*x)) for x in pA
      u64 x = shape.idx_smul(static_cast<i64>(p), b);  // an element of pA
      u64 lhs = ctx.e_zero(a, x);
      u64 ax = B.star(a, x);
      u64 rhs = ctx.e_prime(
          half, a,
          shape.index_of(rho_inv(shape, shape.element(ax), ctx.choice())));
      if (lhs != rhs) {
        rep.passed = false;
        rep.witness =
            AxiomFailure{"e0_alt_form", {a, x}, "two e_0 forms disagree"};
        return rep;
      }
    }
    // atom variant lands in pA
    if (!pA.contains_idx(ctx.e_prime_atom(half == 0 ? 1 : half, a))) {
      rep.passed = false;
      rep.witness =
          AxiomFailure{"e0_atom_pA", {a}, "e_{(p-3)/2}(a, atom) not in pA"};
      return rep;
    }
  }
  return rep;
}

WitnessReport verify_star_iterates(const CorrContext& ctx, const Budget& budget) {
  WitnessReport rep;
  const GroupShape& shape = ctx.shape();
  const u64 N = shape.order();
  const unsigned half = static_cast<unsigned>((shape.p() - 3) / 2);
  BoxSubgroup pA = p_power_subgroup(shape, 1);
  BoxSubgroup ann1 = annihilator(shape, 1);
  const u64 AN = ann1.subgroup_order();

  u64 acount = std::min<u64>(N, 256);
  rep.exhaustive = acount == N;
  for (u64 ta = 0; ta < acount; ++ta) {
    u64 a = rep.exhaustive ? ta : rng_below(rng_stream(budget.seed, ta), N);
    for (u64 tb = 0; tb < std::min<u64>(N, 256); ++tb) {
      u64 b = rng_below(rng_stream(budget.seed ^ ta, tb), N);
      if (!pA.contains_idx(ctx.star_iterate(half, a, b))) {
        rep.passed = false;
        rep.witness = AxiomFailure{
            "star_iterate_pA", {a, b}, "tilde-e'_{(p-3)/2}(a,b) not in pA"};
        return rep;
      }
    }
    for (u64 tx = 0; tx < std::min<u64>(AN, 256); ++tx) {
      u64 x = shape.index_of(ann1.member(tx));
      if (ctx.star_iterate(half, a, x) != 0) {
        rep.passed = false;
        rep.witness = AxiomFailure{
            "star_iterate_ann", {a, x}, "tilde-e'_{(p-3)/2}(a,ann(p)) != 0"};
        return rep;
      }
    }
  }
  return rep;
}

}  // namespace braceforge

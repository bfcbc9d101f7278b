#include "braceforge/flows.hpp"

#include <algorithm>

#include "braceforge/props.hpp"

namespace braceforge {

unsigned fact_valuation(u64 j, u64 p) {
  unsigned s = 0;
  for (u64 q = p; q <= j; q *= p) {
    s += static_cast<unsigned>(j / q);
    if (q > j / p) break;  // overflow guard
  }
  return s;
}

std::pair<u64, u64> fact_sigma(u64 j, u64 p, unsigned n) {
  const u64 mod = ipow(p, n);
  u64 gamma = 1 % mod;
  for (u64 t = 2; t <= j; ++t) {
    u64 u = t;
    while (u % p == 0) u /= p;
    gamma = mulmod(gamma, u % mod, mod);
  }
  return {gamma, invmod(gamma, mod)};
}

FlowsContext make_flows_context(const PreLie& P, PullbackChoice choice) {
  FlowsContext ctx;
  ctx.P = P;
  ctx.p = P.shape().p();
  ctx.n = P.shape().exponent_sum();
  ctx.m = static_cast<unsigned>((ctx.p - 1) / 4);
  if (ctx.m == 0)
    throw precondition_error("flows: requires p > 3");
  ctx.choice = choice;

  unsigned M = left_nilpotency_index(P);
  if (M == 0)
    throw precondition_error("flows: pre-Lie ring is not left nilpotent");
  ctx.span_index = M;
  ctx.j_max = 2 * M;

  const u64 mod = ipow(ctx.p, ctx.n);
  ctx.fact_s.resize(ctx.j_max + 4);
  ctx.eta.resize(ctx.j_max + 4);
  ctx.gamma.resize(ctx.j_max + 4);
  ctx.sigma.resize(ctx.j_max + 4);
  u64 g = 1 % mod;
  ctx.fact_s[0] = 0;
  ctx.gamma[0] = g;
  ctx.sigma[0] = invmod(std::max<u64>(g, 1), mod);
  for (u64 j = 1; j <= ctx.j_max + 3; ++j) {
    u64 u = j;
    unsigned v = 0;
    while (u % ctx.p == 0) {
      u /= ctx.p;
      ++v;
    }
    g = mulmod(g, u % mod, mod);
    ctx.fact_s[j] = ctx.fact_s[j - 1] + v;
    ctx.eta[j] = ctx.m * ctx.fact_s[j];
    ctx.gamma[j] = g;
    ctx.sigma[j] = invmod(g, mod);
  }
  return ctx;
}

u64 E_op(const FlowsContext& ctx, u64 j, u64 a, std::optional<u64> x) {
  if (j == 0) throw precondition_error("E_op: j must be positive");
  const GroupShape& shape = ctx.P.shape();
  unsigned s = j < ctx.fact_s.size() ? ctx.fact_s[j]
                                     : fact_valuation(j, ctx.p);
  if (j % ctx.p != 0) {
    // plain L_a^j
    if (x) return ctx.P.lpow(a, static_cast<unsigned>(j), *x);
    return ctx.P.lpow_atom(a, static_cast<unsigned>(j));
  }
  unsigned eta = ctx.m * s;
  unsigned outer = static_cast<unsigned>(j) - eta;
  // The outer L-power alone annihilates everything once it reaches the
  // span index; this also covers the truncation window honestly without
  // evaluating pullbacks of dead terms.
  if (ctx.span_index >= 1 && outer >= ctx.span_index - 1) return 0;

  u64 v = x ? ctx.P.lpow(a, eta, *x) : ctx.P.lpow_atom(a, eta);
  for (unsigned step = 0; step < s; ++step) {
    try {
      v = rho_inv_idx(shape, v, ctx.choice);
    } catch (const std::domain_error&) {
      throw critical_error(
          "E_op: pullback argument left pA (Property-3 bookkeeping violated) "
          "at j=" +
          std::to_string(j) + " step=" + std::to_string(step) + " value " +
          shape.str_idx(v));
    }
  }
  return ctx.P.lpow(a, outer, v);
}

u64 W_map(const FlowsContext& ctx, u64 a) {
  const GroupShape& shape = ctx.P.shape();
  u64 acc = 0;
  for (u64 j = 1; j <= ctx.j_max; ++j) {
    u64 term = E_op(ctx, j, a, std::nullopt);
    if (term)
      acc = shape.idx_add(acc, shape.idx_smul(static_cast<i64>(ctx.sigma[j]), term));
  }
  return acc;
}

u64 W_bin(const FlowsContext& ctx, u64 a, u64 b) {
  const GroupShape& shape = ctx.P.shape();
  u64 acc = 0;
  for (u64 j = 1; j <= ctx.j_max; ++j) {
    u64 term = E_op(ctx, j, a, b);
    if (term)
      acc = shape.idx_add(acc, shape.idx_smul(static_cast<i64>(ctx.sigma[j]), term));
  }
  return acc;
}

// ---- Omega ----

OmegaMap::OmegaMap(std::shared_ptr<const FlowsContext> ctx, u64 cap)
    : ctx_(std::move(ctx)) {
  const GroupShape& shape = ctx_->P.shape();
  const u64 N = shape.order();
  if (N > cap) return;  // iterative mode
  std::vector<u32> w(N);
  parallel_chunks(N, 1024, [&](u64, u64 beg, u64 end) {
    for (u64 a = beg; a < end; ++a) w[a] = static_cast<u32>(W_map(*ctx_, a));
  });
  std::vector<i64> inv(N, -1);
  for (u64 a = 0; a < N; ++a) {
    if (inv[w[a]] >= 0)
      throw critical_error("Omega: W is not injective, W(" +
                           shape.str_idx(static_cast<u64>(inv[w[a]])) +
                           ") = W(" + shape.str_idx(a) + ")");
    inv[w[a]] = static_cast<i64>(a);
  }
  table_.resize(N);
  for (u64 a = 0; a < N; ++a) table_[a] = static_cast<u32>(inv[a]);
  // cycle decomposition of the permutation a -> W(a)
  std::vector<bool> seen(N, false);
  for (u64 a = 0; a < N; ++a) {
    if (seen[a]) continue;
    u64 len = 0, cur = a;
    while (!seen[cur]) {
      seen[cur] = true;
      cur = w[cur];
      ++len;
    }
    max_cycle_ = std::max(max_cycle_, len);
  }
}

u64 OmegaMap::at(u64 a) const {
  if (!table_.empty()) return table_[a];
  // filtration fixed point: x = a - (W(x) - x); verified afterwards
  const GroupShape& shape = ctx_->P.shape();
  u64 x = a;
  for (unsigned t = 0; t < 2 * ctx_->j_max + 8; ++t) {
    u64 tail = shape.idx_sub(W_map(*ctx_, x), x);
    u64 next = shape.idx_sub(a, tail);
    if (next == x) break;
    x = next;
  }
  if (W_map(*ctx_, x) != a)
    throw critical_error("Omega: iteration failed to invert W at " +
                         shape.str_idx(a));
  return x;
}

Brace flows_circ(std::shared_ptr<const FlowsContext> ctx) {
  const GroupShape shape = ctx->P.shape();
  auto omega = std::make_shared<OmegaMap>(ctx);
  auto rule = [ctx, omega](u64 a, u64 b) -> u64 {
    const GroupShape& sh = ctx->P.shape();
    return sh.idx_add(sh.idx_add(a, b), W_bin(*ctx, omega->at(a), b));
  };
  Brace F = Brace::from_rule(shape, rule, BraceKind::pseudobrace,
                             ctx->P.label() + "->flows");
  if (shape.order() <= Brace::kTableCap) {
    auto tab = F.dense_table();
    return Brace::from_table(shape, std::vector<u32>(*tab),
                             BraceKind::pseudobrace, F.label());
  }
  return F;
}

// ---- property tests ----

WitnessReport verify_truncation(const FlowsContext& ctx, const Budget& budget) {
  WitnessReport rep;
  const GroupShape& shape = ctx.P.shape();
  const u64 N = shape.order();
  u64 acount = std::min<u64>(N, 512);
  rep.exhaustive = acount == N;
  for (u64 j = ctx.j_max + 1; j <= ctx.j_max + 3; ++j) {
    for (u64 t = 0; t < acount; ++t) {
      u64 a = rep.exhaustive ? t : rng_below(rng_stream(budget.seed, j * N + t), N);
      if (E_op(ctx, j, a, std::nullopt) != 0) {
        rep.passed = false;
        rep.witness = AxiomFailure{"truncation_atom", {j, a}, "E_{j,a}(atom) != 0"};
        return rep;
      }
      u64 b = rng_below(rng_stream(budget.seed ^ j, t), N);
      if (E_op(ctx, j, a, b) != 0) {
        rep.passed = false;
        rep.witness = AxiomFailure{"truncation", {j, a, b}, "E_{j,a}(b) != 0"};
        return rep;
      }
    }
  }
  return rep;
}

WitnessReport verify_w_powers(const FlowsContext& ctx, const Brace& flows,
                              unsigned window, const Budget& budget) {
  WitnessReport rep;
  const GroupShape& shape = ctx.P.shape();
  const u64 N = shape.order();
  u64 acount = std::min<u64>(N, 256);
  rep.exhaustive = acount == N;
  for (u64 t = 0; t < acount; ++t) {
    u64 a = rep.exhaustive ? t : rng_below(rng_stream(budget.seed, t), N);
    u64 wa = W_map(ctx, a);
    for (unsigned i = 0; i <= window; ++i) {
      u64 lhs = W_map(ctx, shape.idx_smul(static_cast<i64>(i), a));
      u64 rhs = flows.circ_pow(wa, static_cast<i64>(i));
      if (lhs != rhs) {
        rep.passed = false;
        rep.witness =
            AxiomFailure{"w_powers", {a, i}, "W(i*a) != W(a)^{∘' i}"};
        return rep;
      }
    }
  }
  return rep;
}

WitnessReport verify_moving(const FlowsContext& ctx, unsigned j, unsigned i,
                            const Budget& budget) {
  WitnessReport rep;
  const GroupShape& shape = ctx.P.shape();
  const u64 N = shape.order();
  BoxSubgroup pjA = p_power_subgroup(shape, j);
  const u64 M = pjA.subgroup_order();
  u64 acount = std::min<u64>(N, 128);
  u64 bcount = std::min<u64>(M, 512);
  rep.exhaustive = acount == N && bcount == M;
  unsigned eta = ctx.m * j;
  for (u64 ta = 0; ta < acount; ++ta) {
    u64 a = rep.exhaustive ? ta : rng_below(rng_stream(budget.seed, ta), N);
    for (u64 tb = 0; tb < bcount; ++tb) {
      u64 bsel = rep.exhaustive ? tb
                                : rng_below(rng_stream(budget.seed ^ ta, tb), M);
      u64 b = shape.index_of(pjA.member(bsel));
      GElement lb = wp_inv(shape, shape.element(b), j, ctx.choice);
      u64 lhs = ctx.P.lpow(a, eta + i, shape.index_of(lb));
      u64 lab = ctx.P.lpow(a, i, b);
      GElement rb = wp_inv(shape, shape.element(lab), j, ctx.choice);
      u64 rhs = ctx.P.lpow(a, eta, shape.index_of(rb));
      if (lhs != rhs) {
        rep.passed = false;
        rep.witness = AxiomFailure{"moving", {a, b, j, i}, "moving identity fails"};
        return rep;
      }
    }
  }
  return rep;
}

// ---- round trip ----

namespace {

struct Pipeline {
  Brace carrier;          // B/ann(p^{2k}) with the induced ∘
  PreLie extracted;       // pre-Lie ring on the carrier
  Brace flows;            // pseudobrace on the carrier
  std::shared_ptr<const FlowsContext> ctx;

  Pipeline(Brace c, PreLie e, Brace f, std::shared_ptr<const FlowsContext> x)
      : carrier(std::move(c)),
        extracted(std::move(e)),
        flows(std::move(f)),
        ctx(std::move(x)) {}
};

Pipeline build_pipeline(const Brace& B, unsigned k,
                        const PullbackChoice& choice, const Budget& budget,
                        RoundtripReport& rep) {
  const GroupShape& shape = B.shape();
  BoxSubgroup ann2k = annihilator(shape, 2 * k);
  Brace carrier = quotient(B, ann2k, budget.spot());
  PreLie P = extract_prelie(B, k, choice, budget.spot());
  PropertyReport p3 = check_property3(P, budget.spot());
  rep.property3 = p3.holds;
  if (!p3.holds) {
    rep.failed_stage = "property3";
    rep.witness = p3.witness;
    throw precondition_error("pipeline: extracted pre-Lie ring fails Property 3");
  }
  auto ctx = std::make_shared<FlowsContext>(make_flows_context(P, choice));
  Brace F = flows_circ(ctx);
  return Pipeline(std::move(carrier), std::move(P), std::move(F), ctx);
}

}  // namespace

RoundtripReport verify_roundtrip(const Brace& B, unsigned k,
                                 const PullbackChoice& choice,
                                 const Budget& budget) {
  RoundtripReport rep;
  PropertyReport p1p = check_property1p(B, budget);
  PropertyReport p1pp = check_property1pp(B, budget);
  rep.property1p = p1p.holds;
  rep.property1pp = p1pp.holds;
  if (!p1p.holds || !p1pp.holds) {
    rep.failed_stage = p1p.holds ? "property1''" : "property1'";
    rep.witness = p1p.holds ? p1pp.witness : p1p.witness;
    return rep;
  }

  std::optional<Pipeline> built;
  try {
    built.emplace(build_pipeline(B, k, choice, budget, rep));
  } catch (const std::exception& e) {
    if (rep.failed_stage.empty()) {
      rep.failed_stage = "pipeline";
      rep.witness = AxiomFailure{"pipeline", {}, e.what()};
    }
    return rep;
  }
  Pipeline& pipe = *built;

  // W bijectivity is implied by a successful OmegaMap construction for
  // tabulated carriers; for iterative carriers each query verifies itself.
  rep.w_bijective = true;

  const GroupShape& cshape = pipe.carrier.shape();
  BoxSubgroup Ann = annihilator(cshape, 2 * k);
  GroupShape qshape = Ann.quotient_shape();
  const u64 Q = qshape.order();
  rep.final_quotient_order = Q;

  rep.exhaustive = static_cast<u128>(Q) * Q <= budget.max_triples;
  u64 total = rep.exhaustive ? Q * Q : budget.samples;
  if (!rep.exhaustive) rep.samples = budget.samples;
  for (u64 t = 0; t < total; ++t) {
    u64 qx = rep.exhaustive ? t / Q : rng_below(rng_stream(budget.seed, 2 * t), Q);
    u64 qy = rep.exhaustive ? t % Q
                            : rng_below(rng_stream(budget.seed, 2 * t + 1), Q);
    u64 x = Ann.lift_idx(qshape, qx);
    u64 y = Ann.lift_idx(qshape, qy);
    u64 lhs = Ann.coset_rep_idx(pipe.carrier.circ(x, y));
    u64 rhs = Ann.coset_rep_idx(pipe.flows.circ(x, y));
    if (lhs != rhs) {
      rep.failed_stage = "table_comparison";
      rep.witness = AxiomFailure{
          "roundtrip", {qx, qy}, "∘ and ∘' differ mod Ann(p^{2k})"};
      return rep;
    }
  }
  rep.passed = true;
  return rep;
}

RoundtripReport verify_odot_equality(const Brace& B, unsigned k,
                                     const PullbackChoice& choice,
                                     const Budget& budget) {
  RoundtripReport rep;
  PropertyReport p1p = check_property1p(B, budget);
  PropertyReport p1pp = check_property1pp(B, budget);
  rep.property1p = p1p.holds;
  rep.property1pp = p1pp.holds;
  if (!p1p.holds || !p1pp.holds) {
    rep.failed_stage = p1p.holds ? "property1''" : "property1'";
    rep.witness = p1p.holds ? p1pp.witness : p1p.witness;
    return rep;
  }
  std::optional<Pipeline> built;
  try {
    built.emplace(build_pipeline(B, k, choice, budget, rep));
  } catch (const std::exception& e) {
    if (rep.failed_stage.empty()) {
      rep.failed_stage = "pipeline";
      rep.witness = AxiomFailure{"pipeline", {}, e.what()};
    }
    return rep;
  }
  Pipeline& pipe = *built;
  rep.w_bijective = true;

  OdotOp odot(pipe.carrier, k, choice);
  OdotOp odot_prime(pipe.flows, k, choice);
  odot.check_preconditions(budget.spot());
  odot_prime.check_preconditions(budget.spot());

  const u64 Q = odot.qshape().order();
  rep.final_quotient_order = Q;
  rep.exhaustive = static_cast<u128>(Q) * Q <= budget.max_triples;
  u64 total = rep.exhaustive ? Q * Q : budget.samples;
  if (!rep.exhaustive) rep.samples = budget.samples;
  for (u64 t = 0; t < total; ++t) {
    u64 qx = rep.exhaustive ? t / Q : rng_below(rng_stream(budget.seed, 2 * t), Q);
    u64 qy = rep.exhaustive ? t % Q
                            : rng_below(rng_stream(budget.seed, 2 * t + 1), Q);
    if (odot.eval(qx, qy) != odot_prime.eval(qx, qy)) {
      rep.failed_stage = "odot_comparison";
      rep.witness =
          AxiomFailure{"odot_equality", {qx, qy}, "⊙ differs from ⊙'"};
      return rep;
    }
  }
  rep.passed = true;
  return rep;
}

}  // namespace braceforge

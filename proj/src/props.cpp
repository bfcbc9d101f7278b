#include "braceforge/props.hpp"

#include <algorithm>
#include <map>

namespace braceforge {

namespace {

unsigned property_m(u64 p) { return static_cast<unsigned>((p - 1) / 4); }

u64 star_lpow(const Brace& B, u64 a, unsigned m, u64 x) {
  u64 cur = x;
  while (m--) cur = B.star(a, cur);
  return cur;
}

}  // namespace

PropertyReport check_property1(const Brace& B, const Budget& budget) {
  const GroupShape& shape = B.shape();
  const u64 N = shape.order();
  PropertyReport rep;
  rep.property_id = "property1";
  if (shape.p() <= 3)
    throw precondition_error("check_property1: requires p > 3");
  rep.m = property_m(shape.p());
  rep.holds = true;

  BoxSubgroup pA = p_power_subgroup(shape, 1);

  // clause 1: all (a, b)
  rep.exhaustive = budget.exhaustive_pairs(N);
  u64 total = rep.exhaustive ? N * N : budget.samples;
  if (!rep.exhaustive) rep.samples = budget.samples;
  for (u64 t = 0; t < total; ++t) {
    u64 a = rep.exhaustive ? t / N : rng_below(rng_stream(budget.seed, 2 * t), N);
    u64 b = rep.exhaustive ? t % N
                           : rng_below(rng_stream(budget.seed, 2 * t + 1), N);
    if (!pA.contains_idx(star_lpow(B, a, rep.m, b))) {
      rep.holds = false;
      rep.witness =
          AxiomFailure{"property1_clause1", {a, b}, "m-fold star not in pA"};
      return rep;
    }
  }

  // clause 2: a in A, i in [1, emax], x in ann(p^i)
  for (unsigned i = 1; i <= shape.max_exponent(); ++i) {
    BoxSubgroup anni = annihilator(shape, i);
    BoxSubgroup target = annihilator(shape, i - 1);
    u64 M = anni.subgroup_order();
    bool ex = static_cast<u128>(N) * M <= budget.max_triples;
    rep.exhaustive = rep.exhaustive && ex;
    u64 count = ex ? N * M : budget.samples;
    for (u64 t = 0; t < count; ++t) {
      u64 a = ex ? t / M : rng_below(rng_stream(budget.seed ^ i, 2 * t), N);
      u64 x = shape.index_of(
          anni.member(ex ? t % M : rng_below(rng_stream(budget.seed ^ i, 2 * t + 1), M)));
      if (!target.contains_idx(star_lpow(B, a, rep.m, x))) {
        rep.holds = false;
        rep.witness = AxiomFailure{"property1_clause2",
                                   {a, x, i},
                                   "m-fold star leaves ann(p^{i-1})"};
        return rep;
      }
    }
  }
  return rep;
}

PropertyReport check_property1p(const Brace& B, const Budget& budget) {
  const GroupShape& shape = B.shape();
  PropertyReport rep;
  rep.property_id = "property1'";
  rep.m = property_m(shape.p());
  rep.holds = true;
  (void)budget;

  BoxSubgroup pA = p_power_subgroup(shape, 1);
  LeftSeries ls = left_series(B);
  if (ls.sampled_left_factors) {
    rep.exhaustive = false;
    rep.note += "series_left_factors=sampled;";
  }
  // A^m is terms[m-1]; its generators decide containment in the subgroup pA.
  if (rep.m == 0) {
    rep.holds = false;
    rep.note += "m=0;";
    return rep;
  }
  std::vector<u64> gens;
  if (rep.m - 1 < ls.terms.size())
    gens = ls.terms[rep.m - 1].generators;
  else if (ls.reached_zero)
    gens = {0};  // the nested chain stays 0 past its end
  else
    gens = ls.terms.back().generators;  // stabilized above zero
  for (u64 g : gens) {
    if (!pA.contains_idx(g)) {
      rep.holds = false;
      rep.witness =
          AxiomFailure{"property1p", {g}, "generator of A^m outside pA"};
      return rep;
    }
  }
  return rep;
}

PropertyReport check_property1pp(const Brace& B, const Budget& budget) {
  const GroupShape& shape = B.shape();
  const u64 N = shape.order();
  PropertyReport rep;
  rep.property_id = "property1''";
  rep.m = property_m(shape.p());
  rep.holds = true;
  if (rep.m == 0) {
    rep.holds = false;
    rep.note += "m=0;";
    return rep;
  }

  const u64 left_cap = u64(1) << 22;
  const bool all_left = N <= left_cap;
  if (!all_left) {
    rep.exhaustive = false;
    rep.note += "left_factors=sampled;";
  }

  for (unsigned i = 1; i <= shape.max_exponent(); ++i) {
    BoxSubgroup anni = annihilator(shape, i);
    BoxSubgroup target = anni.scaled(1);  // p * ann(p^i)
    // generators of the box subgroup: p^{beta_j} e_j
    std::vector<u64> gens;
    for (unsigned j = 0; j < shape.rank(); ++j) {
      GElement g = shape.zero();
      if (anni.betas()[j] < shape.exponents()[j]) {
        g[j] = ipow(shape.p(), anni.betas()[j]);
        gens.push_back(shape.index_of(g));
      }
    }
    for (unsigned step = 0; step < rep.m; ++step) {
      std::vector<u64> prods;
      if (all_left) {
        for (u64 a = 0; a < N; ++a)
          for (u64 x : gens) prods.push_back(B.star(a, x));
      } else {
        for (u64 t = 0; t < 4096; ++t) {
          u64 a = rng_below(rng_stream(budget.seed ^ (i * 97 + step), t), N);
          for (u64 x : gens) prods.push_back(B.star(a, x));
        }
        for (unsigned bi = 0; bi < shape.rank(); ++bi)
          for (u64 x : gens)
            prods.push_back(B.star(shape.index_of(shape.basis(bi)), x));
      }
      Span s = close_span(shape, std::move(prods));
      gens = s.generators;
      if (gens.empty()) break;  // span is 0
    }
    for (u64 g : gens) {
      if (!target.contains_idx(g)) {
        rep.holds = false;
        rep.witness = AxiomFailure{
            "property1pp", {g, i}, "m-fold mixed product leaves p*ann(p^i)"};
        return rep;
      }
    }
  }
  return rep;
}

PropertyReport check_property2(const Brace& B, unsigned k, const Budget& budget) {
  const GroupShape& shape = B.shape();
  const u64 N = shape.order();
  PropertyReport rep;
  rep.property_id = "property2";
  rep.k = k;
  rep.holds = true;

  const i64 pk = static_cast<i64>(ipow(shape.p(), k));
  const i64 p2k = static_cast<i64>(ipow(shape.p(), std::min<unsigned>(
                                                       2 * k, 62)));
  auto u_of = [&](u64 a) { return shape.idx_smul(p2k, a); };
  auto v_of = [&](u64 a) {
    return shape.idx_smul(pk, B.circ_pow(a, static_cast<i64>(ipow(shape.p(), k))));
  };

  const u64 full_cap = u64(1) << 22;
  if (N <= full_cap) {
    // partition comparison: v must be constant on u-classes and injective
    // across them
    std::map<u64, u64> u_to_v;
    std::map<u64, u64> v_to_u;
    for (u64 a = 0; a < N; ++a) {
      u64 u = u_of(a), v = v_of(a);
      auto it = u_to_v.find(u);
      if (it == u_to_v.end()) {
        u_to_v[u] = v;
        auto jt = v_to_u.find(v);
        if (jt != v_to_u.end() && jt->second != u) {
          rep.holds = false;
          rep.witness = AxiomFailure{
              "property2_biconditional", {a}, "v equal on distinct u-classes"};
          return rep;
        }
        v_to_u[v] = u;
      } else if (it->second != v) {
        rep.holds = false;
        rep.witness = AxiomFailure{
            "property2_biconditional", {a}, "v differs within a u-class"};
        return rep;
      }
    }
  } else {
    rep.exhaustive = false;
    rep.samples = budget.samples;
    for (u64 t = 0; t < budget.samples; ++t) {
      u64 a = rng_below(rng_stream(budget.seed, 2 * t), N);
      u64 b = rng_below(rng_stream(budget.seed, 2 * t + 1), N);
      bool ueq = u_of(a) == u_of(b);
      bool veq = v_of(a) == v_of(b);
      if (ueq != veq) {
        rep.holds = false;
        rep.witness =
            AxiomFailure{"property2_biconditional", {a, b}, "iff violated"};
        return rep;
      }
    }
  }

  WitnessReport clauses = check_extraction_preconditions(B, budget);
  rep.exhaustive = rep.exhaustive && clauses.exhaustive;
  if (!clauses.passed) {
    rep.holds = false;
    rep.witness = clauses.witness;
  }
  return rep;
}

PropertyReport check_property3(const PreLie& P, const Budget& budget) {
  const GroupShape& shape = P.shape();
  const u64 N = shape.order();
  PropertyReport rep;
  rep.property_id = "property3";
  if (shape.p() <= 3)
    throw precondition_error("check_property3: requires p > 3");
  rep.m = property_m(shape.p());
  rep.holds = true;
  const unsigned m = rep.m;

  BoxSubgroup pA = p_power_subgroup(shape, 1);

  // clause 1: independent left factors
  u128 work = 1;
  for (unsigned t = 0; t <= m; ++t) work *= N;
  rep.exhaustive = work <= budget.max_triples;
  auto word = [&](const std::vector<u64>& as, u64 x) {
    u64 cur = x;
    for (unsigned t = m; t-- > 0;) cur = P.dot(as[t], cur);
    return cur;
  };
  if (rep.exhaustive) {
    std::vector<u64> as(m, 0);
    u64 tuples = 1;
    for (unsigned t = 0; t < m; ++t) tuples *= N;
    for (u64 enc = 0; enc < tuples; ++enc) {
      u64 e = enc;
      for (unsigned t = 0; t < m; ++t) {
        as[t] = e % N;
        e /= N;
      }
      for (u64 b = 0; b < N; ++b) {
        if (!pA.contains_idx(word(as, b))) {
          rep.holds = false;
          rep.witness =
              AxiomFailure{"property3_clause1", {as[0], b}, "product not in pA"};
          return rep;
        }
      }
    }
  } else {
    rep.samples = budget.samples;
    std::vector<u64> as(m);
    for (u64 t = 0; t < budget.samples; ++t) {
      for (unsigned j = 0; j < m; ++j)
        as[j] = rng_below(rng_stream(budget.seed, t * (m + 1) + j), N);
      u64 b = rng_below(rng_stream(budget.seed, t * (m + 1) + m), N);
      if (!pA.contains_idx(word(as, b))) {
        rep.holds = false;
        rep.witness =
            AxiomFailure{"property3_clause1", {as[0], b}, "product not in pA"};
        return rep;
      }
    }
  }

  // clause 2
  for (unsigned i = 1; i <= shape.max_exponent(); ++i) {
    BoxSubgroup anni = annihilator(shape, i);
    BoxSubgroup target = anni.scaled(1);
    u64 M = anni.subgroup_order();
    u128 w2 = M;
    for (unsigned t = 0; t < m; ++t) w2 *= N;
    bool ex = w2 <= budget.max_triples;
    rep.exhaustive = rep.exhaustive && ex;
    u64 count = ex ? static_cast<u64>(w2) : budget.samples;
    std::vector<u64> as(m);
    for (u64 t = 0; t < count; ++t) {
      u64 x;
      if (ex) {
        u64 e = t;
        x = shape.index_of(anni.member(e % M));
        e /= M;
        for (unsigned j = 0; j < m; ++j) {
          as[j] = e % N;
          e /= N;
        }
      } else {
        for (unsigned j = 0; j < m; ++j)
          as[j] = rng_below(rng_stream(budget.seed ^ i, t * (m + 1) + j), N);
        x = shape.index_of(anni.member(
            rng_below(rng_stream(budget.seed ^ i, t * (m + 1) + m), M)));
      }
      if (!target.contains_idx(word(as, x))) {
        rep.holds = false;
        rep.witness = AxiomFailure{
            "property3_clause2", {as[0], x, i}, "product leaves p*ann(p^i)"};
        return rep;
      }
    }
  }
  return rep;
}

PropertyReport rank_criterion(const Brace& B, const Budget& budget) {
  const GroupShape& shape = B.shape();
  PropertyReport rep;
  rep.property_id = "rank_criterion";
  rep.m = property_m(shape.p());
  rep.holds = shape.rank() <= rep.m;
  rep.note = "rank=" + std::to_string(shape.rank()) + ";";
  if (rep.holds) {
    PropertyReport p1 = check_property1(B, budget);
    rep.exhaustive = p1.exhaustive;
    rep.samples = p1.samples;
    if (!p1.holds) {
      rep.critical = true;
      rep.witness = p1.witness;
      rep.note += "CRITICAL: rank criterion holds but Property 1 fails;";
    }
  }
  return rep;
}

PropertyReport uniform_criterion(const Brace& B, const Budget& budget) {
  const GroupShape& shape = B.shape();
  const u64 N = shape.order();
  PropertyReport rep;
  rep.property_id = "uniform_criterion";
  rep.m = property_m(shape.p());

  bool uniform = true;
  for (unsigned e : shape.exponents()) uniform &= (e == shape.exponents()[0]);
  rep.note = uniform ? "uniform=yes;" : "uniform=no;";
  if (!uniform || rep.m == 0) {
    rep.holds = false;
    return rep;
  }

  // m-fold star clause (same left factor, as in the lemma)
  BoxSubgroup pA = p_power_subgroup(shape, 1);
  bool clause = true;
  rep.exhaustive = budget.exhaustive_pairs(N);
  u64 total = rep.exhaustive ? N * N : budget.samples;
  if (!rep.exhaustive) rep.samples = budget.samples;
  for (u64 t = 0; t < total && clause; ++t) {
    u64 a = rep.exhaustive ? t / N : rng_below(rng_stream(budget.seed, 2 * t), N);
    u64 b = rep.exhaustive ? t % N
                           : rng_below(rng_stream(budget.seed, 2 * t + 1), N);
    if (!pA.contains_idx(star_lpow(B, a, rep.m, b))) {
      clause = false;
      rep.witness = AxiomFailure{"uniform_clause", {a, b}, "m-fold star not in pA"};
    }
  }
  rep.holds = clause;

  // the two readings of the series hypothesis, reported side by side
  {
    LeftSeries ls = left_series(B);
    bool in_pA = true, is_zero = true;
    if (rep.m - 1 < ls.terms.size()) {
      const Span& term = ls.terms[rep.m - 1];
      if (rep.m == 1) {
        for (unsigned i = 0; i < shape.rank(); ++i) {
          u64 g = shape.index_of(shape.basis(i));
          in_pA &= pA.contains_idx(g);
          is_zero &= (g == 0);
        }
      } else {
        for (u64 g : term.generators) in_pA &= pA.contains_idx(g);
        is_zero = term.is_zero();
      }
    }
    rep.note += std::string("series_m_in_pA=") + (in_pA ? "yes" : "no") + ";";
    rep.note += std::string("series_m_zero=") + (is_zero ? "yes" : "no") + ";";
  }

  if (rep.holds) {
    PropertyReport p1 = check_property1(B, budget);
    if (!p1.holds) {
      rep.critical = true;
      rep.witness = p1.witness;
      rep.note += "CRITICAL: uniform criterion holds but Property 1 fails;";
    }
  }
  return rep;
}

}  // namespace braceforge

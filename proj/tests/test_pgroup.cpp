#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "braceforge/pgroup.hpp"

using namespace braceforge;

TEST_CASE("shape construction and invariants") {
  GroupShape s(7, {2, 1});
  CHECK(s.order() == 343);
  CHECK(s.exponent_sum() == 3);
  CHECK(s.max_exponent() == 2);
  CHECK(s.rank() == 2);
  CHECK_THROWS_AS(GroupShape(2, {1}), structural_error);
  CHECK_THROWS_AS(GroupShape(9, {1}), structural_error);
  CHECK_THROWS_AS(GroupShape(7, {0}), structural_error);
}

TEST_CASE("modular wraparound and scalar multiples") {
  GroupShape z49(7, {2});
  CHECK(z49.add({48}, {3}) == GElement{2});
  CHECK(z49.smul(0, {5}) == GElement{0});
  GroupShape s(7, {2, 1});
  CHECK(s.smul(7, {1, 1}) == GElement{7, 0});
  CHECK(s.smul(-1, {1, 1}) == s.neg({1, 1}));
  // negative scalars wrap exactly
  CHECK(s.smul(-3, {5, 2}) == s.sub(s.zero(), s.smul(3, {5, 2})));
}

TEST_CASE("indexing is a mixed-radix bijection") {
  GroupShape s(5, {2, 1, 1});
  for (u64 i = 0; i < s.order(); ++i) CHECK(s.index_of(s.element(i)) == i);
  // index-level ops agree with coefficient-level ops
  for (u64 a = 0; a < s.order(); a += 7)
    for (u64 b = 0; b < s.order(); b += 11) {
      CHECK(s.idx_add(a, b) == s.index_of(s.add(s.element(a), s.element(b))));
      CHECK(s.idx_sub(a, b) == s.index_of(s.sub(s.element(a), s.element(b))));
    }
}

TEST_CASE("p-power subgroups") {
  GroupShape z343(7, {3});
  BoxSubgroup s1 = p_power_subgroup(z343, 1);
  CHECK(s1.betas() == std::vector<unsigned>{1});
  CHECK(s1.subgroup_order() == 49);  // {0,7,...,336}
  GroupShape s(7, {2, 1});
  BoxSubgroup s2 = p_power_subgroup(s, 2);
  CHECK(s2.betas() == std::vector<unsigned>{2, 1});
  CHECK(s2.subgroup_order() == 1);
  BoxSubgroup s0 = p_power_subgroup(s, 0);
  CHECK(s0.subgroup_order() == s.order());
}

TEST_CASE("annihilators, with a brute-force oracle") {
  GroupShape z343(7, {3});
  CHECK(annihilator(z343, 1).betas() == std::vector<unsigned>{2});
  CHECK(annihilator(z343, 3).betas() == std::vector<unsigned>{0});

  // Z/49 + Z/7, i=1: scan all 343 elements for 7x = 0
  GroupShape s(7, {2, 1});
  BoxSubgroup ann = annihilator(s, 1);
  u64 count = 0;
  for (u64 i = 0; i < s.order(); ++i) {
    GElement x = s.element(i);
    bool killed = s.is_zero(s.smul(7, x));
    CHECK(killed == ann.contains(x));
    count += killed;
  }
  CHECK(count == ann.subgroup_order());
  CHECK(ann.betas() == std::vector<unsigned>{1, 0});  // 7Z/49 (+) {0}
}

TEST_CASE("duality ann(p^i) ∩ p^jA = p^j ann(p^{i+j})") {
  for (unsigned alpha : {1u, 2u, 3u, 4u}) {
    GroupShape s(5, {alpha, 2});
    for (unsigned i = 0; i <= 4; ++i)
      for (unsigned j = 0; j <= 4; ++j) {
        BoxSubgroup lhs = annihilator(s, i).intersect(p_power_subgroup(s, j));
        BoxSubgroup rhs = annihilator(s, i + j).scaled(j);
        CHECK(lhs.betas() == rhs.betas());
      }
  }
}

TEST_CASE("coset representatives") {
  GroupShape z343(7, {3});
  BoxSubgroup I = annihilator(z343, 2);  // 7Z/343
  CHECK(I.coset_rep({10}) == GElement{3});

  // rep(x) = rep(y) iff x - y in S, exhaustively on Z/49 + Z/7
  GroupShape s(7, {2, 1});
  BoxSubgroup S(s, {1, 1});
  for (u64 a = 0; a < s.order(); ++a)
    for (u64 b = 0; b < s.order(); ++b) {
      bool same = S.coset_rep_idx(a) == S.coset_rep_idx(b);
      bool diff_in = S.contains(s.sub(s.element(a), s.element(b)));
      CHECK(same == diff_in);
    }

  // quotient by the whole group
  BoxSubgroup whole(s, {0, 0});
  CHECK(whole.quotient_shape().order() == 1);
  CHECK(whole.quotient_shape().rank() == 0);
}

TEST_CASE("quotient lift/project round-trip") {
  GroupShape s(7, {3, 2});
  BoxSubgroup S(s, {2, 1});
  GroupShape q = S.quotient_shape();
  CHECK(q.order() == S.quotient_order());
  for (u64 t = 0; t < q.order(); ++t)
    CHECK(S.project_idx(q, S.lift_idx(q, t)) == t);
}

TEST_CASE("rho_inv both modes") {
  GroupShape z49(7, {2});
  CHECK(rho_inv(z49, {14}, PullbackChoice::canonical()) == GElement{2});
  CHECK(rho_inv(z49, {0}, PullbackChoice::canonical()) == GElement{0});
  CHECK_THROWS_AS(rho_inv(z49, {3}, PullbackChoice::canonical()),
                  std::domain_error);

  // p * rho_inv(x) = x for all x in pA, both modes, several shapes
  for (const GroupShape& s :
       {GroupShape(7, {2}), GroupShape(7, {2, 1}), GroupShape(5, {3})}) {
    BoxSubgroup pA = p_power_subgroup(s, 1);
    for (const PullbackChoice& c :
         {PullbackChoice::canonical(), PullbackChoice::offset(11),
          PullbackChoice::offset(99)}) {
      for (u64 i = 0; i < s.order(); ++i) {
        GElement x = s.element(i);
        if (!pA.contains(x)) continue;
        GElement r = rho_inv(s, x, c);
        CHECK(s.smul(static_cast<i64>(s.p()), r) == x);
      }
    }
  }
}

TEST_CASE("rho_inv additivity defect lies in ann(p)") {
  GroupShape s(7, {2, 1});
  BoxSubgroup pA = p_power_subgroup(s, 1);
  BoxSubgroup ann1 = annihilator(s, 1);
  for (const PullbackChoice& c :
       {PullbackChoice::canonical(), PullbackChoice::offset(5)}) {
    for (u64 i = 0; i < s.order(); ++i)
      for (u64 j = 0; j < s.order(); ++j) {
        GElement x = s.element(i), y = s.element(j);
        if (!pA.contains(x) || !pA.contains(y)) continue;
        GElement d = s.sub(rho_inv(s, s.add(x, y), c),
                           s.add(rho_inv(s, x, c), rho_inv(s, y, c)));
        CHECK(ann1.contains(d));
      }
  }
}

TEST_CASE("wp_inv") {
  GroupShape z343(7, {3});
  CHECK(wp_inv(z343, {98}, 2, PullbackChoice::canonical()) == GElement{2});
  // k = 1 reduces to rho_inv
  for (u64 x = 0; x < 343; x += 7)
    CHECK(wp_inv(z343, {x}, 1, PullbackChoice::canonical()) ==
          rho_inv(z343, {x}, PullbackChoice::canonical()));
  // p^2 wp_inv(x) = x for all x in p^2 A
  BoxSubgroup p2A = p_power_subgroup(z343, 2);
  for (u64 t = 0; t < p2A.subgroup_order(); ++t) {
    GElement x = p2A.member(t);
    GElement r = wp_inv(z343, x, 2, PullbackChoice::canonical());
    CHECK(z343.smul(49, r) == x);
  }
}

TEST_CASE("Lemma-33 additivity of wp_inv classes") {
  // [wp(a)]_I + [wp(b)]_I = [wp(a+b)]_I when I contains ann(p^k)
  GroupShape s(5, {4});
  unsigned k = 2;
  BoxSubgroup p2A = p_power_subgroup(s, k);
  BoxSubgroup I = annihilator(s, k);  // I = ann(p^k)
  for (const PullbackChoice& c :
       {PullbackChoice::canonical(), PullbackChoice::offset(3)}) {
    for (u64 ta = 0; ta < p2A.subgroup_order(); ++ta)
      for (u64 tb = 0; tb < p2A.subgroup_order(); ++tb) {
        GElement a = p2A.member(ta), b = p2A.member(tb);
        GElement lhs = I.coset_rep(wp_inv(s, s.add(a, b), k, c));
        GElement rhs =
            I.coset_rep(s.add(wp_inv(s, a, k, c), wp_inv(s, b, k, c)));
        CHECK(lhs == rhs);
      }
  }
}

TEST_CASE("min_k") {
  CHECK(min_k(GroupShape(7, {3})) == 1);
  CHECK(min_k(GroupShape(7, {7})) == 2);
  CHECK(min_k(GroupShape(5, {4})) == 1);
  CHECK(min_k(GroupShape(13, {6})) == 1);
}

TEST_CASE("number theory helpers") {
  CHECK(powmod(3, 7, 49) == 31);
  CHECK(invmod(34, 49) == 13);  // extended-Euclid oracle: 34*13 = 442 = 9*49+1
  CHECK(mulmod(34, 13, 49) == 1);
  CHECK(valuation(40320, 7) == 1);  // 8!
  CHECK(is_prime_u64(13));
  CHECK(!is_prime_u64(49));
}

#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "braceforge/brace.hpp"

namespace braceforge {

/**
 * Context for the binomial-weighted correspondence machinery on a brace
 * with Property 1 and p >= 7:
 *   e'_i = i-fold left star power,
 *   e_j  = e'_j for p∤j, and for p | j (s = v_p(j))
 *          e_j(a,b) = d_s(a, e'_{j-(p-1)s/2}(a,b)),
 *          d_1 = e_0, d_{i+1}(a,b) = e_0(a, d_i(a,b)),
 *   e_0(a,b) = e'_{(p-1)/2}(a, rho^{-1}(b))  for b in pA,
 *   a⋆b = sum_{j=1}^{p^k} sigma_j e_j(a,b),  f(a) = sum sigma_j e_j(a),
 * where C(p^k, j) = p^{k - v_p(j)} sigma_j (binomial units, distinct from
 * the factorial units of the flows module).
 */
class CorrContext {
 public:
  /// Verifies Property 1 on B with `budget` unless skip_property_check.
  CorrContext(Brace B, unsigned k, PullbackChoice choice, const Budget& budget,
              bool skip_property_check = false);

  const Brace& brace() const { return B_; }
  const GroupShape& shape() const { return B_.shape(); }
  unsigned k() const { return k_; }
  unsigned m() const { return m_; }
  u64 pk() const { return pk_; }
  const PullbackChoice& choice() const { return choice_; }

  /// v_p(j) for the binomial context.
  unsigned binom_s(u64 j) const { return binom_s_[j]; }
  /// Unit sigma_j with C(p^k, j) = p^{k-s_j} sigma_j, reduced mod p^n.
  u64 binom_sigma(u64 j) const { return binom_sigma_[j]; }

  /// If set, every star_op/f_map call asserts its defining identity
  /// (p^k(a⋆b) = a^{∘p^k}*b resp. p^k f(a) = a^{∘p^k}).
  bool verify_on_eval = true;

  u64 e_prime(unsigned i, u64 a, u64 x) const;
  u64 e_prime_atom(unsigned i, u64 a) const;
  /// e_0; argument must lie in pA.
  u64 e_zero(u64 a, u64 x) const;
  u64 e_full(u64 j, u64 a, u64 x) const;
  u64 e_full_atom(u64 j, u64 a) const;

  u64 star_op(u64 a, u64 b) const;
  u64 f_map(u64 a) const;

  /// ⋆ iterates: tilde-e'_1(a,b) = a⋆b, tilde-e'_{i+1} = a ⋆ tilde-e'_i.
  u64 star_iterate(unsigned i, u64 a, u64 b) const;

 private:
  Brace B_;
  unsigned k_;
  unsigned m_;
  u64 pk_;
  PullbackChoice choice_;
  std::vector<unsigned> binom_s_;
  std::vector<u64> binom_sigma_;
};

/**
 * The permutation [a] -> [f(a)] on A/ann(p^{2k}) together with its inverse
 * g (computed by tabulation); cycle lengths are recorded to validate the
 * closed form g = f^{(p^n!-1)} by divisibility.
 */
struct GMap {
  GroupShape qshape;
  std::vector<u32> f_induced;
  std::vector<u32> g;
  u64 max_cycle = 0;
};

GMap g_map(const CorrContext& ctx);

/// Both Lemma-wazny displays over (a,b) resp. a, budgeted.
WitnessReport verify_wazny(const CorrContext& ctx, const Budget& budget);

/// [f(a)]⊙[b] = [a⋆b] plus the depth-iterated identity
/// bar-e'_i([f(a)],[b]) = [tilde-e'_i(a,b)].
WitnessReport verify_fstar_odot(const CorrContext& ctx, unsigned depth,
                                const Budget& budget);

/// Lemma e_0 instances: e_{(p-3)/2}(a, ann(p)) = 0,
/// e_{(p-3)/2}(a, A) within pA, the alternative e_0 form, and the
/// atom-variant membership; plus additivity of e_i in its second argument.
WitnessReport verify_e0_lemma(const CorrContext& ctx, const Budget& budget);

/// Star-iterate memberships: tilde-e'_{(p-3)/2}(a,b) in pA and
/// tilde-e'_{(p-3)/2}(a, ann(p)) = 0.
WitnessReport verify_star_iterates(const CorrContext& ctx, const Budget& budget);

}  // namespace braceforge

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "braceforge/parallel.hpp"

namespace braceforge {

/// An element of a finite abelian p-group, as one residue per cyclic factor.
/// Always kept in canonical form: coeffs[i] in [0, p^{alpha_i}).
using GElement = std::vector<u64>;

struct structural_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct precondition_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct critical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- exact integer helpers ----

bool is_prime_u64(u64 n);

inline u64 mulmod(u64 a, u64 b, u64 m) {
  return static_cast<u64>((static_cast<u128>(a) * b) % m);
}

u64 powmod(u64 base, u64 exp, u64 m);

/// Inverse of a mod m via extended Euclid; throws if gcd(a, m) != 1.
u64 invmod(u64 a, u64 m);

/// p-adic valuation of n (n > 0).
unsigned valuation(u64 n, u64 p);

u64 ipow(u64 base, unsigned exp);

/**
 * GroupShape describes a finite abelian p-group  A = ⊕_i Z/p^{alpha_i}
 * for an odd prime p. Elements are indexed in mixed-radix little-endian
 * order over their coefficient vectors, so index 0 is the zero element and
 * the index space is [0, |A|). All arithmetic is exact.
 */
class GroupShape {
 public:
  GroupShape(u64 p, std::vector<unsigned> exponents);

  u64 p() const { return p_; }
  const std::vector<unsigned>& exponents() const { return exps_; }
  unsigned rank() const { return static_cast<unsigned>(exps_.size()); }
  /// n with |A| = p^n.
  unsigned exponent_sum() const { return n_; }
  unsigned max_exponent() const { return emax_; }
  u64 order() const { return order_; }
  u64 modulus(unsigned i) const { return mods_[i]; }

  bool operator==(const GroupShape& o) const {
    return p_ == o.p_ && exps_ == o.exps_;
  }

  void require_same(const GroupShape& o) const;
  void require_element(const GElement& x) const;

  GElement zero() const { return GElement(rank(), 0); }
  GElement basis(unsigned i) const;

  GElement add(const GElement& x, const GElement& y) const;
  GElement sub(const GElement& x, const GElement& y) const;
  GElement neg(const GElement& x) const;
  /// m may be any integer, negative included.
  GElement smul(i64 m, const GElement& x) const;

  bool is_zero(const GElement& x) const;

  u64 index_of(const GElement& x) const;
  GElement element(u64 index) const;

  // Index-level arithmetic for hot loops.
  u64 idx_add(u64 a, u64 b) const;
  u64 idx_sub(u64 a, u64 b) const;
  u64 idx_neg(u64 a) const;
  u64 idx_smul(i64 m, u64 a) const;

  std::string str(const GElement& x) const;
  std::string str_idx(u64 a) const;

 private:
  u64 p_;
  std::vector<unsigned> exps_;
  std::vector<u64> mods_;
  std::vector<u64> strides_;
  u64 order_;
  unsigned n_;
  unsigned emax_;
};

/**
 * A basis-aligned subgroup  S = ⊕_i p^{beta_i} Z/p^{alpha_i}  with
 * 0 <= beta_i <= alpha_i. Covers p^iA and ann(p^i) and their intersections;
 * membership and coset reduction are coordinatewise.
 */
class BoxSubgroup {
 public:
  BoxSubgroup(GroupShape shape, std::vector<unsigned> betas);

  const GroupShape& shape() const { return shape_; }
  const std::vector<unsigned>& betas() const { return betas_; }

  /// |S|.
  u64 subgroup_order() const;
  /// |A/S|.
  u64 quotient_order() const;

  bool contains(const GElement& x) const;
  bool contains_idx(u64 a) const;

  /// Canonical coset representative: coords reduced mod p^{beta_i}.
  GElement coset_rep(const GElement& x) const;
  u64 coset_rep_idx(u64 a) const;

  /// Shape of A/S: exponents [beta_i], zero components dropped.
  /// Quotient by the whole group yields the one-element (rank 0) shape.
  GroupShape quotient_shape() const;

  /// Maps between quotient coordinates and canonical parent representatives.
  GElement lift(const GroupShape& qshape, const GElement& q) const;
  GElement project(const GroupShape& qshape, const GElement& x) const;
  u64 project_idx(const GroupShape& qshape, u64 a) const;
  u64 lift_idx(const GroupShape& qshape, u64 q) const;

  /// t-th element of S itself (t in [0, subgroup_order())).
  GElement member(u64 t) const;

  BoxSubgroup intersect(const BoxSubgroup& o) const;
  /// p^j * S as a box subgroup.
  BoxSubgroup scaled(unsigned j) const;
  bool subgroup_of(const BoxSubgroup& o) const;

 private:
  GroupShape shape_;
  std::vector<unsigned> betas_;
};

BoxSubgroup p_power_subgroup(const GroupShape& shape, unsigned i);
BoxSubgroup annihilator(const GroupShape& shape, unsigned i);

/**
 * A choice of pullback rho^{-1}: pA -> A with p * rho^{-1}(x) = x.
 * Canonical mode divides the canonical representative coordinatewise.
 * Offset mode adds a seeded pseudorandom ann(p) element on top; it exists
 * to exercise the choice-independence claims.
 */
struct PullbackChoice {
  enum class Mode { canonical, offset };
  Mode mode = Mode::canonical;
  u64 seed = 0;

  static PullbackChoice canonical() { return {}; }
  static PullbackChoice offset(u64 seed) {
    return {Mode::offset, seed};
  }
  std::string str() const;
};

/// rho^{-1}(x) for x in pA; throws std::domain_error otherwise.
GElement rho_inv(const GroupShape& shape, const GElement& x,
                 const PullbackChoice& choice);

/// Allocation-free index-level variants for hot loops.
u64 rho_inv_idx(const GroupShape& shape, u64 x, const PullbackChoice& choice);
u64 wp_inv_idx(const GroupShape& shape, u64 x, unsigned k,
               const PullbackChoice& choice);

/// (rho^{-1})^k. In offset mode each intermediate is re-checked to lie in
/// pA; a violation reports the failing step index.
GElement wp_inv(const GroupShape& shape, const GElement& x, unsigned k,
                const PullbackChoice& choice);

/// Smallest k >= 1 with k(p-1) >= max alpha_i, so that p^{k(p-1)}A = 0.
unsigned min_k(const GroupShape& shape);

}  // namespace braceforge

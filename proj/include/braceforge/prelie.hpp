#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "braceforge/brace.hpp"
#include "braceforge/pgroup.hpp"

namespace braceforge {

/**
 * A pre-Lie ring over a GroupShape: biadditive product x·y with
 * (x·y)·z - x·(y·z) = (y·x)·z - y·(x·z). Same dual backing as Brace.
 */
class PreLie {
 public:
  static constexpr u64 kTableCap = Brace::kTableCap;

  static PreLie from_table(GroupShape shape, std::vector<u32> table,
                           std::string label, bool verified = false);
  static PreLie from_rule(GroupShape shape, std::function<u64(u64, u64)> rule,
                          std::string label, bool verified = false);

  const GroupShape& shape() const { return *shape_; }
  const std::string& label() const { return label_; }
  bool verified() const { return verified_; }
  void set_verified(bool v) { verified_ = v; }
  bool table_backed() const { return table_ != nullptr; }
  const std::vector<u32>& table() const { return *table_; }

  u64 dot(u64 a, u64 b) const {
    if (table_) return (*table_)[a * shape_->order() + b];
    return rule_(a, b);
  }
  GElement dot(const GElement& a, const GElement& b) const;

  /// L_a^j(b), j >= 0.
  u64 lpow(u64 a, unsigned j, u64 b) const {
    u64 cur = b;
    while (j--) cur = dot(a, cur);
    return cur;
  }
  /// Left-normed product of j copies of a (j >= 1): L_a^{j-1}(a).
  u64 lpow_atom(u64 a, unsigned j) const { return lpow(a, j - 1, a); }

  std::shared_ptr<const std::vector<u32>> dense_table(u64 cap = kTableCap) const;

 private:
  std::shared_ptr<GroupShape> shape_;
  std::shared_ptr<const std::vector<u32>> table_;
  std::function<u64(u64, u64)> rule_;
  bool verified_ = false;
  std::string label_;
};

/// Biadditivity (both sides) and the pre-Lie identity, exhaustive/sampled.
BraceReport verify_prelie(const PreLie& P, const Budget& budget);

/// Smallest m with A(m) = 0 where A(1) = A, A(i+1) = A·A(i).
/// Returns 0 when the chain stabilizes above zero (not left nilpotent).
unsigned left_nilpotency_index(const PreLie& P);

/// Smallest m such that every product of m elements (any bracketing)
/// vanishes; nullopt when the chain stabilizes above zero.
std::optional<unsigned> strong_nilpotency_index(const PreLie& P);

/// Smallest primitive root modulo p^2 (hence modulo p^n for every n >= 1).
u64 primitive_root(u64 p, unsigned n);

/**
 * Constants for the brace -> pre-Lie extraction: xi = gamma^{p^{n-1}} is the
 * order-(p-1) Teichmueller-style unit mod p^n, and scale = -(1+p+...+p^n);
 * scale * (p-1) = 1 mod p^n.
 */
struct XiContext {
  u64 p = 0;
  unsigned n = 0;
  u64 modulus = 0;  // p^n
  u64 gamma = 0;
  u64 xi = 0;
  u64 scale = 0;

  std::vector<u64> xi_powers() const;  // xi^0 .. xi^{p-2} mod p^n
};

XiContext xi_context(u64 p, unsigned n);

/**
 * The pre-Lie ring extracted from a (pseudo)brace on A/ann(p^{2k}):
 *
 *   [a]•[b] = [ wp^{-1}( -(1+p+...+p^n) * sum_{i=0}^{p-2}
 *                        xi^{p-1-i} ((xi^i p^k a) * b) ) ]
 *
 * The class is pinned by p^{2k}([a]•[b]) = [p^k a]·[p^k b]; the pullback
 * realizes the division and leaves the class independent of its choice.
 * Preconditions (ann(p^i), p^iA ideals, (p^iA)*ann(p^j) ⊆ ann(p^{j-i}))
 * are spot-checked with `budget` unless skip_checks.
 */
PreLie extract_prelie(const Brace& B, unsigned k, const PullbackChoice& choice,
                      const Budget& budget, bool skip_checks = false);

/// Spot check of the containment clauses backing extract_prelie/odot:
/// ideals plus (p^iA)*ann(p^j) ⊆ ann(p^{j-i}) for i <= j <= max exponent.
WitnessReport check_extraction_preconditions(const Brace& B,
                                             const Budget& budget);

/// Classic Agrachev-Gamkrelidze flows for strong nilpotency index < p:
/// a∘b = a + b + sum_j (1/j!) L_{Ω(a)}^j(b) with exact modular inverses.
Brace classic_exp_log(const PreLie& P);

}  // namespace braceforge

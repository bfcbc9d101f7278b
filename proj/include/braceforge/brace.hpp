#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "braceforge/pgroup.hpp"

namespace braceforge {

enum class BraceKind { brace, pseudobrace, unverified };

std::string kind_name(BraceKind k);

/// Verification budget. Triple-quantified checks run exhaustively when
/// |A|^3 <= max_triples, otherwise on `samples` seeded samples (the mode and
/// count are recorded in every report).
struct Budget {
  u64 max_triples = 1'000'000'000ULL;
  u64 samples = 1'000'000ULL;
  u64 seed = 0;

  bool exhaustive_triples(u64 order) const {
    u128 cube = static_cast<u128>(order) * order;
    if (cube > max_triples) return false;
    cube *= order;
    return cube <= max_triples;
  }
  bool exhaustive_pairs(u64 order) const {
    return static_cast<u128>(order) * order <= max_triples;
  }
  /// Reduced budget for interior precondition spot checks inside long
  /// pipelines; small instances stay exhaustive.
  Budget spot(u64 cap_triples = 30'000'000ULL, u64 cap_samples = 100'000ULL) const {
    Budget b = *this;
    b.max_triples = std::min(b.max_triples, cap_triples);
    b.samples = std::min(b.samples, cap_samples);
    return b;
  }
};

/**
 * A (pseudo)brace over a GroupShape: the abelian group (A, +) of the shape
 * together with a second operation a∘b, backed either by a dense index
 * table or by a rule. a*b is always a∘b - a - b. kind records what the
 * structure has been verified (or constructed) to be.
 */
class Brace {
 public:
  static constexpr u64 kTableCap = 4096;

  static Brace from_table(GroupShape shape, std::vector<u32> table,
                          BraceKind kind, std::string label);
  static Brace from_rule(GroupShape shape, std::function<u64(u64, u64)> rule,
                         BraceKind kind, std::string label);

  const GroupShape& shape() const { return *shape_; }
  BraceKind kind() const { return kind_; }
  void set_kind(BraceKind k) { kind_ = k; }
  const std::string& label() const { return label_; }
  bool table_backed() const { return table_ != nullptr; }
  const std::vector<u32>& table() const { return *table_; }

  u64 circ(u64 a, u64 b) const {
    if (table_) return (*table_)[a * shape_->order() + b];
    return rule_(a, b);
  }
  u64 star(u64 a, u64 b) const {
    return shape_->idx_sub(shape_->idx_sub(circ(a, b), a), b);
  }
  /// lambda_a(b) = a∘b - a.
  u64 lambda(u64 a, u64 b) const { return shape_->idx_sub(circ(a, b), a); }

  GElement circ(const GElement& a, const GElement& b) const;
  GElement star(const GElement& a, const GElement& b) const;

  /// Inverse of a in (A, ∘), i.e. x with a∘x = 0. Table backing scans the
  /// row once and caches; rule backing walks ∘-powers of a until 0.
  u64 circ_inv(u64 a) const;

  /// a^{∘j} by binary exponentiation (axiom-3 power laws); j = 0 gives 0,
  /// j < 0 uses the ∘-inverse.
  u64 circ_pow(u64 a, i64 j) const;

  /// Order of a in (A, ∘) (smallest t >= 1 with a^{∘t} = 0 computed by
  /// iterated left multiplication); throws if none within |A| steps.
  u64 circ_order(u64 a) const;

  /// Dense ∘ table materialized on demand (|A| <= cap required).
  std::shared_ptr<const std::vector<u32>> dense_table(u64 cap = kTableCap) const;

 private:
  std::shared_ptr<GroupShape> shape_;
  std::shared_ptr<const std::vector<u32>> table_;
  std::function<u64(u64, u64)> rule_;
  BraceKind kind_ = BraceKind::unverified;
  std::string label_;
  mutable std::shared_ptr<std::vector<i64>> inv_cache_;
};

struct AxiomFailure {
  std::string axiom;
  std::vector<u64> witness;  // element indices
  std::string detail;
};

struct BraceReport {
  bool passed = false;
  std::vector<AxiomFailure> failures;
  bool exhaustive = true;
  u64 samples = 0;
  u64 seed = 0;
  u64 checked_triples = 0;
  unsigned series_length = 0;  // terms until 0, A included
  std::string note;

  std::string summary() const;
};

/// Group axioms for (A, ∘) with identity 0 plus the brace distributivity
/// law a∘(b+c)+a = a∘b+a∘c. fail_fast stops at the first witness.
BraceReport verify_brace(const Brace& B, const Budget& budget,
                         bool fail_fast = false);

/// Pseudobrace axioms 2-5: ∘-inverses, the power laws over an element-order
/// window, A^{n+1} = 0 via the left series, and left distributivity of *.
BraceReport verify_pseudobrace(const Brace& B, const Budget& budget);

/// Additive span of a set of generators, as element indices (sorted).
/// Used for left series and nilpotency chains.
struct Span {
  std::vector<u64> elements;  // sorted indices
  std::vector<u64> generators;

  bool is_zero() const {
    return elements.size() == 1 && elements[0] == 0;
    }
  u64 size() const { return elements.size(); }
};

Span close_span(const GroupShape& shape, std::vector<u64> gens);

struct LeftSeries {
  std::vector<Span> terms;  // terms[0] = A (represented by generators only)
  bool reached_zero = false;
  bool sampled_left_factors = false;
};

/// A^1 = A, A^{i+1} = A * A^i (additive spans). Left factors range over all
/// of A when |A| <= left_cap, otherwise over a seeded sample (recorded).
LeftSeries left_series(const Brace& B, u64 left_cap = 1 << 22,
                       u64 sample_left = 4096, u64 seed = 0);

/// Ideal test: i*a, a*i in S for i in S, a in A; with pseudo_clause also
/// (a+i)*(b+j) - a*b in S. Budgeted; returns witness on failure.
struct IdealReport {
  bool is_ideal = true;
  bool exhaustive = true;
  std::optional<AxiomFailure> witness;
};
IdealReport is_ideal(const Brace& B, const BoxSubgroup& S,
                     const Budget& budget, bool pseudo_clause = false);

/// Factor structure on canonical coset representatives. Requires I to be
/// an ideal (checked with `budget` unless skip_check).
Brace quotient(const Brace& B, const BoxSubgroup& I, const Budget& budget,
               bool skip_check = false);

/// Brace structure on p^kA, re-indexed compactly. Closure under ∘ is
/// spot-checked; a violation throws precondition_error with a witness.
Brace sub_pk(const Brace& B, unsigned k, const Budget& budget);

/**
 * The induced operation  [x]⊙[y] = [℘^{-1}((p^k x) * y)]  on the quotient
 * A/ann(p^{2k}). Uses canonical lifts; well-definedness across coset
 * representatives and pullback choices is verified by verify_odot_*.
 */
class OdotOp {
 public:
  OdotOp(const Brace& B, unsigned k, PullbackChoice choice);

  const GroupShape& qshape() const { return qshape_; }
  const BoxSubgroup& modulus() const { return box_; }
  unsigned k() const { return k_; }

  /// ⊙ on quotient indices.
  u64 eval(u64 qx, u64 qy) const;
  /// ⊙ evaluated from chosen parent representatives (for independence tests).
  u64 eval_reps(u64 parent_x, u64 parent_y) const;

  /// Theorem-level preconditions: p^kA, ann(p^k), ann(p^{2k}) ideals and
  /// (p^kA)*ann(p^{2k}) ⊆ ann(p^k). Throws precondition_error on failure.
  void check_preconditions(const Budget& budget) const;

 private:
  Brace B_;
  unsigned k_;
  PullbackChoice choice_;
  BoxSubgroup box_;
  GroupShape qshape_;
};

struct WitnessReport {
  bool passed = true;
  bool exhaustive = true;
  u64 samples = 0;
  std::optional<AxiomFailure> witness;
};

/// Representative independence of ⊙ over full coset fibres.
WitnessReport verify_odot_representatives(const OdotOp& op, const Budget& budget);
/// Choice independence: canonical vs each offset seed.
WitnessReport verify_odot_choices(const Brace& B, unsigned k,
                                  const std::vector<u64>& offset_seeds,
                                  const Budget& budget);

/// Yang-Baxter map r(x,y) = (x∘y-x, z∘x), z the ∘-inverse of x∘y-x.
struct YbReport {
  bool involutive = true;
  bool braid = true;
  bool exhaustive = true;
  u64 samples = 0;
  std::optional<AxiomFailure> witness;
  bool passed() const { return involutive && braid; }
};
std::pair<u64, u64> yb_solution(const Brace& B, u64 x, u64 y);
YbReport verify_ybe(const Brace& B, const Budget& budget);

}  // namespace braceforge

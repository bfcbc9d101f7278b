#pragma once

#include <optional>
#include <string>

#include "braceforge/brace.hpp"
#include "braceforge/prelie.hpp"

namespace braceforge {

/**
 * Result of one hypothesis checker. `critical` is set when a paper-level
 * implication is violated (criterion true but the implied property fails),
 * which would indicate an implementation bug rather than a property of the
 * instance.
 */
struct PropertyReport {
  std::string property_id;
  bool holds = false;
  std::optional<AxiomFailure> witness;
  unsigned m = 0;
  unsigned k = 0;
  bool exhaustive = true;
  u64 samples = 0;
  bool critical = false;
  std::string note;
};

/// Property 1: m-fold a*(a*(...a*b)) lies in pA, and the same word maps
/// ann(p^i) into ann(p^{i-1}) for every i >= 1, with m = floor((p-1)/4).
PropertyReport check_property1(const Brace& B, const Budget& budget);

/// Property 1': the m-th term of the left series lies in pA.
PropertyReport check_property1p(const Brace& B, const Budget& budget);

/// Property 1'': the m-fold mixed product A*(A*...*(A*ann(p^i))) lies in
/// p*ann(p^i) for every i >= 1.
PropertyReport check_property1pp(const Brace& B, const Budget& budget);

/// Property 2 for the given k: p^{2k}a = p^{2k}b iff
/// p^k a^{∘p^k} = p^k b^{∘p^k}, plus the ideal and containment clauses.
PropertyReport check_property2(const Brace& B, unsigned k, const Budget& budget);

/// Property 3: the pre-Lie analogue of Property 1, with independent left
/// factors a_1, ..., a_m.
PropertyReport check_property3(const PreLie& P, const Budget& budget);

/// rank(A) <= floor((p-1)/4) implies Property 1; when the criterion holds
/// the implication is verified and a violation is flagged critical.
PropertyReport rank_criterion(const Brace& B, const Budget& budget);

/// Uniform additive group plus the m-fold star clause imply Property 1.
/// The note also records both readings of the uniform-series hypothesis
/// (A^m within pA, and A^m = 0).
PropertyReport uniform_criterion(const Brace& B, const Budget& budget);

}  // namespace braceforge

#pragma once

#include <map>
#include <optional>
#include <string>

#include "braceforge/brace.hpp"
#include "braceforge/prelie.hpp"

namespace braceforge {

// ---- constructors ----

/// a∘b = a+b.
Brace trivial_brace(GroupShape shape);

/// Z/p^n with a∘b = a + b + lambda*a*b; requires p | lambda (lambda may be
/// 0, giving the trivial brace). The product is then nilpotent, so this is
/// a Jacobson-radical-ring brace.
Brace radical_ring_brace(u64 p, unsigned n, u64 lambda);

/// (Z/p^alpha)^2 with a∘b = (a1+b1, a2+b2+a1*b1). A genuine brace whose
/// a*b = (0, a1*b1) escapes pA: the standing negative control for
/// Property 1.
Brace shear_brace(u64 p, unsigned alpha);

/// Componentwise ∘ on the direct-sum shape (same p required).
Brace direct_sum(const Brace& B1, const Brace& B2);

/// Deterministically swaps two distinct-valued cells of a table-backed
/// brace; the result is marked unverified.
Brace perturb(const Brace& B, u64 seed);

PreLie zero_prelie(GroupShape shape);
/// x·y = mu*x*y on Z/p^n; requires p | mu.
PreLie scaled_prelie(u64 p, unsigned n, u64 mu);
/// x·y = (0, x1*y1) on (Z/p^alpha)^2: a pre-Lie ring failing Property 3.
PreLie shear_prelie(u64 p, unsigned alpha);
PreLie direct_sum(const PreLie& P1, const PreLie& P2);
PreLie perturb(const PreLie& P, u64 seed);

// ---- constructor-spec registry ----
// Spec strings look like "radical:p=7,n=3,lambda=7" or
// "trivial:p=7,exps=2+1". Registered names: trivial, radical, shear,
// sumpow (copies of a radical brace), prelie_zero, prelie_scaled,
// prelie_shear, prelie_sumpow.

bool spec_is_prelie(const std::string& spec);
Brace make_brace(const std::string& spec);
PreLie make_prelie(const std::string& spec);

// ---- persistence ----
// UTF-8 JSON documents; integers beyond 2^53 are decimal strings.
// Rule-backed structures round-trip through their constructor spec,
// table-backed ones through the literal table.

struct parse_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void save_spec(const std::string& spec, const std::string& path);
void save_table(const Brace& B, const std::string& path);
void save_table(const PreLie& P, const std::string& path);

struct LoadedFile {
  std::optional<Brace> brace;
  std::optional<PreLie> prelie;
  std::string provenance;
};

LoadedFile load_file(const std::string& path);

/// Elementwise structural equality (same shape and same operation table).
bool same_operation(const Brace& A, const Brace& B);
bool same_operation(const PreLie& A, const PreLie& B);

}  // namespace braceforge

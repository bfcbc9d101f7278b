#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "braceforge/brace.hpp"
#include "braceforge/prelie.hpp"

namespace braceforge {

/// Legendre's formula: v_p(j!).
unsigned fact_valuation(u64 j, u64 p);

/// j! = gamma_j * p^{s_j} with gamma_j a unit; returns (gamma_j, sigma_j)
/// reduced mod p^n, sigma_j * gamma_j = 1 mod p^n.
std::pair<u64, u64> fact_sigma(u64 j, u64 p, unsigned n);

/**
 * Precomputed constants for the modified group of flows over a pre-Lie
 * ring satisfying Property 3:
 *   E_{j,a} = L_a^{j-eta_j} (rho^{-1})^{s_j} L_a^{eta_j}   for p | j,
 *   E_{j,a} = L_a^j                                        otherwise,
 * with s_j = v_p(j!), eta_j = floor((p-1)/4) * s_j, and
 *   W(a) = sum_{j=1}^{j_max} sigma_j E_{j,a}(atom).
 * All terms with j > j_max = 2M vanish (the outer L-power alone exceeds the
 * left-nilpotency span index M); the truncation spot check guards this.
 */
struct FlowsContext {
  PreLie P;
  u64 p = 0;
  unsigned n = 0;         // carrier order is p^n
  unsigned m = 0;         // floor((p-1)/4)
  unsigned span_index = 0;  // M with A(M) = 0
  unsigned j_max = 0;
  std::vector<unsigned> fact_s;  // index j, up to j_max + 3
  std::vector<unsigned> eta;
  std::vector<u64> gamma;
  std::vector<u64> sigma;
  PullbackChoice choice;
};

/// Builds the context. The pre-Lie ring must be left nilpotent; Property 3
/// itself is the caller's responsibility (check_property3) and is assumed
/// by the E-operators, which raise critical_error if its bookkeeping fails.
FlowsContext make_flows_context(const PreLie& P, PullbackChoice choice);

/// E_{j,a}(x); x = nullopt means the formal atom (so the inner L-power
/// starts from a itself).
u64 E_op(const FlowsContext& ctx, u64 j, u64 a, std::optional<u64> x);

/// W(a) and the binary W(a, b).
u64 W_map(const FlowsContext& ctx, u64 a);
u64 W_bin(const FlowsContext& ctx, u64 a, u64 b);

/**
 * Omega = W^{-1}. Tabulated and inverted when the carrier is within
 * omega_cap (with a bijectivity check); above the cap each query runs a
 * filtration fixed-point iteration whose result is verified by W.
 */
class OmegaMap {
 public:
  static constexpr u64 kOmegaCap = u64(1) << 22;

  OmegaMap(std::shared_ptr<const FlowsContext> ctx, u64 cap = kOmegaCap);

  u64 at(u64 a) const;
  bool tabulated() const { return !table_.empty(); }
  /// Longest W-cycle (tabulated mode). Every length divides p^{n+1}! since
  /// it is at most |A| < p^{n+1}, which validates the closed form
  /// Omega = W^{p^{n+1}! - 1} without literal iteration.
  u64 max_cycle() const { return max_cycle_; }

 private:
  std::shared_ptr<const FlowsContext> ctx_;
  std::vector<u32> table_;
  u64 max_cycle_ = 0;
};

/// The pseudobrace (A, +, ∘') with a ∘' b = a + b + W(Omega(a), b).
Brace flows_circ(std::shared_ptr<const FlowsContext> ctx);

/// Spot check: E_{j,a} is the zero operator for j in (j_max, j_max+3],
/// on the atom and on sampled elements.
WitnessReport verify_truncation(const FlowsContext& ctx, const Budget& budget);

/// W(i*a) = W(a)^{∘' i} in the flows structure for i in [0, window].
WitnessReport verify_w_powers(const FlowsContext& ctx, const Brace& flows,
                              unsigned window, const Budget& budget);

/// Instances of the moving identity
///   L_a^{m j + i}((rho^{-1})^j b) = L_a^{m j}((rho^{-1})^j L_a^i b)
/// for b in p^jA.
WitnessReport verify_moving(const FlowsContext& ctx, unsigned j, unsigned i,
                            const Budget& budget);

struct RoundtripReport {
  bool passed = false;
  bool property1p = false;
  bool property1pp = false;
  bool property3 = false;
  bool w_bijective = false;
  bool exhaustive = true;
  u64 samples = 0;
  u64 final_quotient_order = 0;
  std::string failed_stage;
  std::optional<AxiomFailure> witness;
};

/**
 * Theorem-main1 pipeline: extract the pre-Lie ring of B at level k, run the
 * modified flows on it, and compare the factor brace B/ann(p^{2k}) with the
 * flows pseudobrace, both reduced mod Ann(p^{2k}) of the carrier —
 * elementwise on the final quotient.
 */
RoundtripReport verify_roundtrip(const Brace& B, unsigned k,
                                 const PullbackChoice& choice,
                                 const Budget& budget);

/// Lemma-c instance: ⊙ computed from * on B/ann(p^{2k}) equals ⊙' computed
/// from *' on the flows pseudobrace, on the common final quotient.
RoundtripReport verify_odot_equality(const Brace& B, unsigned k,
                                     const PullbackChoice& choice,
                                     const Budget& budget);

}  // namespace braceforge

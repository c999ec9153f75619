#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ccsp/csp.hpp"
#include "ccsp/hypergraph.hpp"

namespace ccsp {

struct SynthesisOptions {
    // Arity ceiling for symmetrisation during synthesis.
    int max_sym_arity = 6;
    // Bounds for the fallback gadget search (canonical set-arc gadgets).
    int max_gadget_vertices = 6;
    int max_gadget_arcs = 6;
    // Bounds for implementation search over CSP instances.
    int max_aux = 3;
    int max_constraints = 4;
    EnumOptions enumeration;
};

// A gadget whose distinguished vertex is forced to one spin in every
// positive-weight assignment.
struct PinGadget {
    TupleHypergraph h;
    int vertex = 0;
    int spin = 0;

    bool operator==(const PinGadget&) const = default;
};

// A gadget whose distinguished pair agrees with probability one, each spin
// carrying exactly half the mass.
struct PerfectEqualityWitness {
    TupleHypergraph h;
    int u = 0, v = 1;

    bool operator==(const PerfectEqualityWitness&) const = default;
};

// A conditioned gadget whose distinguished pair realises a hard two-spin
// function exactly.
struct HardSimulationWitness {
    TupleHypergraph h;
    Conditioning cond;
    int u = 0, v = 1;
    BinaryWeightedFunction g;

    bool operator==(const HardSimulationWitness&) const = default;
};

struct ClassificationWitness {
    enum class Kind { affine, perfect_equality, hard_simulation, inconclusive };
    Kind kind = Kind::inconclusive;
    std::optional<PerfectEqualityWitness> equality;
    std::optional<HardSimulationWitness> hard;
    // For inconclusive results: which routes were attempted and why each
    // stopped. Non-empty informational traces may accompany any kind.
    std::vector<std::string> trace;

    static ClassificationWitness affine();
    static ClassificationWitness of(PerfectEqualityWitness w);
    static ClassificationWitness of(HardSimulationWitness w);
};

const char* witness_kind_name(ClassificationWitness::Kind k);

// Outcome for functions whose symmetrisation is the empty function: either a
// perfect pinning pair or a perfect equality, exactly one engaged.
struct ZeroStarWitness {
    std::optional<PinGadget> pin0, pin1;
    std::optional<PerfectEqualityWitness> equality;

    bool pinning_branch() const { return pin0.has_value(); }
};

// A CSP instance over a language whose satisfying-extension counts realise a
// target function on the first `t` variables.
struct ImplementationCertificate {
    CspInstance instance;
    int t = 0;
    BooleanFunction target;
};

// The k-vertex gadget of all k! argument orders; forces every vertex to
// `spin`. Requires symmetrise(f) to be the corresponding point function
// (all-ones for spin 1, all-zeros for spin 0).
PinGadget pin_gadget_star(const BooleanFunction& f, int spin,
                          const EnumOptions& opts = {});

// For f with empty symmetrisation but f itself nonempty: locate a
// permutation ladder rung whose partition value collapses, yielding either
// two perfect pins or a glued perfect equality.
ZeroStarWitness zero_star_witness(const BooleanFunction& f, const EnumOptions& opts = {});

// For f whose symmetrisation is equality, odd parity or even parity: the
// all-orders gadget (equality) or the two-window parity chain.
PerfectEqualityWitness equality_gadget_star(const BooleanFunction& f,
                                            const EnumOptions& opts = {});

// Lift a gadget over the pinned restriction h = f with arguments in
// `s0_mask` pinned to 0 and `s1_mask` pinned to 1 (argument masks, bit j =
// argument j) to a gadget over f: one shared fresh vertex per pinned
// argument joins every hyperarc, and a pin-gadget copy anchors each fresh
// vertex. Vertex ids of `h_gadget` survive unchanged; every marginal
// property at them transfers verbatim.
TupleHypergraph lift_gadget(const BooleanFunction& f, uint32_t s0_mask, uint32_t s1_mask,
                            const std::optional<PinGadget>& pin0,
                            const std::optional<PinGadget>& pin1,
                            const TupleHypergraph& h_gadget);

// Unnormalized pair weights induced by the single hyperarc on argument
// positions i < j (1-based): g(s, t) counts the support points of f whose
// i-th coordinate is s and j-th coordinate is t.
BinaryWeightedFunction single_hyperarc_pair_witness(const BooleanFunction& f, int i, int j);

// Perfect exclusive-or simulation for a self-dual f with f(0...0) = 0:
// a single hyperarc with equality splices across the 0-block and the
// 1-block of the smallest support point.
SimGadget sd_xor_gadget(const BooleanFunction& f, const PerfectEqualityWitness& eq,
                        const EnumOptions& opts = {});

// The two-variable collapse plan behind sd_hard_witness, exposed so the
// individual cases can be driven directly: which collapsed variable each
// argument position maps to, the distinguished pair, and the target weights.
struct SdCasePlan {
    std::string label;           // "case1" ... "case5g"
    std::vector<int> var_of_pos; // collapsed variable id per argument position
    int var_count = 0;
    int u = 0, v = 1;            // distinguished variable ids
    BinaryWeightedFunction g;
};
SdCasePlan sd_case_plan(const BooleanFunction& f, uint32_t b, uint32_t c);

// Hard simulation for a self-dual non-affine f supporting perfect equality.
// f(0...0) = 1 runs the collapse plan directly; f(0...0) = 0 first shifts by
// the smallest support point, wiring the shifted positions through the
// exclusive-or gadget.
HardSimulationWitness sd_hard_witness(const BooleanFunction& f,
                                      const PerfectEqualityWitness& eq,
                                      const SynthesisOptions& opts = {});

// Assemble a perfect simulation of a certificate's target from perfect
// constraint simulations: disjoint per-constraint copies plus one equality
// splice per pair of occurrences of each variable. Returned verts hold one
// representative per instance variable.
SimGadget csp_to_gadget(const BooleanFunction& f, const PerfectEqualityWitness& eq,
                        const ImplementationCertificate& cert,
                        const std::vector<SimGadget>& constraint_gadgets,
                        const EnumOptions& opts = {});

// Same assembly when the constraint simulations carry conditionings: the
// occurrence sets enter the output conditioning as equality blocks, merging
// with prior blocks and absorbing into pin sets they touch.
SimGadget csp_to_simulation(const BooleanFunction& f, const SupportCertificate& eq_support,
                            const ImplementationCertificate& cert,
                            const std::vector<SimGadget>& constraint_gadgets,
                            const EnumOptions& opts = {});

// Make a conditioning concrete: splice perfect pin copies onto pinned
// vertices and equality copies across each block pair.
TupleHypergraph realize_conditioning(const TupleHypergraph& h, const Conditioning& cond,
                                     const std::optional<PinGadget>& pin0,
                                     const std::optional<PinGadget>& pin1,
                                     const std::optional<PerfectEqualityWitness>& eq);

struct PinningTransferResult {
    TupleHypergraph h;
    int vertex = 0;
    int spin = 0;
    Rat marginal;  // exact, strictly above 1/2
};

// Transfer a pinning gadget through a simulation: every hyperarc of the
// carrier `h0` (over g) is replaced by a copy of the simulating gadget. The
// carrier must favour `spin` at `v0` with probability at least 9/10, and the
// simulation must sit within the error budget derived from the carrier;
// the final exact marginal must clear 1/2.
PinningTransferResult pinning_transfer(const BooleanFunction& f, const BooleanFunction& g,
                                       const TupleHypergraph& sim_realized,
                                       const std::vector<int>& sim_verts,
                                       const TupleHypergraph& h0, int v0, int spin,
                                       const EnumOptions& opts = {});

struct DeltaPins {
    SimGadget delta0;  // one distinguished vertex forced to 0
    SimGadget delta1;
    SupportCertificate pin0_support, pin1_support;
};

// From a perfect Implies simulation (unconditioned, exact one-third cells):
// pinning the consequent to 0 forces the antecedent, and vice versa. The
// support certificates come from the same gadget's lopsided marginals.
DeltaPins delta_pins_from_implies(const BooleanFunction& f, const SimGadget& implies_sim,
                                  const EnumOptions& opts = {});

struct ImplementSearchResult {
    std::optional<ImplementationCertificate> certificate;
    unsigned long long instances_examined = 0;
    int max_aux = 0;  // bounds the search actually ran with
    int max_constraints = 0;
};

// Exhaustive search for a CSP instance over the language whose extension
// counts match the target exactly: auxiliary variable count ascending, then
// constraint-set size ascending, then lexicographic. Absence within bounds
// is a result, not an error.
ImplementSearchResult implement_search(const std::vector<BooleanFunction>& language,
                                       const BooleanFunction& target,
                                       const SynthesisOptions& opts = {});

// Bounded witness search for f whose symmetrisation falls outside the easy
// list: canonical set-arc gadgets are scanned in size order for perfect
// equality pairs, unconditioned hard pairs, then conditioned hard pairs
// whose ingredients are justified by support certificates collected along
// the way.
ClassificationWitness symmetric_fallback_search(const BooleanFunction& f,
                                                const SynthesisOptions& opts = {});

// Full constructive classification: affine detection, the arity-2 base
// split, and the symmetrisation dispatch with recursion on pinned
// subfunctions. Every returned witness has been re-verified; caps produce
// an inconclusive result with a trace, never an unverified claim.
ClassificationWitness classify_function(const BooleanFunction& f,
                                        const SynthesisOptions& opts = {});

}  // namespace ccsp

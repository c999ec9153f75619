#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ccsp/hypergraph.hpp"

namespace ccsp {

// One constraint: a function from the instance's language applied to an
// ordered variable tuple. Repeats are allowed unless the instance says
// otherwise.
struct Constraint {
    int fn = 0;
    std::vector<int> vars;

    bool operator==(const Constraint&) const = default;
};

struct CspInstance {
    int n = 0;
    std::vector<BooleanFunction> language;
    std::vector<std::string> names;  // optional, parallel to language
    std::vector<Constraint> constraints;
    bool repeat_free = false;  // declared promise, enforced by validate()

    void validate() const;
    // Occurrence count of one variable across all constraint slots.
    int degree_of(int v) const;
    // Max over variables.
    int degree() const;

    bool operator==(const CspInstance&) const = default;
};

// Whether every constraint actually uses distinct variables.
bool is_repeat_free(const CspInstance& inst);

// Exact number of satisfying assignments (weight sum for weighted tables).
Rat brute_count(const CspInstance& inst, const EnumOptions& opts = {});

// Satisfying-assignment counts with the given variables fixed to each of the
// 2^t spin tuples, indexed with distinguished[0] most significant.
std::vector<Rat> extension_counts(const CspInstance& inst,
                                  const std::vector<int>& distinguished,
                                  const EnumOptions& opts = {});

// Exact count via GF(2) elimination; every constraint function must be
// affine. Repeated variables collapse the local system's columns by XOR.
Rat gauss_count(const CspInstance& inst);

struct LanguageClassification {
    enum class Verdict { fp_affine, bis_equivalent, np_hard };
    Verdict verdict = Verdict::fp_affine;
    std::vector<bool> affine;  // per function
    std::vector<bool> in_im2;
    int culprit_affine = -1;  // first non-affine function, -1 if none
    int culprit_im2 = -1;     // first function outside IM_2, -1 if none
    // For NP-hard languages: the product pairing of the two culprits, which
    // is neither affine nor in IM_2.
    std::optional<BooleanFunction> product_evidence;
    std::string note;
};

const char* verdict_name(LanguageClassification::Verdict v);

LanguageClassification classify_language(const std::vector<BooleanFunction>& language);

// Conversions between single-function repeat-free instances and hypergraphs.
CspInstance instance_from_hypergraph(const BooleanFunction& f, const TupleHypergraph& h);
TupleHypergraph hypergraph_from_instance(const CspInstance& inst);

struct BipartiteGraph {
    int nl = 0, nr = 0;
    std::vector<std::pair<int, int>> edges;  // (left index, right index)

    void validate() const;
    int degree() const;  // max over vertices of incident edge count
};

// Exact count of independent sets of a bipartite graph.
Int count_independent_sets(const BipartiteGraph& g);

struct BisReduction {
    TupleHypergraph h;
    std::vector<int> left, right;  // vertex ids hosting the two parts
    Int independent_sets = 0;
    Rat z_gadget;  // partition value of one simulation copy
    Rat z_total;   // partition value of the assembled hypergraph
    bool verified = false;
    int degree = 0;
    std::string note;
};

// Replace every edge of g by a copy of a perfect Implies simulation of f.
// The count identity z_total = independent_sets * (z_gadget / 3)^|E| is
// checked exactly when the assembled hypergraph fits under the enumeration
// cap; otherwise the reduction is returned unverified with a note.
BisReduction bis_reduction(const BipartiteGraph& g, const BooleanFunction& f,
                           const SimGadget& implies_sim, const EnumOptions& opts = {});

}  // namespace ccsp

#pragma once

#include <vector>

#include "ccsp/boolfn.hpp"

namespace ccsp {

// Ordered k-tuple hypergraph. Arcs are tuples of distinct vertex ids; the
// same tuple may appear any number of times.
struct TupleHypergraph {
    int n = 0;
    int arity = 0;
    std::vector<std::vector<int>> arcs;

    void validate() const;
    // Max over vertices of the total number of arc slots naming it.
    int degree() const;
    static TupleHypergraph single_arc(int k);

    bool operator==(const TupleHypergraph&) const = default;
};

int degree(const TupleHypergraph& h);

// Disjoint-union gadget into host, identifying gadget vertex i with host
// vertex identify[i] when identify[i] >= 0 and allocating a fresh id
// otherwise. `where` reports the final id of every gadget vertex. An
// identification that makes two slots of one arc coincide is an error.
struct SpliceResult {
    TupleHypergraph h;
    std::vector<int> where;
};
SpliceResult splice(const TupleHypergraph& host, const TupleHypergraph& gadget,
                    const std::vector<int>& identify);

struct EnumOptions {
    int max_vertices = 24;
    int threads = 1;
};

// Certificate that the base function supports a conditioning ingredient:
// a gadget plus vertices exhibiting the defining inequality. A pin-s
// certificate needs mu(sigma_v = s) > mu(sigma_v = 1-s); an equality
// certificate needs mu(both 0) = mu(both 1) and mu(equal) > mu(unequal).
enum class SupportKind { pin0, pin1, equality };
const char* support_kind_name(SupportKind k);

struct SupportCertificate {
    SupportKind kind = SupportKind::pin0;
    TupleHypergraph gadget;
    std::vector<int> verts;

    bool operator==(const SupportCertificate&) const = default;
};
bool check_support(const BooleanFunction& f, const SupportCertificate& cert,
                   const EnumOptions& opts = {});

// Conditioning triple: vertices pinned to 0, vertices pinned to 1, and
// equality blocks. Blocks are pairwise disjoint and disjoint from the pins;
// singleton blocks are legal no-ops. `certs` carries the justification that
// the base function supports each ingredient used.
struct Conditioning {
    std::vector<int> pin0, pin1;
    std::vector<std::vector<int>> eq;
    std::vector<SupportCertificate> certs;

    bool empty() const { return pin0.empty() && pin1.empty() && eq.empty(); }
    void validate(int n) const;
    // Sort everything, fold equality blocks that touch a pin set into that
    // pin set, and drop blocks that end up smaller than two vertices.
    // A block reaching both pin sets makes the event impossible.
    void normalize();

    bool operator==(const Conditioning& o) const {
        return pin0 == o.pin0 && pin1 == o.pin1 && eq == o.eq && certs == o.certs;
    }
};

// A gadget with distinguished vertices and an optional conditioning: the
// carrier of "this function restricted to these vertices behaves like g".
struct SimGadget {
    TupleHypergraph h;
    Conditioning cond;
    std::vector<int> verts;

    bool operator==(const SimGadget&) const = default;
};

// Joint distribution of a vertex tuple; spin-tuple indexing puts verts[0] in
// the most significant bit, matching the table-index convention.
struct MarginalTable {
    std::vector<int> verts;
    std::vector<Rat> probs;

    const Rat& at(uint32_t idx) const { return probs[idx]; }
    bool operator==(const MarginalTable&) const = default;
};

Rat partition_function(const BooleanFunction& f, const TupleHypergraph& h,
                       const EnumOptions& opts = {});

MarginalTable marginals(const BooleanFunction& f, const TupleHypergraph& h,
                        const std::vector<int>& verts, const EnumOptions& opts = {});

// Conditional version; restricting to the conditioned event must leave
// positive mass or the conditioning is inadmissible (condition (iv)).
MarginalTable cond_marginals(const BooleanFunction& f, const TupleHypergraph& h,
                             const Conditioning& cond, const std::vector<int>& verts,
                             const EnumOptions& opts = {});

// Realisation checks. A pinning query asks for some vertex v with
// mu(sigma_v = s) >= 1 - eps; an equality query for a pair x,y with
// mu(x = y = s) >= (1 - eps)/2 for both s. All vertices (or pairs) are
// scanned; the report carries the best candidate and its exact slack.
struct RealisationQuery {
    enum class Kind { pinning, equality };
    Kind kind = Kind::pinning;
    int spin = 0;
    Rat eps = Rat(0);

    static RealisationQuery pinning(int s, Rat eps = Rat(0));
    static RealisationQuery equality(Rat eps = Rat(0));
};

struct RealisationReport {
    bool ok = false;
    std::vector<int> verts;
    Rat achieved;  // the bound-side probability at the best candidate
    Rat slack;     // achieved minus the required bound
};

RealisationReport verify_realisation(const BooleanFunction& f, const TupleHypergraph& h,
                                     const RealisationQuery& query,
                                     const EnumOptions& opts = {});

// Exact test that the conditioned pair distribution at (u, v) equals g
// normalized.
bool verify_simulation(const BooleanFunction& f, const TupleHypergraph& h,
                       const Conditioning& cond, int u, int v,
                       const BinaryWeightedFunction& g, const EnumOptions& opts = {});

}  // namespace ccsp

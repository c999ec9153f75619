#include "ccsp/csp.hpp"

#include <algorithm>
#include <thread>
#include <utility>

namespace ccsp {

namespace {

std::string fn_label(const CspInstance& inst, int fn) {
    if (fn >= 0 && size_t(fn) < inst.names.size() && !inst.names[fn].empty())
        return inst.names[fn];
    return "#" + std::to_string(fn);
}

uint32_t constraint_index(const Constraint& c, uint32_t assign) {
    uint32_t t = 0;
    for (int v : c.vars) t = (t << 1) | (assign >> v & 1u);
    return t;
}

void sum_extensions(const CspInstance& inst, const std::vector<int>& distinguished,
                    uint32_t lo, uint32_t hi, std::vector<Rat>& out) {
    bool boolean = true;
    for (const auto& f : inst.language) boolean = boolean && f.is_boolean();
    for (uint32_t assign = lo; assign < hi; ++assign) {
        Rat w(1);
        bool dead = false;
        for (const auto& c : inst.constraints) {
            const Rat& v = inst.language[c.fn].value(constraint_index(c, assign));
            if (sgn(v) == 0) { dead = true; break; }
            if (!boolean) w *= v;
        }
        if (dead) continue;
        uint32_t b = 0;
        for (int v : distinguished) b = (b << 1) | (assign >> v & 1u);
        out[b] += w;
    }
}

// XOR-fold a local row through the constraint's variable tuple; repeated
// variables cancel in pairs, which is exactly the GF(2) collapse.
uint64_t global_row(uint32_t local, const std::vector<int>& vars) {
    uint64_t row = 0;
    for (size_t j = 0; j < vars.size(); ++j)
        if (local >> j & 1u) row ^= uint64_t(1) << vars[j];
    return row;
}

}  // namespace

void CspInstance::validate() const {
    if (n < 0) throw input_error("negative variable count");
    if (!names.empty() && names.size() != language.size())
        throw input_error("name list does not match language size");
    for (size_t i = 0; i < constraints.size(); ++i) {
        const auto& c = constraints[i];
        if (c.fn < 0 || size_t(c.fn) >= language.size())
            throw input_error("constraint " + std::to_string(i) +
                              " names function " + std::to_string(c.fn) +
                              ", language has " + std::to_string(language.size()));
        size_t arity = size_t(language[c.fn].arity());
        if (c.vars.size() != arity)
            throw input_error("constraint " + std::to_string(i) + " has " +
                              std::to_string(c.vars.size()) + " variables, function " +
                              fn_label(*this, c.fn) + " has arity " + std::to_string(arity));
        for (int v : c.vars)
            if (v < 0 || v >= n)
                throw input_error("constraint " + std::to_string(i) + " uses variable " +
                                  std::to_string(v) + ", instance has " + std::to_string(n));
        if (repeat_free) {
            auto vs = c.vars;
            std::sort(vs.begin(), vs.end());
            if (std::adjacent_find(vs.begin(), vs.end()) != vs.end())
                throw input_error("constraint " + std::to_string(i) +
                                  " repeats a variable in a repeat-free instance");
        }
    }
}

int CspInstance::degree_of(int v) const {
    int d = 0;
    for (const auto& c : constraints)
        for (int u : c.vars)
            if (u == v) ++d;
    return d;
}

int CspInstance::degree() const {
    int best = 0;
    for (int v = 0; v < n; ++v) best = std::max(best, degree_of(v));
    return best;
}

bool is_repeat_free(const CspInstance& inst) {
    for (const auto& c : inst.constraints) {
        auto vs = c.vars;
        std::sort(vs.begin(), vs.end());
        if (std::adjacent_find(vs.begin(), vs.end()) != vs.end()) return false;
    }
    return true;
}

std::vector<Rat> extension_counts(const CspInstance& inst,
                                  const std::vector<int>& distinguished,
                                  const EnumOptions& opts) {
    inst.validate();
    if (inst.n > opts.max_vertices)
        throw resource_error("instance has " + std::to_string(inst.n) +
                             " variables, enumeration cap is " +
                             std::to_string(opts.max_vertices));
    for (int v : distinguished)
        if (v < 0 || v >= inst.n)
            throw input_error("distinguished variable " + std::to_string(v) + " out of range");

    const uint64_t total = uint64_t(1) << inst.n;
    std::vector<Rat> out(size_t(1) << distinguished.size(), Rat(0));
    const int threads = std::max(1, opts.threads);
    if (threads == 1 || total < (uint64_t(1) << 16)) {
        sum_extensions(inst, distinguished, 0, uint32_t(total), out);
        return out;
    }
    std::vector<std::vector<Rat>> parts(threads, std::vector<Rat>(out.size(), Rat(0)));
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) {
        uint64_t lo = total / threads * i + std::min<uint64_t>(i, total % threads);
        uint64_t hi = lo + total / threads + (uint64_t(i) < total % threads ? 1 : 0);
        pool.emplace_back([&, i, lo, hi] {
            sum_extensions(inst, distinguished, uint32_t(lo), uint32_t(hi), parts[i]);
        });
    }
    for (auto& t : pool) t.join();
    for (auto& p : parts)
        for (size_t i = 0; i < out.size(); ++i) out[i] += p[i];
    return out;
}

Rat brute_count(const CspInstance& inst, const EnumOptions& opts) {
    auto counts = extension_counts(inst, {}, opts);
    return counts[0];
}

Rat gauss_count(const CspInstance& inst) {
    inst.validate();
    if (inst.n > 64)
        throw resource_error("elimination is limited to 64 variables, instance has " +
                             std::to_string(inst.n));

    // Echelon form over GF(2): rows[i] has pivot column pivots[i], every row
    // reduced against all earlier pivots before insertion.
    std::vector<uint64_t> rows;
    std::vector<int> rhs;
    for (size_t i = 0; i < inst.constraints.size(); ++i) {
        const auto& c = inst.constraints[i];
        const auto& f = inst.language[c.fn];
        if (!f.is_boolean() || !is_affine(f))
            throw input_error("constraint " + std::to_string(i) + ": function " +
                              fn_label(inst, c.fn) + " is not affine");
        if (f.support().empty()) return Rat(0);
        AffineSystem local = affine_system(f);
        for (size_t r = 0; r < local.rows.size(); ++r) {
            uint64_t row = global_row(local.rows[r], c.vars);
            int b = local.rhs[r];
            for (size_t q = 0; q < rows.size(); ++q) {
                uint64_t low = rows[q] & (~rows[q] + 1);
                if (row & low) { row ^= rows[q]; b ^= rhs[q]; }
            }
            if (row == 0) {
                if (b != 0) return Rat(0);
                continue;
            }
            rows.push_back(row);
            rhs.push_back(b);
        }
    }
    Rat count(1);
    for (int i = 0; i < inst.n - int(rows.size()); ++i) count *= 2;
    return count;
}

const char* verdict_name(LanguageClassification::Verdict v) {
    switch (v) {
        case LanguageClassification::Verdict::fp_affine: return "fp";
        case LanguageClassification::Verdict::bis_equivalent: return "bis-equivalent";
        case LanguageClassification::Verdict::np_hard: return "np-hard";
    }
    throw internal_error("unknown verdict");
}

LanguageClassification classify_language(const std::vector<BooleanFunction>& language) {
    LanguageClassification out;
    out.affine.reserve(language.size());
    out.in_im2.reserve(language.size());
    for (size_t i = 0; i < language.size(); ++i) {
        if (!language[i].is_boolean())
            throw input_error("function " + std::to_string(i) + " is not Boolean");
        bool a = is_affine(language[i]);
        bool m = is_in_im2(language[i]);
        out.affine.push_back(a);
        out.in_im2.push_back(m);
        if (!a && out.culprit_affine < 0) out.culprit_affine = int(i);
        if (!m && out.culprit_im2 < 0) out.culprit_im2 = int(i);
    }
    if (out.culprit_affine < 0) {
        out.verdict = LanguageClassification::Verdict::fp_affine;
        return out;
    }
    if (out.culprit_im2 < 0) {
        out.verdict = LanguageClassification::Verdict::bis_equivalent;
        out.note = "function " + std::to_string(out.culprit_affine) +
                   " is not affine; every function lies in IM_2";
        return out;
    }
    out.verdict = LanguageClassification::Verdict::np_hard;
    if (out.culprit_affine == out.culprit_im2) {
        out.product_evidence = language[out.culprit_affine];
        out.note = "function " + std::to_string(out.culprit_affine) +
                   " is neither affine nor in IM_2";
    } else {
        // Pair the two offenders: the concatenated product inherits both
        // failures, giving a single function outside both classes.
        out.product_evidence = product_concat(language[out.culprit_affine],
                                              language[out.culprit_im2]);
        out.note = "product of functions " + std::to_string(out.culprit_affine) +
                   " and " + std::to_string(out.culprit_im2) +
                   " is neither affine nor in IM_2";
    }
    if (is_affine(*out.product_evidence) || is_in_im2(*out.product_evidence))
        throw internal_error("hardness evidence failed its own closure test");
    return out;
}

CspInstance instance_from_hypergraph(const BooleanFunction& f, const TupleHypergraph& h) {
    h.validate();
    if (!h.arcs.empty() && h.arity != f.arity())
        throw input_error("hyperarc arity does not match function arity");
    CspInstance inst;
    inst.n = h.n;
    inst.language = {f};
    inst.repeat_free = true;
    inst.constraints.reserve(h.arcs.size());
    for (const auto& arc : h.arcs) inst.constraints.push_back({0, arc});
    inst.validate();
    return inst;
}

TupleHypergraph hypergraph_from_instance(const CspInstance& inst) {
    inst.validate();
    if (inst.language.size() != 1)
        throw input_error("hypergraph form needs a single-function language, got " +
                          std::to_string(inst.language.size()));
    if (!is_repeat_free(inst))
        throw input_error("hypergraph form needs repeat-free constraints");
    TupleHypergraph h;
    h.n = inst.n;
    h.arity = inst.language[0].arity();
    h.arcs.reserve(inst.constraints.size());
    for (const auto& c : inst.constraints) h.arcs.push_back(c.vars);
    h.validate();
    return h;
}

void BipartiteGraph::validate() const {
    if (nl < 0 || nr < 0) throw input_error("negative part size");
    for (const auto& [l, r] : edges) {
        if (l < 0 || l >= nl) throw input_error("edge names left vertex " + std::to_string(l));
        if (r < 0 || r >= nr) throw input_error("edge names right vertex " + std::to_string(r));
    }
}

int BipartiteGraph::degree() const {
    std::vector<int> dl(nl, 0), dr(nr, 0);
    for (const auto& [l, r] : edges) { ++dl[l]; ++dr[r]; }
    int best = 0;
    for (int d : dl) best = std::max(best, d);
    for (int d : dr) best = std::max(best, d);
    return best;
}

Int count_independent_sets(const BipartiteGraph& g) {
    g.validate();
    // Enumerate subsets of the smaller part; the other part contributes a
    // free vertex for everything outside the neighbourhood.
    bool swap_parts = g.nl > g.nr;
    int ns = swap_parts ? g.nr : g.nl;
    int no = swap_parts ? g.nl : g.nr;
    if (ns > 30)
        throw resource_error("independent-set count needs one part of at most 30 vertices");
    std::vector<uint64_t> nbr(ns, 0);
    for (const auto& [l, r] : g.edges) {
        int s = swap_parts ? r : l;
        int o = swap_parts ? l : r;
        nbr[s] |= uint64_t(1) << o;
    }
    Int total = 0;
    Int one = 1;
    for (uint64_t sel = 0; sel < (uint64_t(1) << ns); ++sel) {
        uint64_t blocked = 0;
        for (int v = 0; v < ns; ++v)
            if (sel >> v & 1ull) blocked |= nbr[v];
        int free_other = no - int(__builtin_popcountll(blocked));
        total += one << free_other;
    }
    return total;
}

BisReduction bis_reduction(const BipartiteGraph& g, const BooleanFunction& f,
                           const SimGadget& implies_sim, const EnumOptions& opts) {
    g.validate();
    if (!implies_sim.cond.empty())
        throw input_error("edge gadget must be unconditioned");
    if (implies_sim.verts.size() != 2)
        throw input_error("edge gadget needs exactly two distinguished vertices");
    BinaryWeightedFunction implies(Rat(1), Rat(1), Rat(0), Rat(1));
    if (!verify_simulation(f, implies_sim.h, {}, implies_sim.verts[0],
                           implies_sim.verts[1], implies, opts))
        throw input_error("edge gadget does not simulate Implies");

    BisReduction out;
    TupleHypergraph host;
    host.n = g.nl + g.nr;
    host.arity = f.arity();
    out.left.resize(g.nl);
    out.right.resize(g.nr);
    for (int i = 0; i < g.nl; ++i) out.left[i] = i;
    for (int j = 0; j < g.nr; ++j) out.right[j] = g.nl + j;

    // A left vertex in the independent set carries spin 1, a right vertex
    // spin 0, so an edge is honoured exactly when Implies(left, right) holds.
    std::vector<int> identify(implies_sim.h.n, -1);
    for (const auto& [l, r] : g.edges) {
        identify.assign(implies_sim.h.n, -1);
        identify[implies_sim.verts[0]] = l;
        identify[implies_sim.verts[1]] = g.nl + r;
        host = splice(host, implies_sim.h, identify).h;
    }
    out.h = host;
    out.degree = host.n == 0 ? 0 : host.degree();
    out.z_gadget = partition_function(f, implies_sim.h, opts);

    if (std::min(g.nl, g.nr) <= 30) {
        out.independent_sets = count_independent_sets(g);
    } else {
        out.note = "independent sets not counted: both parts exceed 30 vertices";
        return out;
    }
    if (host.n > opts.max_vertices) {
        out.note = "assembled hypergraph has " + std::to_string(host.n) +
                   " vertices, above the enumeration cap; identity unchecked";
        return out;
    }
    out.z_total = partition_function(f, host, opts);
    Rat expect(out.independent_sets);
    Rat per_edge = Rat(out.z_gadget / 3);
    for (size_t e = 0; e < g.edges.size(); ++e) expect *= per_edge;
    if (out.z_total != expect)
        throw internal_error("count identity failed despite a verified edge gadget");
    out.verified = true;
    return out;
}

}  // namespace ccsp

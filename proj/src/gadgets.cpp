#include "ccsp/gadgets.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>

namespace ccsp {

namespace {

std::vector<std::vector<int>> all_permutations(int k) {
    std::vector<int> p(k);
    std::iota(p.begin(), p.end(), 0);
    std::vector<std::vector<int>> out;
    do out.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));
    return out;
}

// Table index of w composed with pi: argument j of the result is argument
// pi[j] of w.
uint32_t permute_point(uint32_t w, const std::vector<int>& pi, int k) {
    uint32_t t = 0;
    for (int j = 0; j < k; ++j) t = (t << 1) | (w >> (k - 1 - pi[j]) & 1u);
    return t;
}

int popcount(uint32_t m) { return __builtin_popcount(m); }
int lowest_bit(uint32_t m) { return __builtin_ctz(m); }

std::vector<int> mask_bits(uint32_t m) {
    std::vector<int> out;
    for (int i = 0; m >> i; ++i)
        if (m >> i & 1u) out.push_back(i);
    return out;
}

Rat rat_pow(const Rat& base, size_t e) {
    Rat r(1);
    for (size_t i = 0; i < e; ++i) r *= base;
    return r;
}

void require_boolean(const BooleanFunction& f, const std::string& what) {
    if (!f.is_boolean()) throw input_error(what + " needs a Boolean table");
}

TupleHypergraph all_orders_gadget(int k) {
    TupleHypergraph h;
    h.n = k;
    h.arity = k;
    h.arcs = all_permutations(k);
    return h;
}

void confirm_equality(const BooleanFunction& f, const PerfectEqualityWitness& w,
                      const EnumOptions& opts) {
    auto mm = marginals(f, w.h, {w.u, w.v}, opts);
    if (mm.at(0) != make_rat(1, 2) || mm.at(3) != make_rat(1, 2))
        throw internal_error("perfect equality failed its marginal verification");
}

void confirm_hard(const BooleanFunction& f, const HardSimulationWitness& w,
                  const EnumOptions& opts) {
    if (!is_hard(w.g)) throw internal_error("simulated pair weights are not hard");
    for (const auto& cert : w.cond.certs)
        if (!check_support(f, cert, opts))
            throw internal_error("support certificate failed re-verification");
    if (!verify_simulation(f, w.h, w.cond, w.u, w.v, w.g, opts))
        throw internal_error("hard simulation failed its marginal verification");
}

void verify_equality_input(const BooleanFunction& f, const PerfectEqualityWitness& eq,
                           const EnumOptions& opts) {
    auto mm = marginals(f, eq.h, {eq.u, eq.v}, opts);
    if (mm.at(0) != make_rat(1, 2) || mm.at(3) != make_rat(1, 2))
        throw input_error("supplied equality gadget does not verify");
}

BooleanFunction flip(const BooleanFunction& f) {
    uint32_t size = f.size();
    std::vector<Rat> tbl(size);
    for (uint32_t t = 0; t < size; ++t) tbl[t] = f.value((size - 1) ^ t);
    return BooleanFunction(f.arity(), std::move(tbl));
}

}  // namespace

ClassificationWitness ClassificationWitness::affine() {
    ClassificationWitness w;
    w.kind = Kind::affine;
    return w;
}

ClassificationWitness ClassificationWitness::of(PerfectEqualityWitness w) {
    ClassificationWitness out;
    out.kind = Kind::perfect_equality;
    out.equality = std::move(w);
    return out;
}

ClassificationWitness ClassificationWitness::of(HardSimulationWitness w) {
    ClassificationWitness out;
    out.kind = Kind::hard_simulation;
    out.hard = std::move(w);
    return out;
}

const char* witness_kind_name(ClassificationWitness::Kind k) {
    switch (k) {
        case ClassificationWitness::Kind::affine: return "affine";
        case ClassificationWitness::Kind::perfect_equality: return "perfect-equality";
        case ClassificationWitness::Kind::hard_simulation: return "hard-simulation";
        case ClassificationWitness::Kind::inconclusive: return "inconclusive";
    }
    throw internal_error("unknown witness kind");
}

PinGadget pin_gadget_star(const BooleanFunction& f, int spin, const EnumOptions& opts) {
    require_boolean(f, "pin gadget synthesis");
    if (spin != 0 && spin != 1) throw input_error("spin must be 0 or 1");
    int k = f.arity();
    if (k > 8)
        throw resource_error("the all-orders gadget has k! hyperarcs; arity " +
                             std::to_string(k) + " is past the practical bound 8");
    BooleanFunction fs = symmetrise(f, k);
    BooleanFunction want = spin == 1 ? fn_allone(k) : fn_allzero(k);
    if (fs != want)
        throw input_error("symmetrisation is not the single-point function for spin " +
                          std::to_string(spin));
    PinGadget out{all_orders_gadget(k), 0, spin};
    auto mm = marginals(f, out.h, {out.vertex}, opts);
    if (mm.at(uint32_t(spin)) != Rat(1))
        throw internal_error("all-orders gadget failed to force the spin");
    return out;
}

ZeroStarWitness zero_star_witness(const BooleanFunction& f, const EnumOptions& opts) {
    require_boolean(f, "permutation-ladder synthesis");
    int k = f.arity();
    if (f.support().empty()) throw input_error("the empty function has no ladder");
    if (k > 6)
        throw resource_error("permutation sets are enumerated up to arity 6, got " +
                             std::to_string(k));
    if (symmetrise(f, k) != fn_zero(k))
        throw input_error("symmetrisation must be the empty function");

    auto perms = all_permutations(k);
    const uint32_t size = f.size();

    // cover[p]: inputs w annihilated by permutation p, as a bitset over the
    // 2^k table indices.
    std::vector<uint64_t> cover(perms.size(), 0);
    for (size_t p = 0; p < perms.size(); ++p)
        for (uint32_t w = 0; w < size; ++w)
            if (!f.sat(permute_point(w, perms[p], k))) cover[p] |= uint64_t(1) << w;

    std::vector<int> members(perms.size());
    std::iota(members.begin(), members.end(), 0);
    std::vector<int> hits(size, 0);
    for (int p : members)
        for (uint32_t w = 0; w < size; ++w)
            if (cover[p] >> w & 1ull) ++hits[w];
    for (uint32_t w = 0; w < size; ++w)
        if (hits[w] == 0) throw internal_error("empty symmetrisation left an input uncovered");

    // Shrink to a minimal annihilating set, always removing the first
    // removable permutation. A permutation is removable exactly when it
    // covers no input that only it covers.
    bool shrunk = true;
    while (shrunk) {
        shrunk = false;
        uint64_t critical = 0;
        for (uint32_t w = 0; w < size; ++w)
            if (hits[w] == 1) critical |= uint64_t(1) << w;
        for (size_t i = 0; i < members.size(); ++i) {
            int p = members[i];
            if (cover[p] & critical) continue;
            members.erase(members.begin() + long(i));
            for (uint32_t w = 0; w < size; ++w)
                if (cover[p] >> w & 1ull) --hits[w];
            shrunk = true;
            break;
        }
    }
    if (members.size() < 2)
        throw internal_error("minimal annihilating set collapsed to one permutation");

    // Rename so the identity belongs to the set: replace each pi by
    // tau^-1 o pi where tau is the first member.
    std::vector<int> tau = perms[size_t(members[0])];
    std::vector<int> tau_inv(k);
    for (int j = 0; j < k; ++j) tau_inv[tau[j]] = j;
    std::vector<std::vector<int>> named;
    for (int p : members) {
        std::vector<int> q(k);
        for (int j = 0; j < k; ++j) q[j] = tau_inv[perms[size_t(p)][j]];
        named.push_back(std::move(q));
    }
    std::sort(named.begin(), named.end());
    std::vector<int> ident(k);
    std::iota(ident.begin(), ident.end(), 0);
    if (named.front() != ident)
        throw internal_error("renamed annihilating set lost the identity");
    for (uint32_t w = 0; w < size; ++w) {
        bool killed = false;
        for (const auto& q : named)
            if (!f.sat(permute_point(w, q, k))) { killed = true; break; }
        if (!killed) throw internal_error("renamed set no longer annihilates every input");
    }

    // Base gadget: one vertex per argument, one arc per non-identity member.
    TupleHypergraph base;
    base.n = k;
    base.arity = k;
    for (const auto& q : named)
        if (q != ident) base.arcs.push_back(q);
    if (sgn(partition_function(f, base, opts)) == 0)
        throw internal_error("base gadget of the ladder has no satisfying assignments");

    // Rung j: fresh tail vertices k..2k-j-1 and one arc reading the first j
    // base vertices followed by the tail. Rung 0 is positive, rung k is not;
    // take the first collapse.
    auto rung = [&](int j) {
        TupleHypergraph h = base;
        h.n = k + (k - j);
        std::vector<int> arc(size_t(k), 0);
        for (int s = 0; s < j; ++s) arc[size_t(s)] = s;
        for (int s = j; s < k; ++s) arc[size_t(s)] = k + (s - j);
        h.arcs.push_back(std::move(arc));
        return h;
    };
    std::vector<Rat> z(size_t(k) + 1);
    for (int j = 0; j <= k; ++j) z[size_t(j)] = partition_function(f, rung(j), opts);
    if (sgn(z[0]) == 0) throw internal_error("first rung lost all assignments");
    if (sgn(z[size_t(k)]) != 0) throw internal_error("last rung kept an assignment");
    int j = 0;
    while (!(sgn(z[size_t(j)]) > 0 && sgn(z[size_t(j) + 1]) == 0)) ++j;

    TupleHypergraph hj = rung(j);
    int u = j;  // base vertex j+1 counts from one
    int v = k;  // first tail vertex of this rung
    auto mm = marginals(f, hj, {u, v}, opts);
    if (sgn(mm.at(0)) != 0 || sgn(mm.at(3)) != 0)
        throw internal_error("collapsing rung left mass on the diagonal");

    ZeroStarWitness out;
    if (sgn(mm.at(2)) == 0) {
        out.pin0 = PinGadget{hj, u, 0};
        out.pin1 = PinGadget{hj, v, 1};
    } else if (sgn(mm.at(1)) == 0) {
        out.pin0 = PinGadget{hj, v, 0};
        out.pin1 = PinGadget{hj, u, 1};
    } else {
        // Mass on both off-diagonal cells: chain two copies through a shared
        // middle vertex; the diagonal of the glued pair carries everything.
        std::vector<int> identify(size_t(hj.n), -1);
        identify[size_t(u)] = v;
        auto sp = splice(hj, hj, identify);
        PerfectEqualityWitness eqw{sp.h, u, sp.where[size_t(v)]};
        confirm_equality(f, eqw, opts);
        out.equality = eqw;
        return out;
    }
    for (const PinGadget& pg : {*out.pin0, *out.pin1}) {
        auto check = marginals(f, pg.h, {pg.vertex}, opts);
        if (check.at(uint32_t(pg.spin)) != Rat(1))
            throw internal_error("ladder pin failed to force its spin");
    }
    return out;
}

PerfectEqualityWitness equality_gadget_star(const BooleanFunction& f,
                                            const EnumOptions& opts) {
    require_boolean(f, "equality gadget synthesis");
    int k = f.arity();
    if (k > 8)
        throw resource_error("the all-orders gadget has k! hyperarcs; arity " +
                             std::to_string(k) + " is past the practical bound 8");
    auto tag = easy_k_member(symmetrise(f, k));
    PerfectEqualityWitness out;
    if (tag == EasyTag::eq) {
        out = {all_orders_gadget(k), 0, 1};
    } else if (tag == EasyTag::even || tag == EasyTag::odd) {
        // Two windows of length k over k+1 vertices, each in all orders: the
        // ends agree because parity is preserved along the chain.
        TupleHypergraph h;
        h.n = k + 1;
        h.arity = k;
        for (const auto& p : all_permutations(k)) {
            std::vector<int> lo(size_t(k), 0), hi(size_t(k), 0);
            for (int j = 0; j < k; ++j) {
                lo[size_t(j)] = p[size_t(j)];
                hi[size_t(j)] = p[size_t(j)] + 1;
            }
            h.arcs.push_back(std::move(lo));
            h.arcs.push_back(std::move(hi));
        }
        out = {std::move(h), 0, k};
    } else {
        throw input_error("symmetrisation is neither equality nor a parity function");
    }
    confirm_equality(f, out, opts);
    return out;
}

TupleHypergraph lift_gadget(const BooleanFunction& f, uint32_t s0_mask, uint32_t s1_mask,
                            const std::optional<PinGadget>& pin0,
                            const std::optional<PinGadget>& pin1,
                            const TupleHypergraph& h_gadget) {
    int k = f.arity();
    uint32_t full = (uint32_t(1) << k) - 1;
    if ((s0_mask | s1_mask) & ~full) throw input_error("pin mask names arguments past the arity");
    if (s0_mask & s1_mask) throw input_error("pin masks overlap");
    int pinned = popcount(s0_mask | s1_mask);
    if (pinned == k) throw input_error("lifting needs at least one free argument");
    h_gadget.validate();
    if (h_gadget.arity != k - pinned)
        throw input_error("gadget arity " + std::to_string(h_gadget.arity) +
                          " does not match the " + std::to_string(k - pinned) +
                          " free arguments");
    if (s0_mask && (!pin0 || pin0->spin != 0))
        throw input_error("lifting arguments to 0 needs a pin-0 gadget");
    if (s1_mask && (!pin1 || pin1->spin != 1))
        throw input_error("lifting arguments to 1 needs a pin-1 gadget");
    if (s0_mask && pin0->h.arity != k) throw input_error("pin-0 gadget has the wrong arity");
    if (s1_mask && pin1->h.arity != k) throw input_error("pin-1 gadget has the wrong arity");

    // One shared fresh vertex per pinned argument, appended to every arc at
    // the argument's own slot; free arguments keep their relative order.
    std::vector<int> fresh(size_t(k), -1);
    int next = h_gadget.n;
    for (int i = 0; i < k; ++i)
        if ((s0_mask | s1_mask) >> i & 1u) fresh[size_t(i)] = next++;
    std::vector<int> free_args;
    for (int i = 0; i < k; ++i)
        if (!((s0_mask | s1_mask) >> i & 1u)) free_args.push_back(i);

    TupleHypergraph h;
    h.n = next;
    h.arity = k;
    for (const auto& arc : h_gadget.arcs) {
        std::vector<int> wide(size_t(k), 0);
        for (size_t j = 0; j < free_args.size(); ++j) wide[size_t(free_args[j])] = arc[j];
        for (int i = 0; i < k; ++i)
            if (fresh[size_t(i)] >= 0) wide[size_t(i)] = fresh[size_t(i)];
        h.arcs.push_back(std::move(wide));
    }
    for (int i = 0; i < k; ++i) {
        if (fresh[size_t(i)] < 0) continue;
        const PinGadget& pg = (s0_mask >> i & 1u) ? *pin0 : *pin1;
        std::vector<int> identify(size_t(pg.h.n), -1);
        identify[size_t(pg.vertex)] = fresh[size_t(i)];
        h = splice(h, pg.h, identify).h;
    }
    return h;
}

BinaryWeightedFunction single_hyperarc_pair_witness(const BooleanFunction& f, int i, int j) {
    int k = f.arity();
    if (i < 1 || j <= i || j > k)
        throw input_error("positions must satisfy 1 <= i < j <= arity");
    BinaryWeightedFunction g;
    for (uint32_t t = 0; t < f.size(); ++t) {
        int s = t >> (k - i) & 1;
        int u = t >> (k - j) & 1;
        (s == 0 ? (u == 0 ? g.g00 : g.g01) : (u == 0 ? g.g10 : g.g11)) += f.value(t);
    }
    return g;
}

SimGadget sd_xor_gadget(const BooleanFunction& f, const PerfectEqualityWitness& eq,
                        const EnumOptions& opts) {
    require_boolean(f, "exclusive-or synthesis");
    if (!is_self_dual(f)) throw input_error("the function must be invariant under complement");
    if (f.support().empty()) throw input_error("the empty function has no support point");
    if (f.sat(0)) throw input_error("the all-zeros point must be unsatisfying");
    verify_equality_input(f, eq, opts);

    int k = f.arity();
    uint32_t x = f.support()[0];
    if (x == 0 || x == f.size() - 1)
        throw internal_error("smallest support point cannot be constant here");
    std::vector<int> u0, u1;
    for (int i = 0; i < k; ++i)
        (x >> (k - 1 - i) & 1u ? u1 : u0).push_back(i);

    TupleHypergraph h = TupleHypergraph::single_arc(k);
    for (const auto& group : {u0, u1}) {
        for (size_t a = 0; a < group.size(); ++a) {
            for (size_t b = a + 1; b < group.size(); ++b) {
                std::vector<int> identify(size_t(eq.h.n), -1);
                identify[size_t(eq.u)] = group[a];
                identify[size_t(eq.v)] = group[b];
                h = splice(h, eq.h, identify).h;
            }
        }
    }
    SimGadget out{std::move(h), {}, {u0.front(), u1.front()}};
    auto mm = marginals(f, out.h, out.verts, opts);
    if (sgn(mm.at(0)) != 0 || sgn(mm.at(3)) != 0 || mm.at(1) != make_rat(1, 2) ||
        mm.at(2) != make_rat(1, 2))
        throw internal_error("exclusive-or gadget failed its marginal verification");
    return out;
}

SdCasePlan sd_case_plan(const BooleanFunction& f, uint32_t b, uint32_t c) {
    require_boolean(f, "collapse planning");
    int k = f.arity();
    if (b >= f.size() || c >= f.size()) throw input_error("support point out of range");
    if (!f.sat(0)) throw input_error("collapse planning needs the all-zeros point satisfied");
    if (!f.sat(b) || !f.sat(c) || f.sat(b ^ c))
        throw input_error("need two satisfying points whose difference is unsatisfying");

    // Classify each position by its (b, c) bits: 0 = both zero, 1 = only c,
    // 2 = only b, 3 = both one.
    std::vector<int> raw(size_t(k), 0);
    bool present[4] = {false, false, false, false};
    for (int i = 0; i < k; ++i) {
        int bi = b >> (k - 1 - i) & 1;
        int ci = c >> (k - 1 - i) & 1;
        raw[size_t(i)] = bi * 2 + ci;
        present[bi * 2 + ci] = true;
    }

    auto eval = [&](int w, int x, int y, int z) {
        int vals[4] = {w, x, y, z};
        uint32_t t = 0;
        for (int i = 0; i < k; ++i) t = (t << 1) | uint32_t(vals[raw[size_t(i)]]);
        return f.sat(t);
    };

    SdCasePlan plan;
    int cm[4] = {0, 1, 2, 3};  // collapse map on raw variable ids
    int du, dv;
    Rat one(1), two(2), three(3);
    plan.g = BinaryWeightedFunction(one, two, two, one);
    if (!present[0]) {
        if (!(present[1] && present[2] && present[3]))
            throw internal_error("impossible position-class pattern");
        plan.label = "case1";
        du = 1; dv = 2;
    } else if (!present[3]) {
        if (!(present[1] && present[2]))
            throw internal_error("impossible position-class pattern");
        plan.label = "case2";
        du = 1; dv = 2;
    } else if (!present[2]) {
        plan.label = "case3";
        du = 0; dv = 3;
    } else if (!present[1]) {
        plan.label = "case4";
        du = 0; dv = 3;
    } else {
        bool s001 = eval(0, 0, 0, 1);
        bool s010 = eval(0, 0, 1, 0);
        bool s100 = eval(0, 1, 0, 0);
        bool s111 = eval(0, 1, 1, 1);
        if (s010 && !s111) {
            plan.label = "case5a"; cm[3] = 1; du = 1; dv = 2;
        } else if (s111 && !s010) {
            plan.label = "case5b"; cm[3] = 1; du = 0; dv = 1;
        } else if (s100 && !s111) {
            plan.label = "case5c"; cm[3] = 2; du = 1; dv = 2;
        } else if (s111 && !s100) {
            plan.label = "case5d"; cm[3] = 2; du = 0; dv = 2;
        } else if (s010 && s100) {
            plan.label = "case5e"; cm[3] = 0; du = 1; dv = 2;
        } else if (!s001 && !s010 && !s100 && !s111) {
            plan.label = "case5f"; du = 1; dv = 2;
        } else if (s001 && !s010 && !s100 && !s111) {
            plan.label = "case5g"; du = 0; dv = 3;
            plan.g = BinaryWeightedFunction(one, three, three, one);
        } else {
            throw internal_error("collapse case analysis fell through");
        }
    }

    // Compact the surviving raw ids into dense variable ids.
    std::vector<int> dense(4, -1);
    for (int i = 0; i < k; ++i) {
        int target = cm[raw[size_t(i)]];
        if (dense[size_t(target)] < 0) dense[size_t(target)] = 0;
    }
    int next = 0;
    for (int r = 0; r < 4; ++r)
        if (dense[size_t(r)] == 0) dense[size_t(r)] = next++;
    plan.var_count = next;
    plan.var_of_pos.resize(size_t(k));
    for (int i = 0; i < k; ++i) plan.var_of_pos[size_t(i)] = dense[size_t(cm[raw[size_t(i)]])];
    if (dense[size_t(du)] < 0 || dense[size_t(dv)] < 0)
        throw internal_error("distinguished variable vanished in the collapse");
    plan.u = dense[size_t(du)];
    plan.v = dense[size_t(dv)];

    // The hardcoded target must equal the actual collapsed sum.
    BinaryWeightedFunction got;
    for (uint32_t vals = 0; vals < (uint32_t(1) << plan.var_count); ++vals) {
        auto bit = [&](int var) { return int(vals >> var & 1u); };
        uint32_t t = 0;
        for (int i = 0; i < k; ++i)
            t = (t << 1) | uint32_t(bit(plan.var_of_pos[size_t(i)]));
        if (!f.sat(t)) continue;
        int s = bit(plan.u), v = bit(plan.v);
        (s == 0 ? (v == 0 ? got.g00 : got.g01) : (v == 0 ? got.g10 : got.g11)) += Rat(1);
    }
    if (!(got == plan.g)) throw internal_error("collapse plan sum mismatch for " + plan.label);
    return plan;
}

HardSimulationWitness sd_hard_witness(const BooleanFunction& f,
                                      const PerfectEqualityWitness& eq,
                                      const SynthesisOptions& opts) {
    require_boolean(f, "self-dual synthesis");
    if (!is_self_dual(f)) throw input_error("the function must be invariant under complement");
    if (is_affine(f)) throw input_error("affine functions admit no hard pair");
    verify_equality_input(f, eq, opts.enumeration);

    int k = f.arity();
    uint32_t shift = 0;
    BooleanFunction base = f;
    std::optional<SimGadget> xor_sim;
    if (!f.sat(0)) {
        shift = f.support()[0];
        std::vector<Rat> tbl(f.size());
        for (uint32_t t = 0; t < f.size(); ++t) tbl[t] = f.value(t ^ shift);
        base = BooleanFunction(k, std::move(tbl));
        if (!base.sat(0) || !is_self_dual(base) || is_affine(base))
            throw internal_error("shift by the smallest support point went wrong");
        xor_sim = sd_xor_gadget(f, eq, opts.enumeration);
    }

    uint32_t b = 0, c = 0;
    bool found = false;
    for (uint32_t bb : base.support()) {
        for (uint32_t cc : base.support()) {
            if (!base.sat(bb ^ cc)) { b = bb; c = cc; found = true; break; }
        }
        if (found) break;
    }
    if (!found)
        throw internal_error("support closed under difference despite non-affineness");
    SdCasePlan plan = sd_case_plan(base, b, c);

    // One hyperarc over the argument positions; each collapsed variable gets
    // a representative vertex, other ports reach it through equality copies,
    // shifted ports through exclusive-or copies.
    TupleHypergraph h = TupleHypergraph::single_arc(k);
    std::vector<int> rep(size_t(plan.var_count), -1);
    std::vector<std::vector<std::pair<int, bool>>> ports;
    ports.resize(size_t(plan.var_count));
    for (int i = 0; i < k; ++i)
        ports[size_t(plan.var_of_pos[size_t(i)])].push_back(
            {i, bool(shift >> (k - 1 - i) & 1u)});
    for (int var = 0; var < plan.var_count; ++var) {
        int direct = -1;
        for (const auto& [pos, twisted] : ports[size_t(var)])
            if (!twisted) { direct = pos; break; }
        int r = direct >= 0 ? direct : h.n++;
        rep[size_t(var)] = r;
        for (const auto& [pos, twisted] : ports[size_t(var)]) {
            if (pos == direct && !twisted) continue;
            if (!twisted) {
                std::vector<int> identify(size_t(eq.h.n), -1);
                identify[size_t(eq.u)] = r;
                identify[size_t(eq.v)] = pos;
                h = splice(h, eq.h, identify).h;
            } else {
                std::vector<int> identify(size_t(xor_sim->h.n), -1);
                identify[size_t(xor_sim->verts[0])] = r;
                identify[size_t(xor_sim->verts[1])] = pos;
                h = splice(h, xor_sim->h, identify).h;
            }
        }
    }

    HardSimulationWitness out{std::move(h), {}, rep[size_t(plan.u)], rep[size_t(plan.v)],
                              plan.g};
    confirm_hard(f, out, opts.enumeration);
    return out;
}

namespace {

// Shared validation for the two assembly routines: the certificate must
// really enumerate to its target, and there must be a gadget for every
// function the instance uses.
void check_certificate(const ImplementationCertificate& cert,
                       const std::vector<SimGadget>& constraint_gadgets,
                       const EnumOptions& opts) {
    cert.instance.validate();
    if (cert.t < 0 || cert.t > cert.instance.n)
        throw input_error("distinguished prefix is out of range");
    if (cert.target.arity() != cert.t)
        throw input_error("target arity does not match the distinguished prefix");
    if (constraint_gadgets.size() != cert.instance.language.size())
        throw input_error("need one gadget per language function, got " +
                          std::to_string(constraint_gadgets.size()) + " for " +
                          std::to_string(cert.instance.language.size()));
    std::vector<int> dist(size_t(cert.t), 0);
    std::iota(dist.begin(), dist.end(), 0);
    auto counts = extension_counts(cert.instance, dist, opts);
    if (counts != cert.target.table())
        throw input_error("certificate target does not match the instance's extension counts");
}

void check_constraint_gadget(const BooleanFunction& f, const BooleanFunction& target,
                             const SimGadget& gadget, bool allow_conditioning,
                             const EnumOptions& opts, const std::string& label) {
    if (!allow_conditioning && !gadget.cond.empty())
        throw input_error("gadget for " + label + " must be unconditioned");
    if (gadget.verts.size() != size_t(target.arity()))
        throw input_error("gadget for " + label + " has the wrong number of vertices");
    std::vector<int> seen = gadget.verts;
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
        throw input_error("gadget for " + label + " repeats a distinguished vertex");
    Rat total(0);
    for (const auto& w : target.table()) total += w;
    if (sgn(total) == 0) throw input_error("function " + label + " has empty support");
    auto mm = gadget.cond.empty()
                  ? marginals(f, gadget.h, gadget.verts, opts)
                  : cond_marginals(f, gadget.h, gadget.cond, gadget.verts, opts);
    for (uint32_t t = 0; t < target.size(); ++t)
        if (mm.at(t) != Rat(target.value(t) / total))
            throw input_error("gadget for " + label + " does not simulate it exactly");
}

struct Assembly {
    TupleHypergraph h;
    std::vector<std::vector<int>> occ;  // vertex ids per instance variable
    std::vector<int> reps;
    Conditioning cond;  // union of the copies' conditionings, ids rebased
};

Assembly assemble_copies(const ImplementationCertificate& cert,
                         const std::vector<SimGadget>& constraint_gadgets, int arity) {
    Assembly out;
    out.h.n = 0;
    out.h.arity = arity;
    out.occ.resize(size_t(cert.instance.n));
    for (const auto& c : cert.instance.constraints) {
        const SimGadget& g = constraint_gadgets[size_t(c.fn)];
        std::vector<int> identify(size_t(g.h.n), -1);
        auto sp = splice(out.h, g.h, identify);
        out.h = sp.h;
        for (size_t j = 0; j < c.vars.size(); ++j)
            out.occ[size_t(c.vars[j])].push_back(sp.where[size_t(g.verts[j])]);
        for (int v : g.cond.pin0) out.cond.pin0.push_back(sp.where[size_t(v)]);
        for (int v : g.cond.pin1) out.cond.pin1.push_back(sp.where[size_t(v)]);
        for (const auto& block : g.cond.eq) {
            std::vector<int> moved;
            for (int v : block) moved.push_back(sp.where[size_t(v)]);
            out.cond.eq.push_back(std::move(moved));
        }
        for (const auto& cert2 : g.cond.certs) {
            bool seen = false;
            for (const auto& have : out.cond.certs)
                if (have == cert2) { seen = true; break; }
            if (!seen) out.cond.certs.push_back(cert2);
        }
    }
    // A variable in no constraint still doubles the count: give it a fresh
    // isolated vertex.
    for (auto& occ : out.occ)
        if (occ.empty()) occ.push_back(out.h.n++);
    out.reps.reserve(out.occ.size());
    for (const auto& occ : out.occ) out.reps.push_back(occ.front());
    return out;
}

std::vector<int> prefix(const std::vector<int>& reps, int t) {
    return std::vector<int>(reps.begin(), reps.begin() + t);
}

}  // namespace

SimGadget csp_to_gadget(const BooleanFunction& f, const PerfectEqualityWitness& eq,
                        const ImplementationCertificate& cert,
                        const std::vector<SimGadget>& constraint_gadgets,
                        const EnumOptions& opts) {
    require_boolean(f, "gadget assembly");
    check_certificate(cert, constraint_gadgets, opts);
    verify_equality_input(f, eq, opts);
    for (const auto& c : cert.instance.constraints)
        check_constraint_gadget(f, cert.instance.language[size_t(c.fn)],
                                constraint_gadgets[size_t(c.fn)], false, opts,
                                "function " + std::to_string(c.fn));

    Rat target_total(0);
    for (const auto& w : cert.target.table()) target_total += w;
    if (sgn(target_total) == 0) throw input_error("the instance is unsatisfiable");

    Assembly a = assemble_copies(cert, constraint_gadgets, f.arity());
    for (const auto& occ : a.occ) {
        for (size_t i = 0; i < occ.size(); ++i) {
            for (size_t j = i + 1; j < occ.size(); ++j) {
                std::vector<int> identify(size_t(eq.h.n), -1);
                identify[size_t(eq.u)] = occ[i];
                identify[size_t(eq.v)] = occ[j];
                a.h = splice(a.h, eq.h, identify).h;
            }
        }
    }

    auto mm = marginals(f, a.h, prefix(a.reps, cert.t), opts);
    for (uint32_t t = 0; t < cert.target.size(); ++t)
        if (mm.at(t) != Rat(cert.target.value(t) / target_total))
            throw internal_error("assembled gadget does not match the target");
    return SimGadget{std::move(a.h), {}, std::move(a.reps)};
}

SimGadget csp_to_simulation(const BooleanFunction& f, const SupportCertificate& eq_support,
                            const ImplementationCertificate& cert,
                            const std::vector<SimGadget>& constraint_gadgets,
                            const EnumOptions& opts) {
    require_boolean(f, "simulation assembly");
    check_certificate(cert, constraint_gadgets, opts);
    if (eq_support.kind != SupportKind::equality)
        throw input_error("the occurrence blocks need an equality support certificate");
    if (!check_support(f, eq_support, opts))
        throw input_error("equality support certificate does not verify");
    for (const auto& c : cert.instance.constraints)
        check_constraint_gadget(f, cert.instance.language[size_t(c.fn)],
                                constraint_gadgets[size_t(c.fn)], true, opts,
                                "function " + std::to_string(c.fn));

    Assembly a = assemble_copies(cert, constraint_gadgets, f.arity());
    bool seen = false;
    for (const auto& have : a.cond.certs)
        if (have == eq_support) { seen = true; break; }
    if (!seen) a.cond.certs.push_back(eq_support);

    // Fold each occurrence set into the conditioning: absorb into a pin set
    // it touches, otherwise merge with every block it meets.
    for (const auto& occ : a.occ) {
        auto touches = [&](const std::vector<int>& set) {
            for (int v : occ)
                if (std::find(set.begin(), set.end(), v) != set.end()) return true;
            return false;
        };
        bool in0 = touches(a.cond.pin0);
        bool in1 = touches(a.cond.pin1);
        if (in0 && in1)
            throw input_error("instance is unsatisfiable: a variable reaches both pin sets");
        if (in0) {
            a.cond.pin0.insert(a.cond.pin0.end(), occ.begin(), occ.end());
            continue;
        }
        if (in1) {
            a.cond.pin1.insert(a.cond.pin1.end(), occ.begin(), occ.end());
            continue;
        }
        std::vector<int> merged(occ.begin(), occ.end());
        std::vector<std::vector<int>> kept;
        for (auto& block : a.cond.eq) {
            if (touches(block)) merged.insert(merged.end(), block.begin(), block.end());
            else kept.push_back(std::move(block));
        }
        kept.push_back(std::move(merged));
        a.cond.eq = std::move(kept);
    }
    try {
        a.cond.normalize();
    } catch (const input_error& e) {
        throw input_error(std::string("instance is unsatisfiable: ") + e.what());
    }

    Rat total(0);
    for (const auto& w : cert.target.table()) total += w;
    if (sgn(total) == 0) throw input_error("the instance is unsatisfiable");
    auto mm = cond_marginals(f, a.h, a.cond, prefix(a.reps, cert.t), opts);
    for (uint32_t t = 0; t < cert.target.size(); ++t)
        if (mm.at(t) != Rat(cert.target.value(t) / total))
            throw internal_error("assembled simulation does not match the target");
    return SimGadget{std::move(a.h), std::move(a.cond), std::move(a.reps)};
}

TupleHypergraph realize_conditioning(const TupleHypergraph& h, const Conditioning& cond,
                                     const std::optional<PinGadget>& pin0,
                                     const std::optional<PinGadget>& pin1,
                                     const std::optional<PerfectEqualityWitness>& eq) {
    h.validate();
    cond.validate(h.n);
    bool need_eq = false;
    for (const auto& block : cond.eq) need_eq = need_eq || block.size() >= 2;
    if (!cond.pin0.empty() && (!pin0 || pin0->spin != 0))
        throw input_error("realisation needs a pin-0 gadget");
    if (!cond.pin1.empty() && (!pin1 || pin1->spin != 1))
        throw input_error("realisation needs a pin-1 gadget");
    if (need_eq && !eq) throw input_error("realisation needs an equality gadget");

    TupleHypergraph out = h;
    auto attach_pin = [&](const PinGadget& pg, int v) {
        if (pg.h.arity != out.arity)
            throw input_error("pin gadget arity does not match the host");
        std::vector<int> identify(size_t(pg.h.n), -1);
        identify[size_t(pg.vertex)] = v;
        out = splice(out, pg.h, identify).h;
    };
    for (int v : cond.pin0) attach_pin(*pin0, v);
    for (int v : cond.pin1) attach_pin(*pin1, v);
    for (const auto& block : cond.eq) {
        if (eq && eq->h.arity != out.arity && block.size() >= 2)
            throw input_error("equality gadget arity does not match the host");
        for (size_t i = 0; i < block.size(); ++i) {
            for (size_t j = i + 1; j < block.size(); ++j) {
                std::vector<int> identify(size_t(eq->h.n), -1);
                identify[size_t(eq->u)] = block[i];
                identify[size_t(eq->v)] = block[j];
                out = splice(out, eq->h, identify).h;
            }
        }
    }
    return out;
}

PinningTransferResult pinning_transfer(const BooleanFunction& f, const BooleanFunction& g,
                                       const TupleHypergraph& sim_realized,
                                       const std::vector<int>& sim_verts,
                                       const TupleHypergraph& h0, int v0, int spin,
                                       const EnumOptions& opts) {
    require_boolean(f, "pinning transfer");
    if (spin != 0 && spin != 1) throw input_error("spin must be 0 or 1");
    h0.validate();
    sim_realized.validate();
    int t = g.arity();
    if (!h0.arcs.empty() && h0.arity != t)
        throw input_error("carrier arity does not match the simulated function");
    if (v0 < 0 || v0 >= h0.n) throw input_error("carrier vertex out of range");
    if (sim_verts.size() != size_t(t))
        throw input_error("simulation needs one distinguished vertex per argument");
    Rat zg(0);
    for (const auto& w : g.table()) zg += w;
    if (sgn(zg) == 0) throw input_error("simulated function has empty support");

    Rat zh0 = partition_function(g, h0, opts);
    if (sgn(zh0) == 0) throw input_error("carrier has no satisfying assignments");
    auto m0 = marginals(g, h0, {v0}, opts);
    if (m0.at(uint32_t(spin)) < make_rat(9, 10))
        throw input_error("carrier favours the spin with probability " +
                          rat_str(m0.at(uint32_t(spin))) + ", needs at least 9/10");

    // Error budget: the carrier's mass margin spread over its arcs and
    // assignment space. The simulation must sit inside it cell by cell.
    size_t f0 = h0.arcs.size();
    Rat margin = Rat(zh0 / rat_pow(zg, f0));
    Rat eps = std::min(Rat(margin / 8), make_rat(1, 8));
    Rat budget = Rat(eps / (Rat(Int(f0)) * rat_pow(Rat(2), 2 * size_t(h0.n))));
    auto msim = marginals(f, sim_realized, sim_verts, opts);
    Rat worst(0);
    for (uint32_t idx = 0; idx < g.size(); ++idx) {
        Rat diff = Rat(msim.at(idx) - Rat(g.value(idx) / zg));
        if (sgn(diff) < 0) diff = Rat(-diff);
        if (diff > worst) worst = diff;
    }
    if (worst > budget)
        throw input_error("simulation misses the error budget: off by " + rat_str(worst) +
                          ", allowed " + rat_str(budget));

    TupleHypergraph h;
    h.n = h0.n;
    h.arity = f.arity();
    for (const auto& arc : h0.arcs) {
        std::vector<int> identify(size_t(sim_realized.n), -1);
        for (size_t j = 0; j < arc.size(); ++j) identify[size_t(sim_verts[j])] = arc[j];
        h = splice(h, sim_realized, identify).h;
    }
    Rat p = marginals(f, h, {v0}, opts).at(uint32_t(spin));
    if (p <= make_rat(1, 2))
        throw input_error("transferred marginal is " + rat_str(p) + ", not above 1/2");
    return {std::move(h), v0, spin, std::move(p)};
}

DeltaPins delta_pins_from_implies(const BooleanFunction& f, const SimGadget& implies_sim,
                                  const EnumOptions& opts) {
    require_boolean(f, "pin extraction");
    if (!implies_sim.cond.empty()) throw input_error("the simulation must be unconditioned");
    if (implies_sim.verts.size() != 2)
        throw input_error("the simulation needs exactly two distinguished vertices");
    int v1 = implies_sim.verts[0], v2 = implies_sim.verts[1];
    auto mm = marginals(f, implies_sim.h, implies_sim.verts, opts);
    Rat third = make_rat(1, 3);
    if (mm.at(0) != third || mm.at(1) != third || sgn(mm.at(2)) != 0 || mm.at(3) != third)
        throw input_error("gadget cells are not the exact thirds of an implication");

    DeltaPins out;
    out.pin0_support = {SupportKind::pin0, implies_sim.h, {v1}};
    out.pin1_support = {SupportKind::pin1, implies_sim.h, {v2}};
    if (!check_support(f, out.pin0_support, opts) || !check_support(f, out.pin1_support, opts))
        throw internal_error("lopsided marginals failed the support check");

    out.delta0.h = implies_sim.h;
    out.delta0.cond.pin0 = {v2};
    out.delta0.cond.certs = {out.pin0_support};
    out.delta0.verts = {v1};
    out.delta1.h = implies_sim.h;
    out.delta1.cond.pin1 = {v1};
    out.delta1.cond.certs = {out.pin1_support};
    out.delta1.verts = {v2};
    auto forced = [&](const SimGadget& gadget, int spin) {
        auto check = cond_marginals(f, gadget.h, gadget.cond, gadget.verts, opts);
        return check.at(uint32_t(spin)) == Rat(1);
    };
    if (!forced(out.delta0, 0) || !forced(out.delta1, 1))
        throw internal_error("conditioned pin is not forced");
    return out;
}

ImplementSearchResult implement_search(const std::vector<BooleanFunction>& language,
                                       const BooleanFunction& target,
                                       const SynthesisOptions& opts) {
    ImplementSearchResult res;
    res.max_aux = opts.max_aux;
    res.max_constraints = opts.max_constraints;
    int t = target.arity();
    std::vector<int> dist(size_t(t), 0);
    std::iota(dist.begin(), dist.end(), 0);

    for (int aux = 0; aux <= opts.max_aux; ++aux) {
        int n = t + aux;
        std::vector<Constraint> candidates;
        for (size_t fi = 0; fi < language.size(); ++fi) {
            int a = language[fi].arity();
            std::vector<int> vars(size_t(a), 0);
            while (true) {
                candidates.push_back({int(fi), vars});
                int j = a - 1;
                while (j >= 0 && vars[size_t(j)] == n - 1) vars[size_t(j--)] = 0;
                if (j < 0) break;
                ++vars[size_t(j)];
            }
        }

        CspInstance inst;
        inst.n = n;
        inst.language = language;
        auto examine = [&](const std::vector<size_t>& chosen) {
            inst.constraints.clear();
            for (size_t i : chosen) inst.constraints.push_back(candidates[i]);
            ++res.instances_examined;
            auto counts = extension_counts(inst, dist, opts.enumeration);
            if (counts == target.table()) {
                res.certificate = ImplementationCertificate{inst, t, target};
                return true;
            }
            return false;
        };

        if (examine({})) return res;
        int cap = std::min<int>(opts.max_constraints, int(candidates.size()));
        for (int m = 1; m <= cap; ++m) {
            std::vector<size_t> idx(size_t(m), 0);
            std::iota(idx.begin(), idx.end(), 0);
            while (true) {
                if (examine(idx)) return res;
                int j = m - 1;
                while (j >= 0 && idx[size_t(j)] == candidates.size() - size_t(m - j)) --j;
                if (j < 0) break;
                ++idx[size_t(j)];
                for (int q = j + 1; q < m; ++q) idx[size_t(q)] = idx[size_t(q - 1)] + 1;
            }
        }
    }
    return res;
}

namespace {

// The fallback scans gadgets whose arcs are unordered vertex sets, evaluated
// through the symmetrisation; a winner is expanded back to ordered arcs over
// the original function.
struct FallbackScan {
    const BooleanFunction& f;
    const BooleanFunction& fs;
    const SynthesisOptions& opts;
    bool symmetric;
    std::optional<SupportCertificate> have_pin0, have_pin1, have_eq;
    unsigned long long candidates_seen = 0;
    unsigned long long conditionings_seen = 0;

    TupleHypergraph expand(int n, const std::vector<uint32_t>& arcs) const {
        TupleHypergraph h;
        h.n = n;
        h.arity = f.arity();
        for (uint32_t m : arcs) {
            std::vector<int> members = mask_bits(m);
            if (symmetric) {
                h.arcs.push_back(members);
            } else {
                std::sort(members.begin(), members.end());
                do h.arcs.push_back(members);
                while (std::next_permutation(members.begin(), members.end()));
            }
        }
        return h;
    }

    std::optional<ClassificationWitness> scan_candidate(int n,
                                                        const std::vector<uint32_t>& arcs) {
        ++candidates_seen;
        TupleHypergraph eval;
        eval.n = n;
        eval.arity = f.arity();
        for (uint32_t m : arcs) eval.arcs.push_back(mask_bits(m));
        if (sgn(partition_function(fs, eval, opts.enumeration)) == 0) return std::nullopt;

        std::vector<int> all(size_t(n), 0);
        std::iota(all.begin(), all.end(), 0);
        auto joint = marginals(fs, eval, all, opts.enumeration);
        auto bit = [&](uint32_t idx, int v) { return idx >> (n - 1 - v) & 1u; };
        auto pair_cells = [&](int u, int v, auto keep) {
            BinaryWeightedFunction g;
            for (uint32_t idx = 0; idx < joint.probs.size(); ++idx) {
                if (!keep(idx)) continue;
                Rat& cell = bit(idx, u) == 0 ? (bit(idx, v) == 0 ? g.g00 : g.g01)
                                             : (bit(idx, v) == 0 ? g.g10 : g.g11);
                cell += joint.at(idx);
            }
            return g;
        };
        auto everything = [](uint32_t) { return true; };

        // Perfect equality pairs first, then unconditioned hard pairs.
        for (int u = 0; u < n; ++u) {
            for (int v = u + 1; v < n; ++v) {
                BinaryWeightedFunction g = pair_cells(u, v, everything);
                if (g.g00 == make_rat(1, 2) && g.g11 == make_rat(1, 2)) {
                    PerfectEqualityWitness w{expand(n, arcs), u, v};
                    confirm_equality(f, w, opts.enumeration);
                    return ClassificationWitness::of(std::move(w));
                }
            }
        }
        for (int u = 0; u < n; ++u) {
            for (int v = u + 1; v < n; ++v) {
                BinaryWeightedFunction g = pair_cells(u, v, everything);
                if (is_hard(g)) {
                    HardSimulationWitness w{expand(n, arcs), {}, u, v, g};
                    confirm_hard(f, w, opts.enumeration);
                    return ClassificationWitness::of(std::move(w));
                }
            }
        }

        collect_certificates(n, arcs, joint);
        if (have_pin0 || have_pin1 || have_eq)
            return scan_conditioned(n, arcs, joint);
        return std::nullopt;
    }

    void collect_certificates(int n, const std::vector<uint32_t>& arcs,
                              const MarginalTable& joint) {
        auto bit = [&](uint32_t idx, int v) { return idx >> (n - 1 - v) & 1u; };
        if (!have_pin0 || !have_pin1) {
            for (int v = 0; v < n && (!have_pin0 || !have_pin1); ++v) {
                Rat p1(0);
                for (uint32_t idx = 0; idx < joint.probs.size(); ++idx)
                    if (bit(idx, v)) p1 += joint.at(idx);
                Rat p0 = Rat(Rat(1) - p1);
                if (!have_pin0 && p0 > p1) {
                    SupportCertificate cert{SupportKind::pin0, expand(n, arcs), {v}};
                    if (!check_support(f, cert, opts.enumeration))
                        throw internal_error("pin support certificate did not verify");
                    have_pin0 = std::move(cert);
                }
                if (!have_pin1 && p1 > p0) {
                    SupportCertificate cert{SupportKind::pin1, expand(n, arcs), {v}};
                    if (!check_support(f, cert, opts.enumeration))
                        throw internal_error("pin support certificate did not verify");
                    have_pin1 = std::move(cert);
                }
            }
        }
        if (!have_eq) {
            for (int u = 0; u < n && !have_eq; ++u) {
                for (int v = u + 1; v < n; ++v) {
                    Rat c00(0), c01(0), c10(0), c11(0);
                    for (uint32_t idx = 0; idx < joint.probs.size(); ++idx) {
                        Rat& cell = bit(idx, u) == 0 ? (bit(idx, v) == 0 ? c00 : c01)
                                                     : (bit(idx, v) == 0 ? c10 : c11);
                        cell += joint.at(idx);
                    }
                    if (c00 == c11 && Rat(c00 + c11) > Rat(c01 + c10)) {
                        SupportCertificate cert{SupportKind::equality, expand(n, arcs),
                                                {u, v}};
                        if (!check_support(f, cert, opts.enumeration))
                            throw internal_error("equality support certificate did not verify");
                        have_eq = std::move(cert);
                        break;
                    }
                }
            }
        }
    }

    std::optional<ClassificationWitness> scan_conditioned(int n,
                                                          const std::vector<uint32_t>& arcs,
                                                          const MarginalTable& joint) {
        auto bit = [&](uint32_t idx, int v) { return idx >> (n - 1 - v) & 1u; };
        // Pin up to two vertices and optionally one two-vertex block, every
        // combination in a fixed order, each ingredient backed by a
        // certificate already in hand.
        for (int tp = 0; tp <= 2 && tp <= n; ++tp) {
            std::vector<int> pick(size_t(tp), 0);
            std::iota(pick.begin(), pick.end(), 0);
            while (true) {
                for (uint32_t spins = 0; spins < (uint32_t(1) << tp); ++spins) {
                    bool uses0 = false, uses1 = false;
                    for (int i = 0; i < tp; ++i) (spins >> i & 1u ? uses1 : uses0) = true;
                    if (uses0 && !have_pin0) continue;
                    if (uses1 && !have_pin1) continue;
                    auto witness = scan_blocks(n, arcs, joint, bit, pick, spins, tp);
                    if (witness) return witness;
                }
                int j = tp - 1;
                while (j >= 0 && pick[size_t(j)] == n - (tp - j)) --j;
                if (j < 0) break;
                ++pick[size_t(j)];
                for (int q = j + 1; q < tp; ++q) pick[size_t(q)] = pick[size_t(q - 1)] + 1;
            }
        }
        return std::nullopt;
    }

    template <class BitFn>
    std::optional<ClassificationWitness> scan_blocks(int n, const std::vector<uint32_t>& arcs,
                                                     const MarginalTable& joint, BitFn bit,
                                                     const std::vector<int>& pick,
                                                     uint32_t spins, int tp) {
        std::vector<std::pair<int, int>> blocks;
        blocks.push_back({-1, -1});
        if (have_eq) {
            for (int a = 0; a < n; ++a) {
                if (std::find(pick.begin(), pick.end(), a) != pick.end()) continue;
                for (int b = a + 1; b < n; ++b) {
                    if (std::find(pick.begin(), pick.end(), b) != pick.end()) continue;
                    blocks.push_back({a, b});
                }
            }
        }
        for (const auto& [ba, bb] : blocks) {
            if (tp == 0 && ba < 0) continue;  // unconditioned pairs already scanned
            ++conditionings_seen;
            auto keep = [&](uint32_t idx) {
                for (int i = 0; i < tp; ++i)
                    if (bit(idx, pick[size_t(i)]) != (spins >> i & 1u)) return false;
                if (ba >= 0 && bit(idx, ba) != bit(idx, bb)) return false;
                return true;
            };
            Rat mass(0);
            for (uint32_t idx = 0; idx < joint.probs.size(); ++idx)
                if (keep(idx)) mass += joint.at(idx);
            if (sgn(mass) == 0) continue;
            for (int u = 0; u < n; ++u) {
                if (std::find(pick.begin(), pick.end(), u) != pick.end()) continue;
                for (int v = u + 1; v < n; ++v) {
                    if (std::find(pick.begin(), pick.end(), v) != pick.end()) continue;
                    if (ba >= 0 && u == ba && v == bb) continue;
                    BinaryWeightedFunction g;
                    for (uint32_t idx = 0; idx < joint.probs.size(); ++idx) {
                        if (!keep(idx)) continue;
                        Rat& cell = bit(idx, u) == 0
                                        ? (bit(idx, v) == 0 ? g.g00 : g.g01)
                                        : (bit(idx, v) == 0 ? g.g10 : g.g11);
                        cell += joint.at(idx);
                    }
                    g.g00 = Rat(g.g00 / mass);
                    g.g01 = Rat(g.g01 / mass);
                    g.g10 = Rat(g.g10 / mass);
                    g.g11 = Rat(g.g11 / mass);
                    if (!is_hard(g)) continue;
                    Conditioning cond;
                    for (int i = 0; i < tp; ++i)
                        (spins >> i & 1u ? cond.pin1 : cond.pin0).push_back(pick[size_t(i)]);
                    if (ba >= 0) cond.eq.push_back({ba, bb});
                    if (!cond.pin0.empty()) cond.certs.push_back(*have_pin0);
                    if (!cond.pin1.empty()) cond.certs.push_back(*have_pin1);
                    if (ba >= 0) cond.certs.push_back(*have_eq);
                    HardSimulationWitness w{expand(n, arcs), std::move(cond), u, v, g};
                    confirm_hard(f, w, opts.enumeration);
                    return ClassificationWitness::of(std::move(w));
                }
            }
        }
        return std::nullopt;
    }
};

bool arcs_connected(int n, const std::vector<uint32_t>& arcs) {
    std::vector<int> parent(size_t(n), 0);
    std::iota(parent.begin(), parent.end(), 0);
    auto root = [&](int v) {
        while (parent[size_t(v)] != v) v = parent[size_t(v)] = parent[size_t(parent[size_t(v)])];
        return v;
    };
    for (uint32_t m : arcs) {
        auto members = mask_bits(m);
        for (size_t i = 1; i < members.size(); ++i)
            parent[size_t(root(members[i]))] = root(members[0]);
    }
    int r0 = root(0);
    for (int v = 1; v < n; ++v)
        if (root(v) != r0) return false;
    return true;
}

bool arcs_canonical(int n, const std::vector<uint32_t>& arcs,
                    const std::vector<std::vector<int>>& perms) {
    std::vector<uint32_t> remapped(arcs.size());
    for (const auto& p : perms) {
        bool identity = true;
        for (int v = 0; v < n; ++v) identity = identity && p[size_t(v)] == v;
        if (identity) continue;
        for (size_t a = 0; a < arcs.size(); ++a) {
            uint32_t m = 0;
            for (int v = 0; v < n; ++v)
                if (arcs[a] >> v & 1u) m |= uint32_t(1) << p[size_t(v)];
            remapped[a] = m;
        }
        std::sort(remapped.begin(), remapped.end());
        if (remapped < arcs) return false;
    }
    return true;
}

}  // namespace

ClassificationWitness symmetric_fallback_search(const BooleanFunction& f,
                                                const SynthesisOptions& opts) {
    require_boolean(f, "fallback search");
    int k = f.arity();
    if (k > opts.max_sym_arity)
        throw resource_error("arity " + std::to_string(k) +
                             " exceeds the symmetrisation bound " +
                             std::to_string(opts.max_sym_arity));
    BooleanFunction fs = symmetrise(f, opts.max_sym_arity);
    if (easy_k_member(fs))
        throw input_error("the fallback is for symmetrisations outside the easy list");

    FallbackScan scan{f, fs, opts, is_symmetric(f), {}, {}, {}, 0, 0};
    for (int n = k; n <= opts.max_gadget_vertices; ++n) {
        auto perms = all_permutations(n);
        std::vector<uint32_t> subsets;
        for (uint32_t m = 0; m < (uint32_t(1) << n); ++m)
            if (popcount(m) == k) subsets.push_back(m);
        int cap = std::min<int>(opts.max_gadget_arcs, int(subsets.size()));
        for (int m = 1; m <= cap; ++m) {
            std::vector<size_t> idx(size_t(m), 0);
            std::iota(idx.begin(), idx.end(), 0);
            while (true) {
                std::vector<uint32_t> arcs;
                arcs.reserve(size_t(m));
                uint32_t covered = 0;
                for (size_t i : idx) {
                    arcs.push_back(subsets[i]);
                    covered |= subsets[i];
                }
                if (covered == (uint32_t(1) << n) - 1 && arcs_connected(n, arcs) &&
                    arcs_canonical(n, arcs, perms)) {
                    auto witness = scan.scan_candidate(n, arcs);
                    if (witness) return std::move(*witness);
                }
                int j = m - 1;
                while (j >= 0 && idx[size_t(j)] == subsets.size() - size_t(m - j)) --j;
                if (j < 0) break;
                ++idx[size_t(j)];
                for (int q = j + 1; q < m; ++q) idx[size_t(q)] = idx[size_t(q - 1)] + 1;
            }
        }
    }

    ClassificationWitness out;
    out.kind = ClassificationWitness::Kind::inconclusive;
    out.trace.push_back("fallback search exhausted " +
                        std::to_string(scan.candidates_seen) + " gadgets and " +
                        std::to_string(scan.conditionings_seen) +
                        " conditionings up to " +
                        std::to_string(opts.max_gadget_vertices) + " vertices and " +
                        std::to_string(opts.max_gadget_arcs) + " arcs");
    std::string inventory = "certificates found:";
    inventory += scan.have_pin0 ? " pin0" : "";
    inventory += scan.have_pin1 ? " pin1" : "";
    inventory += scan.have_eq ? " equality" : "";
    if (!scan.have_pin0 && !scan.have_pin1 && !scan.have_eq) inventory += " none";
    out.trace.push_back(inventory);
    return out;
}

namespace {

// Constructive classification with memoised recursion on pinned
// restrictions.
struct Synthesizer {
    SynthesisOptions opts;
    std::map<std::string, ClassificationWitness> memo;

    const EnumOptions& eopts() const { return opts.enumeration; }

    ClassificationWitness classify(const BooleanFunction& f) {
        require_boolean(f, "classification");
        std::string key = std::to_string(f.arity()) + ":" + f.bits();
        auto hit = memo.find(key);
        if (hit != memo.end()) return hit->second;
        ClassificationWitness out = dispatch(f);
        memo.emplace(std::move(key), out);
        return out;
    }

    ClassificationWitness dispatch(const BooleanFunction& f) {
        if (is_affine(f)) return ClassificationWitness::affine();
        int k = f.arity();
        if (k == 1) throw internal_error("every one-argument function is affine");
        if (k == 2) return base_case(f);
        if (k > opts.max_sym_arity) {
            ClassificationWitness out;
            out.kind = ClassificationWitness::Kind::inconclusive;
            out.trace.push_back("arity " + std::to_string(k) +
                                " exceeds the symmetrisation bound " +
                                std::to_string(opts.max_sym_arity));
            return out;
        }
        auto tag = easy_k_member(symmetrise(f, opts.max_sym_arity));
        if (!tag) return symmetric_fallback_search(f, opts);
        switch (*tag) {
            case EasyTag::eq:
            case EasyTag::even:
            case EasyTag::odd:
                return ClassificationWitness::of(equality_gadget_star(f, eopts()));
            case EasyTag::one:
                throw internal_error("a function with full symmetrisation is constant");
            case EasyTag::allone:
                return allone_route(f);
            case EasyTag::allzero:
                return allzero_route(f);
            case EasyTag::zero:
                return zero_route(f);
        }
        throw internal_error("unhandled symmetrisation tag");
    }

    // A non-affine two-argument function misses exactly one point. Missing a
    // constant point makes the single arc hard; missing a mixed point makes
    // the symmetrisation equality.
    ClassificationWitness base_case(const BooleanFunction& f) {
        if (!f.sat(0b00) || !f.sat(0b11)) {
            HardSimulationWitness w{TupleHypergraph::single_arc(2), {}, 0, 1,
                                    single_hyperarc_pair_witness(f, 1, 2)};
            confirm_hard(f, w, eopts());
            return ClassificationWitness::of(std::move(w));
        }
        return ClassificationWitness::of(equality_gadget_star(f, eopts()));
    }

    ClassificationWitness lift(const BooleanFunction& f, ClassificationWitness sub,
                               uint32_t s0, uint32_t s1, const PinGadget* pin0,
                               const PinGadget* pin1) {
        if (sub.kind == ClassificationWitness::Kind::inconclusive) {
            sub.trace.push_back("stopped inside a pinned restriction of a larger function");
            return sub;
        }
        if (sub.kind == ClassificationWitness::Kind::affine)
            throw internal_error("a pinned restriction was affine where the case analysis "
                                 "promised otherwise");
        std::optional<PinGadget> o0 = pin0 ? std::optional<PinGadget>(*pin0) : std::nullopt;
        std::optional<PinGadget> o1 = pin1 ? std::optional<PinGadget>(*pin1) : std::nullopt;
        if (sub.kind == ClassificationWitness::Kind::perfect_equality) {
            PerfectEqualityWitness w{lift_gadget(f, s0, s1, o0, o1, sub.equality->h),
                                     sub.equality->u, sub.equality->v};
            confirm_equality(f, w, eopts());
            return ClassificationWitness::of(std::move(w));
        }
        HardSimulationWitness w = *sub.hard;
        w.h = lift_gadget(f, s0, s1, o0, o1, w.h);
        for (auto& cert : w.cond.certs)
            cert.gadget = lift_gadget(f, s0, s1, o0, o1, cert.gadget);
        confirm_hard(f, w, eopts());
        return ClassificationWitness::of(std::move(w));
    }

    // Pin one argument to 1, classify the rest, lift the witness back.
    ClassificationWitness pin_one_recurse(const BooleanFunction& f, int r,
                                          const PinGadget& pin1) {
        BooleanFunction h = pin(f, 0, uint32_t(1) << r);
        if (is_affine(h))
            throw internal_error("pinned restriction turned affine against the case analysis");
        return lift(f, classify(h), 0, uint32_t(1) << r, nullptr, &pin1);
    }

    // Does the whole upward cone above S lie in the support? Nothing to
    // report if so; otherwise the restriction above S yields a witness.
    std::optional<ClassificationWitness> upclose_check(const BooleanFunction& f,
                                                       const PinGadget& pin1,
                                                       uint32_t s_mask) {
        int k = f.arity();
        int n = k - popcount(s_mask);
        if (n == 0) throw internal_error("upward check on the full argument set");
        if (n == 1) return std::nullopt;
        BooleanFunction h = pin(f, 0, s_mask);
        auto tag = easy_k_member(symmetrise(h, opts.max_sym_arity));
        if (tag == EasyTag::one) return std::nullopt;
        if (tag == EasyTag::eq || tag == EasyTag::even)
            return lift(f, ClassificationWitness::of(equality_gadget_star(h, eopts())), 0,
                        s_mask, nullptr, &pin1);
        if (!tag)
            return lift(f, symmetric_fallback_search(h, opts), 0, s_mask, nullptr, &pin1);
        throw internal_error("restriction symmetrisation contradicts its endpoint values");
    }

    // Case analysis for a function whose symmetrisation is the all-ones
    // point. Either some argument pins to 1 keeping non-affineness, or a
    // pair of up-closed support sets exposes a hard single arc.
    ClassificationWitness allone_analysis(const BooleanFunction& f, const PinGadget& pin1) {
        int k = f.arity();
        std::vector<uint32_t> omega = f.support_sets();
        std::sort(omega.begin(), omega.end(), set_lex_less);

        int min_card = k + 1;
        for (uint32_t m : omega) min_card = std::min(min_card, popcount(m));
        if (min_card >= k - 1) {
            std::vector<uint32_t> rim;
            for (uint32_t m : omega)
                if (popcount(m) == k - 1) rim.push_back(m);
            if (rim.size() <= 1)
                throw internal_error("a semi-trivial function reached the all-ones route");
            uint32_t inter = rim[0] & rim[1];
            if (!inter) throw internal_error("two co-singleton sets always intersect");
            return pin_one_recurse(f, lowest_bit(inter), pin1);
        }

        auto min_member = [&](const std::vector<uint32_t>& sets) {
            uint32_t best = sets[0];
            for (uint32_t m : sets)
                if (popcount(m) < popcount(best) ||
                    (popcount(m) == popcount(best) && set_lex_less(m, best)))
                    best = m;
            return best;
        };
        uint32_t s = min_member(omega);
        if (auto w = upclose_check(f, pin1, s)) return *w;

        std::vector<uint32_t> psi;
        for (uint32_t m : omega)
            if (s & ~m) psi.push_back(m);
        if (psi.empty())
            throw internal_error("every support set above the minimum means semi-trivial");
        uint32_t t = min_member(psi);
        if (auto w = upclose_check(f, pin1, t)) return *w;

        if (popcount(t) == 1) {
            if (popcount(s) != 1)
                throw internal_error("a singleton obstruction needs a singleton minimum");
            int si = lowest_bit(s), ti = lowest_bit(t);
            int i = std::min(si, ti), j = std::max(si, ti);
            HardSimulationWitness w{TupleHypergraph::single_arc(k), {}, i, j,
                                    single_hyperarc_pair_witness(f, i + 1, j + 1)};
            confirm_hard(f, w, eopts());
            return ClassificationWitness::of(std::move(w));
        }
        if (s & t) return pin_one_recurse(f, lowest_bit(s & t), pin1);
        return pin_one_recurse(f, lowest_bit(t), pin1);
    }

    ClassificationWitness allone_route(const BooleanFunction& f) {
        PinGadget pin1 = pin_gadget_star(f, 1, eopts());
        return allone_analysis(f, pin1);
    }

    // Complement every argument, run the all-ones route, mirror the witness
    // back: equalities transfer unchanged, pins and cells swap their spins.
    ClassificationWitness allzero_route(const BooleanFunction& f) {
        BooleanFunction g = flip(f);
        if (is_affine(g)) throw internal_error("complementing arguments preserves affineness");
        ClassificationWitness sub = allone_route(g);
        if (sub.kind == ClassificationWitness::Kind::inconclusive) {
            sub.trace.push_back("stopped inside the argument-complemented function");
            return sub;
        }
        if (sub.kind == ClassificationWitness::Kind::perfect_equality) {
            PerfectEqualityWitness w = *sub.equality;
            confirm_equality(f, w, eopts());
            return ClassificationWitness::of(std::move(w));
        }
        HardSimulationWitness w = *sub.hard;
        std::swap(w.cond.pin0, w.cond.pin1);
        for (auto& cert : w.cond.certs) {
            if (cert.kind == SupportKind::pin0) cert.kind = SupportKind::pin1;
            else if (cert.kind == SupportKind::pin1) cert.kind = SupportKind::pin0;
        }
        w.g = BinaryWeightedFunction(w.g.g11, w.g.g10, w.g.g01, w.g.g00);
        confirm_hard(f, w, eopts());
        return ClassificationWitness::of(std::move(w));
    }

    // Restrictions of f to each support set, pinning the rest to 0. A
    // restriction that is not semi-trivial yields a witness; if every one is
    // semi-trivial the supports have a lattice structure to exploit.
    ClassificationWitness zero_route(const BooleanFunction& f) {
        ZeroStarWitness zsw = zero_star_witness(f, eopts());
        if (zsw.equality) {
            confirm_equality(f, *zsw.equality, eopts());
            return ClassificationWitness::of(*zsw.equality);
        }
        const PinGadget& pin0 = *zsw.pin0;
        const PinGadget& pin1 = *zsw.pin1;
        int k = f.arity();
        uint32_t full = (uint32_t(1) << k) - 1;
        std::vector<uint32_t> omega = f.support_sets();
        std::sort(omega.begin(), omega.end(), set_lex_less);

        std::vector<std::string> blocked;
        for (uint32_t w_set : omega) {
            int q = popcount(w_set);
            if (q <= 1) continue;
            BooleanFunction h = pin(f, full & ~w_set, 0);
            if (is_semi_trivial(h)) continue;
            uint32_t s0 = full & ~w_set;
            auto tag = easy_k_member(symmetrise(h, opts.max_sym_arity));
            ClassificationWitness res;
            if (!tag) {
                if (q == 2) {
                    if (!(h == fn_or2()))
                        throw internal_error("a two-argument restriction here must be OR");
                    HardSimulationWitness w{
                        lift_gadget(f, s0, 0, zsw.pin0, std::nullopt,
                                    TupleHypergraph::single_arc(2)),
                        {}, 0, 1,
                        BinaryWeightedFunction(Rat(0), Rat(1), Rat(1), Rat(1))};
                    confirm_hard(f, w, eopts());
                    return ClassificationWitness::of(std::move(w));
                }
                res = lift(f, symmetric_fallback_search(h, opts), s0, 0, &pin0, nullptr);
            } else if (*tag == EasyTag::odd) {
                res = lift(f, ClassificationWitness::of(equality_gadget_star(h, eopts())),
                           s0, 0, &pin0, nullptr);
            } else if (*tag == EasyTag::allone) {
                if (q < 3)
                    throw internal_error("a small all-ones restriction is semi-trivial");
                PinGadget pin1h = pin_gadget_star(h, 1, eopts());
                res = lift(f, allone_analysis(h, pin1h), s0, 0, &pin0, nullptr);
            } else {
                throw internal_error("restriction symmetrisation contradicts its endpoints");
            }
            if (res.kind == ClassificationWitness::Kind::inconclusive) {
                for (const auto& line : res.trace) blocked.push_back(line);
                continue;
            }
            return res;
        }
        if (!blocked.empty()) {
            ClassificationWitness out;
            out.kind = ClassificationWitness::Kind::inconclusive;
            out.trace = std::move(blocked);
            out.trace.push_back("some support-set restriction stayed unresolved, so the "
                                "lattice route is unavailable");
            return out;
        }
        return zero_lattice(f, pin0, pin1);
    }

    // Every restriction is semi-trivial. Work inside the largest support
    // set: its restriction is an upward cone, whose apex either sits inside
    // every support set (pin it) or is avoided by some set, which yields
    // either a two-arc equality gadget or another pinnable argument.
    ClassificationWitness zero_lattice(const BooleanFunction& f, const PinGadget& pin0,
                                       const PinGadget& pin1) {
        int k = f.arity();
        uint32_t full = (uint32_t(1) << k) - 1;
        std::vector<uint32_t> omega = f.support_sets();
        std::sort(omega.begin(), omega.end(), set_lex_less);

        uint32_t s = omega[0];
        for (uint32_t m : omega)
            if (popcount(m) > popcount(s) ||
                (popcount(m) == popcount(s) && set_lex_less(m, s)))
                s = m;
        BooleanFunction h = pin(f, full & ~s, 0);
        auto st = is_semi_trivial(h);
        if (!st || !st->upward)
            throw internal_error("the largest restriction must be an upward cone");
        std::vector<int> s_args = mask_bits(s);
        uint32_t apex = 0;
        for (size_t j = 0; j < s_args.size(); ++j)
            if (st->set_mask >> j & 1u) apex |= uint32_t(1) << s_args[j];
        if (!apex) throw internal_error("an upward cone through the origin is impossible");

        bool apex_everywhere = true;
        for (uint32_t m : omega) apex_everywhere = apex_everywhere && !(apex & ~m);
        if (apex_everywhere) return pin_one_recurse(f, lowest_bit(apex), pin1);

        std::vector<uint32_t> psi;
        for (uint32_t m : omega)
            if ((apex & ~m) && (m & ~s)) psi.push_back(m);
        if (psi.empty())
            throw internal_error("a set avoiding the apex must leave the largest set");
        uint32_t r = psi[0];
        auto better = [&](uint32_t a, uint32_t bb) {
            int a1 = popcount(apex & ~a), b1 = popcount(apex & ~bb);
            if (a1 != b1) return a1 < b1;
            int a2 = popcount(a & ~s), b2 = popcount(bb & ~s);
            if (a2 != b2) return a2 < b2;
            return set_lex_less(a, bb);
        };
        for (uint32_t m : psi)
            if (better(m, r)) r = m;

        uint32_t a_set = apex & ~r;
        uint32_t b_set = apex & r;
        uint32_t c_set = s & ~apex & ~r;
        uint32_t d_set = (s & ~apex) & r;
        uint32_t e_set = full & ~(s | r);
        uint32_t f_set = r & ~s;
        if (!a_set || !f_set)
            throw internal_error("the apex-void partition lost a mandatory part");

        BooleanFunction g2 = pin(f, c_set | e_set, b_set | d_set);
        std::vector<int> loc = mask_bits(a_set | f_set);
        uint32_t a_loc = 0, f_loc = 0;
        for (size_t j = 0; j < loc.size(); ++j) {
            if (a_set >> loc[j] & 1u) a_loc |= uint32_t(1) << j;
            if (f_set >> loc[j] & 1u) f_loc |= uint32_t(1) << j;
        }
        std::vector<uint32_t> omega2 = g2.support_sets();
        bool has_a = false, has_f = false, extra = false;
        for (uint32_t m : omega2) {
            if (m == a_loc) has_a = true;
            else if (m == f_loc) has_f = true;
            else extra = true;
        }
        if (!has_a || !has_f)
            throw internal_error("the reduced function lost its two mandatory supports");
        if (extra) return pin_one_recurse(f, lowest_bit(a_set), pin1);

        // Exactly two supports: two arcs differing in one slot, all other
        // positions pinned by side, force the distinguished pair equal.
        int a = lowest_bit(a_set);
        TupleHypergraph hh;
        hh.n = 2;
        hh.arity = k;
        std::vector<int> uid(size_t(k), -1);
        for (int p = 0; p < k; ++p)
            if (p != a) uid[size_t(p)] = hh.n++;
        std::vector<int> arc1(size_t(k), 0), arc2(size_t(k), 0);
        for (int p = 0; p < k; ++p) {
            arc1[size_t(p)] = p == a ? 0 : uid[size_t(p)];
            arc2[size_t(p)] = p == a ? 1 : uid[size_t(p)];
        }
        hh.arcs = {std::move(arc1), std::move(arc2)};
        for (int p = 0; p < k; ++p) {
            if (p == a) continue;
            uint32_t bit = uint32_t(1) << p;
            const PinGadget* pg = nullptr;
            if ((c_set | e_set) & bit) pg = &pin0;
            else if ((b_set | d_set) & bit) pg = &pin1;
            if (!pg) continue;
            std::vector<int> identify(size_t(pg->h.n), -1);
            identify[size_t(pg->vertex)] = uid[size_t(p)];
            hh = splice(hh, pg->h, identify).h;
        }
        PerfectEqualityWitness w{std::move(hh), 0, 1};
        confirm_equality(f, w, eopts());
        return ClassificationWitness::of(std::move(w));
    }
};

}  // namespace

ClassificationWitness classify_function(const BooleanFunction& f,
                                        const SynthesisOptions& opts) {
    Synthesizer s{opts, {}};
    return s.classify(f);
}

}  // namespace ccsp

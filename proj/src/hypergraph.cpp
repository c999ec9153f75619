#include "ccsp/hypergraph.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <thread>

namespace ccsp {

void TupleHypergraph::validate() const {
    if (n < 0) throw input_error("negative vertex count");
    if (arity < 1) throw input_error("hyperarc arity must be at least 1");
    for (const auto& arc : arcs) {
        if (int(arc.size()) != arity)
            throw input_error("hyperarc has " + std::to_string(arc.size()) +
                              " entries, expected " + std::to_string(arity));
        for (int v : arc)
            if (v < 0 || v >= n)
                throw input_error("hyperarc names vertex " + std::to_string(v) +
                                  " outside [0," + std::to_string(n) + ")");
        std::set<int> distinct(arc.begin(), arc.end());
        if (int(distinct.size()) != arity)
            throw input_error("hyperarc repeats a vertex");
    }
}

int TupleHypergraph::degree() const {
    std::vector<int> d(n, 0);
    for (const auto& arc : arcs)
        for (int v : arc) ++d[v];
    return d.empty() ? 0 : *std::max_element(d.begin(), d.end());
}

int degree(const TupleHypergraph& h) { return h.degree(); }

TupleHypergraph TupleHypergraph::single_arc(int k) {
    TupleHypergraph h;
    h.n = k;
    h.arity = k;
    h.arcs.emplace_back(k);
    std::iota(h.arcs.back().begin(), h.arcs.back().end(), 0);
    return h;
}

SpliceResult splice(const TupleHypergraph& host, const TupleHypergraph& gadget,
                    const std::vector<int>& identify) {
    if (host.arity != gadget.arity && !host.arcs.empty() && !gadget.arcs.empty())
        throw input_error("splice arity mismatch");
    if (int(identify.size()) != gadget.n)
        throw input_error("identify map must name every gadget vertex");

    SpliceResult out;
    out.h = host;
    if (out.h.arcs.empty()) out.h.arity = gadget.arity;
    out.where.assign(gadget.n, -1);
    std::set<int> taken;
    for (int i = 0; i < gadget.n; ++i) {
        int target = identify[i];
        if (target >= host.n)
            throw input_error("identify target " + std::to_string(target) +
                              " is not a host vertex");
        if (target >= 0) {
            if (!taken.insert(target).second)
                throw input_error("identify maps two gadget vertices onto host vertex " +
                                  std::to_string(target) +
                                  " (would repeat a vertex inside a hyperarc)");
            out.where[i] = target;
        }
    }
    for (int i = 0; i < gadget.n; ++i)
        if (out.where[i] < 0) out.where[i] = out.h.n++;
    for (const auto& arc : gadget.arcs) {
        std::vector<int> mapped;
        mapped.reserve(arc.size());
        for (int v : arc) mapped.push_back(out.where[v]);
        out.h.arcs.push_back(std::move(mapped));
    }
    out.h.validate();
    return out;
}

const char* support_kind_name(SupportKind k) {
    switch (k) {
        case SupportKind::pin0: return "pin0";
        case SupportKind::pin1: return "pin1";
        case SupportKind::equality: return "equality";
    }
    return "?";
}

void Conditioning::validate(int n) const {
    std::vector<int> seen(n, 0);
    auto mark = [&](const std::vector<int>& vs, const char* what) {
        for (int v : vs) {
            if (v < 0 || v >= n)
                throw input_error(std::string(what) + " names vertex " + std::to_string(v) +
                                  " outside [0," + std::to_string(n) + ")");
            if (seen[v]++)
                throw input_error("vertex " + std::to_string(v) +
                                  " appears twice across the conditioning");
        }
    };
    mark(pin0, "pin0");
    mark(pin1, "pin1");
    for (const auto& block : eq) mark(block, "equality block");
}

void Conditioning::normalize() {
    auto tidy = [](std::vector<int>& vs) {
        std::sort(vs.begin(), vs.end());
        vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    };
    tidy(pin0);
    tidy(pin1);

    // merge overlapping blocks first so each survivor is independent
    std::vector<std::vector<int>> blocks;
    for (auto block : eq) {
        tidy(block);
        if (block.empty()) continue;
        std::vector<int> merged = std::move(block);
        for (auto it = blocks.begin(); it != blocks.end();) {
            bool hit = std::any_of(it->begin(), it->end(), [&](int v) {
                return std::binary_search(merged.begin(), merged.end(), v);
            });
            if (hit) {
                merged.insert(merged.end(), it->begin(), it->end());
                tidy(merged);
                it = blocks.erase(it);
            } else {
                ++it;
            }
        }
        blocks.push_back(std::move(merged));
    }

    eq.clear();
    for (auto& block : blocks) {
        bool in0 = std::any_of(block.begin(), block.end(), [&](int v) {
            return std::binary_search(pin0.begin(), pin0.end(), v);
        });
        bool in1 = std::any_of(block.begin(), block.end(), [&](int v) {
            return std::binary_search(pin1.begin(), pin1.end(), v);
        });
        if (in0 && in1)
            throw input_error("instance unsatisfiable: an equality block meets both pin sets");
        if (in0) {
            pin0.insert(pin0.end(), block.begin(), block.end());
            tidy(pin0);
        } else if (in1) {
            pin1.insert(pin1.end(), block.begin(), block.end());
            tidy(pin1);
        } else if (block.size() >= 2) {
            eq.push_back(std::move(block));
        }
    }
    std::sort(eq.begin(), eq.end());
    for (int v : pin0)
        if (std::binary_search(pin1.begin(), pin1.end(), v))
            throw input_error("instance unsatisfiable: vertex pinned to both spins");
}

namespace {

// Vertex classes under the conditioning: every vertex follows its root,
// roots are either forced to a spin or free. Assignments enumerate only the
// free roots; expand() turns a free-root word into a full vertex mask.
struct ReducedSpace {
    uint32_t forced_mask = 0;
    std::vector<uint32_t> spread;  // per free root, mask of its member vertices
    bool identity = false;
    int n = 0;

    uint64_t count() const { return uint64_t(1) << spread.size(); }
    uint32_t expand(uint64_t idx) const {
        if (identity) return uint32_t(idx);
        uint32_t mask = forced_mask;
        for (size_t i = 0; i < spread.size(); ++i)
            if (idx >> i & 1ull) mask |= spread[i];
        return mask;
    }
};

ReducedSpace full_space(int n) {
    ReducedSpace s;
    s.n = n;
    s.identity = true;
    s.spread.assign(n, 0);
    for (int v = 0; v < n; ++v) s.spread[v] = uint32_t(1) << v;
    return s;
}

int find_root(std::vector<int>& parent, int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
}

// Throws the condition-(iv) error only for pin conflicts made unavoidable by
// equality chains; zero event mass is detected later by the enumeration.
ReducedSpace reduced_space(int n, const Conditioning& cond) {
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    for (const auto& block : cond.eq)
        for (size_t i = 1; i < block.size(); ++i) {
            int a = find_root(parent, block[0]), b = find_root(parent, block[i]);
            parent[b] = a;
        }
    std::vector<int> forced(n, -1);
    auto force = [&](const std::vector<int>& vs, int s) {
        for (int v : vs) {
            int r = find_root(parent, v);
            if (forced[r] >= 0 && forced[r] != s)
                throw input_error(
                    "conditioned event has probability zero (condition (iv)): "
                    "pins conflict through an equality block");
            forced[r] = s;
        }
    };
    force(cond.pin0, 0);
    force(cond.pin1, 1);

    ReducedSpace s;
    s.n = n;
    std::vector<int> slot(n, -1);
    for (int v = 0; v < n; ++v) {
        int r = find_root(parent, v);
        if (forced[r] == 1) {
            s.forced_mask |= uint32_t(1) << v;
        } else if (forced[r] < 0) {
            if (slot[r] < 0) {
                slot[r] = int(s.spread.size());
                s.spread.push_back(0);
            }
            s.spread[slot[r]] |= uint32_t(1) << v;
        }
    }
    return s;
}

uint32_t arc_index(const std::vector<int>& arc, uint32_t assign) {
    uint32_t t = 0;
    for (int v : arc) t = (t << 1) | (assign >> v & 1u);
    return t;
}

uint32_t bucket_index(const std::vector<int>& verts, uint32_t assign) {
    uint32_t b = 0;
    for (int v : verts) b = (b << 1) | (assign >> v & 1u);
    return b;
}

struct BucketSums {
    std::vector<uint64_t> counts;  // Boolean tables
    std::vector<Rat> weights;      // general tables

    explicit BucketSums(size_t buckets, bool boolean)
        : counts(boolean ? buckets : 0, 0), weights(boolean ? 0 : buckets, Rat(0)) {}

    void add(BucketSums&& o) {
        for (size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
        for (size_t i = 0; i < weights.size(); ++i) weights[i] += o.weights[i];
    }
    Rat total() const {
        if (!counts.empty()) {
            uint64_t z = 0;
            for (uint64_t c : counts) z += c;
            return Rat(Int(z));
        }
        Rat z(0);
        for (const auto& w : weights) z += w;
        return z;
    }
    Rat bucket(size_t i) const {
        return counts.empty() ? weights[i] : Rat(Int(counts[i]));
    }
    size_t size() const { return counts.empty() ? weights.size() : counts.size(); }
};

void sum_range(const BooleanFunction& f, const std::vector<std::vector<int>>& arcs,
               const ReducedSpace& space, const std::vector<int>& verts,
               uint64_t lo, uint64_t hi, BucketSums& out) {
    if (f.is_boolean()) {
        for (uint64_t idx = lo; idx < hi; ++idx) {
            uint32_t assign = space.expand(idx);
            bool ok = true;
            for (const auto& arc : arcs)
                if (!f.sat(arc_index(arc, assign))) { ok = false; break; }
            if (ok) ++out.counts[bucket_index(verts, assign)];
        }
        return;
    }
    for (uint64_t idx = lo; idx < hi; ++idx) {
        uint32_t assign = space.expand(idx);
        Rat w(1);
        bool zero = false;
        for (const auto& arc : arcs) {
            const Rat& v = f.value(arc_index(arc, assign));
            if (sgn(v) == 0) { zero = true; break; }
            w *= v;
        }
        if (!zero) out.weights[bucket_index(verts, assign)] += w;
    }
}

BucketSums enumerate(const BooleanFunction& f, const TupleHypergraph& h,
                     const ReducedSpace& space, const std::vector<int>& verts,
                     const EnumOptions& opts) {
    h.validate();
    if (!h.arcs.empty() && h.arity != f.arity())
        throw input_error("hyperarc arity " + std::to_string(h.arity) +
                          " does not match function arity " + std::to_string(f.arity()));
    if (h.n > opts.max_vertices)
        throw resource_error("hypergraph has " + std::to_string(h.n) +
                             " vertices, enumeration cap is " +
                             std::to_string(opts.max_vertices));
    for (int v : verts)
        if (v < 0 || v >= h.n)
            throw input_error("distinguished vertex " + std::to_string(v) + " out of range");

    const uint64_t total = space.count();
    BucketSums out(size_t(1) << verts.size(), f.is_boolean());
    const int threads = std::max(1, opts.threads);
    if (threads == 1 || total < (uint64_t(1) << 16)) {
        sum_range(f, h.arcs, space, verts, 0, total, out);
        return out;
    }
    std::vector<BucketSums> parts(threads, BucketSums(out.size(), f.is_boolean()));
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) {
        uint64_t lo = total / threads * i + std::min<uint64_t>(i, total % threads);
        uint64_t hi = lo + total / threads + (uint64_t(i) < total % threads ? 1 : 0);
        pool.emplace_back([&, i, lo, hi] {
            sum_range(f, h.arcs, space, verts, lo, hi, parts[i]);
        });
    }
    for (auto& t : pool) t.join();
    for (auto& p : parts) out.add(std::move(p));
    return out;
}

MarginalTable to_marginals(const BucketSums& sums, const std::vector<int>& verts) {
    Rat z = sums.total();
    MarginalTable m;
    m.verts = verts;
    m.probs.reserve(sums.size());
    for (size_t i = 0; i < sums.size(); ++i) m.probs.push_back(sums.bucket(i) / z);
    return m;
}

}  // namespace

Rat partition_function(const BooleanFunction& f, const TupleHypergraph& h,
                       const EnumOptions& opts) {
    return enumerate(f, h, full_space(h.n), {}, opts).total();
}

MarginalTable marginals(const BooleanFunction& f, const TupleHypergraph& h,
                        const std::vector<int>& verts, const EnumOptions& opts) {
    auto sums = enumerate(f, h, full_space(h.n), verts, opts);
    if (sgn(sums.total()) == 0) throw input_error("unsatisfiable gadget: Z = 0");
    return to_marginals(sums, verts);
}

MarginalTable cond_marginals(const BooleanFunction& f, const TupleHypergraph& h,
                             const Conditioning& cond, const std::vector<int>& verts,
                             const EnumOptions& opts) {
    cond.validate(h.n);
    if (cond.empty()) return marginals(f, h, verts, opts);
    auto sums = enumerate(f, h, reduced_space(h.n, cond), verts, opts);
    if (sgn(sums.total()) == 0)
        throw input_error("conditioned event has probability zero (condition (iv))");
    return to_marginals(sums, verts);
}

bool check_support(const BooleanFunction& f, const SupportCertificate& cert,
                   const EnumOptions& opts) {
    if (cert.kind == SupportKind::equality) {
        if (cert.verts.size() != 2 || cert.verts[0] == cert.verts[1]) return false;
        auto m = marginals(f, cert.gadget, cert.verts, opts);
        return m.at(0b00) == m.at(0b11) && m.at(0b00) + m.at(0b11) > m.at(0b01) + m.at(0b10);
    }
    if (cert.verts.size() != 1) return false;
    auto m = marginals(f, cert.gadget, cert.verts, opts);
    int s = cert.kind == SupportKind::pin1 ? 1 : 0;
    return m.at(s) > m.at(1 - s);
}

RealisationQuery RealisationQuery::pinning(int s, Rat eps) {
    RealisationQuery q;
    q.kind = Kind::pinning;
    q.spin = s;
    q.eps = std::move(eps);
    return q;
}

RealisationQuery RealisationQuery::equality(Rat eps) {
    RealisationQuery q;
    q.kind = Kind::equality;
    q.eps = std::move(eps);
    return q;
}

RealisationReport verify_realisation(const BooleanFunction& f, const TupleHypergraph& h,
                                     const RealisationQuery& query, const EnumOptions& opts) {
    if (sgn(query.eps) < 0) throw input_error("negative epsilon");
    if (query.kind == RealisationQuery::Kind::pinning && query.spin != 0 && query.spin != 1)
        throw input_error("pinning spin must be 0 or 1");

    // One sweep accumulating per-vertex and per-pair statistics of the
    // satisfying assignments; scanning candidates afterwards is then free.
    h.validate();
    if (!h.arcs.empty() && h.arity != f.arity())
        throw input_error("hyperarc arity does not match function arity");
    if (h.n > opts.max_vertices)
        throw resource_error("hypergraph exceeds the enumeration cap");

    const int n = h.n;
    std::vector<Rat> z_one(n, Rat(0));                // weight with sigma_v = 1
    std::vector<std::vector<Rat>> z00(n), z11(n);     // pair diagonals, x < y
    for (int x = 0; x < n; ++x) {
        z00[x].assign(n, Rat(0));
        z11[x].assign(n, Rat(0));
    }
    Rat z(0);
    const bool pairs = query.kind == RealisationQuery::Kind::equality;
    for (uint64_t assign = 0; assign < (uint64_t(1) << n); ++assign) {
        Rat w(1);
        bool zero = false;
        for (const auto& arc : h.arcs) {
            const Rat& v = f.value(arc_index(arc, uint32_t(assign)));
            if (sgn(v) == 0) { zero = true; break; }
            w *= v;
        }
        if (zero) continue;
        z += w;
        for (int v = 0; v < n; ++v)
            if (assign >> v & 1ull) z_one[v] += w;
        if (pairs)
            for (int x = 0; x < n; ++x)
                for (int y = x + 1; y < n; ++y) {
                    bool bx = assign >> x & 1ull, by = assign >> y & 1ull;
                    if (!bx && !by) z00[x][y] += w;
                    if (bx && by) z11[x][y] += w;
                }
    }
    if (sgn(z) == 0) throw input_error("unsatisfiable gadget: Z = 0");

    RealisationReport report;
    bool have = false;
    Rat bound;
    if (query.kind == RealisationQuery::Kind::pinning) {
        bound = Rat(1) - query.eps;
        for (int v = 0; v < n; ++v) {
            Rat p = query.spin == 1 ? Rat(z_one[v] / z) : Rat((z - z_one[v]) / z);
            if (!have || p > report.achieved) {
                have = true;
                report.achieved = p;
                report.verts = {v};
            }
        }
    } else {
        bound = (Rat(1) - query.eps) / 2;
        for (int x = 0; x < n; ++x)
            for (int y = x + 1; y < n; ++y) {
                Rat p = std::min(z00[x][y], z11[x][y]) / z;
                if (!have || p > report.achieved) {
                    have = true;
                    report.achieved = p;
                    report.verts = {x, y};
                }
            }
    }
    if (!have) throw input_error("hypergraph has too few vertices for the query");
    report.slack = report.achieved - bound;
    report.ok = sgn(report.slack) >= 0;
    return report;
}

bool verify_simulation(const BooleanFunction& f, const TupleHypergraph& h,
                       const Conditioning& cond, int u, int v,
                       const BinaryWeightedFunction& g, const EnumOptions& opts) {
    if (u == v) throw input_error("simulation needs two distinct vertices");
    if (sgn(g.total()) <= 0) throw input_error("simulation target is identically zero");
    auto m = cond_marginals(f, h, cond, {u, v}, opts);
    Rat z = g.total();
    return m.at(0b00) == g.g00 / z && m.at(0b01) == g.g01 / z &&
           m.at(0b10) == g.g10 / z && m.at(0b11) == g.g11 / z;
}

}  // namespace ccsp

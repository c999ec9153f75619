#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>

#include "ccsp/hypergraph.hpp"

using namespace ccsp;

namespace {

TupleHypergraph graph(int n, int k, std::vector<std::vector<int>> arcs) {
    TupleHypergraph h;
    h.n = n;
    h.arity = k;
    h.arcs = std::move(arcs);
    h.validate();
    return h;
}

TupleHypergraph relabel(const TupleHypergraph& h, const std::vector<int>& perm) {
    TupleHypergraph out = h;
    for (auto& arc : out.arcs)
        for (int& v : arc) v = perm[v];
    return out;
}

TupleHypergraph implies_equalizer() { return graph(2, 2, {{0, 1}, {1, 0}}); }

// the arity-2 parity construction: windows (v1,v2) and (v2,v3), all orders
TupleHypergraph xor_parity_gadget() {
    return graph(3, 2, {{0, 1}, {1, 0}, {1, 2}, {2, 1}});
}

}  // namespace

TEST_CASE("validate rejects malformed graphs") {
    CHECK_THROWS_AS(graph(2, 2, {{0, 0}}), input_error);
    CHECK_THROWS_AS(graph(2, 2, {{0, 2}}), input_error);
    CHECK_THROWS_AS(graph(3, 2, {{0, 1, 2}}), input_error);
    CHECK_THROWS_AS(graph(1, 0, {}), input_error);
}

TEST_CASE("degree counts slot occurrences") {
    CHECK(TupleHypergraph::single_arc(3).degree() == 1);
    CHECK(xor_parity_gadget().degree() == 4);
    CHECK(graph(3, 2, {{0, 1}, {0, 2}, {0, 1}}).degree() == 3);
}

TEST_CASE("partition function anchored values") {
    // the introductory not-all-equal instance: x,y,a,b with two arcs
    auto h = graph(4, 3, {{0, 2, 3}, {1, 2, 3}});
    CHECK(partition_function(fn_nae3(), h) == 10);

    CHECK(partition_function(fn_nae3(), graph(3, 3, {})) == 8);
    CHECK(partition_function(fn_implies(), TupleHypergraph::single_arc(2)) == 3);
    CHECK(partition_function(fn_zero(2), TupleHypergraph::single_arc(2)) == 0);
}

TEST_CASE("partition function on weighted tables") {
    auto w = BooleanFunction(2, {make_rat(1, 2), Rat(1), Rat(0), Rat(3)});
    // single arc: 1/2 + 1 + 0 + 3
    CHECK(partition_function(w, TupleHypergraph::single_arc(2)) == make_rat(9, 2));
    // two parallel arcs square each value
    auto h2 = graph(2, 2, {{0, 1}, {0, 1}});
    CHECK(partition_function(w, h2) == make_rat(1, 4) + Rat(1) + Rat(9));
}

TEST_CASE("marginals anchored values") {
    auto nae = graph(4, 3, {{0, 2, 3}, {1, 2, 3}});
    auto m = marginals(fn_nae3(), nae, {0, 1});
    CHECK(m.at(0b00) == make_rat(3, 10));
    CHECK(m.at(0b01) == make_rat(2, 10));
    CHECK(m.at(0b10) == make_rat(2, 10));
    CHECK(m.at(0b11) == make_rat(3, 10));

    auto or_arc = marginals(fn_or2(), TupleHypergraph::single_arc(2), {0, 1});
    CHECK(or_arc.at(0b00) == 0);
    CHECK(or_arc.at(0b01) == make_rat(1, 3));
    CHECK(or_arc.at(0b10) == make_rat(1, 3));
    CHECK(or_arc.at(0b11) == make_rat(1, 3));

    auto xorg = marginals(fn_xor2(), xor_parity_gadget(), {0, 2});
    CHECK(xorg.at(0b00) == make_rat(1, 2));
    CHECK(xorg.at(0b01) == 0);
    CHECK(xorg.at(0b10) == 0);
    CHECK(xorg.at(0b11) == make_rat(1, 2));

    auto imp = marginals(fn_implies(), TupleHypergraph::single_arc(2), {0, 1});
    CHECK(imp.at(0b00) + imp. at(0b01) == make_rat(2, 3));  // P(v1 = 0)
    CHECK(imp.at(0b01) + imp.at(0b11) == make_rat(2, 3));   // P(v2 = 1)

    CHECK_THROWS_AS(marginals(fn_zero(2), TupleHypergraph::single_arc(2), {0}), input_error);
}

TEST_CASE("marginal probabilities sum to one and respect vertex order") {
    auto h = graph(4, 3, {{0, 2, 3}, {1, 2, 3}});
    auto m = marginals(fn_nae3(), h, {2, 0});
    Rat sum(0);
    for (const auto& p : m.probs) sum += p;
    CHECK(sum == 1);
    auto swapped = marginals(fn_nae3(), h, {0, 2});
    CHECK(m.at(0b01) == swapped.at(0b10));
    CHECK(m.at(0b00) == swapped.at(0b00));
}

TEST_CASE("conditional marginals") {
    auto arc = TupleHypergraph::single_arc(2);

    Conditioning pin2;
    pin2.pin1 = {};
    pin2.pin0 = {1};
    auto m = cond_marginals(fn_implies(), arc, pin2, {0});
    CHECK(m.at(0) == 1);  // x -> y with y = 0 forces x = 0

    Conditioning eq;
    eq.eq = {{0, 1}};
    auto e = cond_marginals(fn_or2(), arc, eq, {0, 1});
    CHECK(e.at(0b00) == 0);
    CHECK(e.at(0b11) == 1);

    Conditioning none;
    CHECK(cond_marginals(fn_nae3(), graph(3, 3, {{0, 1, 2}}), none, {0, 1}) ==
          marginals(fn_nae3(), graph(3, 3, {{0, 1, 2}}), {0, 1}));
}

TEST_CASE("conditioning validation and condition (iv)") {
    auto arc = TupleHypergraph::single_arc(2);
    Conditioning overlap;
    overlap.pin0 = {0};
    overlap.pin1 = {0};
    CHECK_THROWS_AS(cond_marginals(fn_or2(), arc, overlap, {1}), input_error);

    Conditioning chained;  // 0 = 1 but pinned apart
    chained.pin0 = {0};
    chained.pin1 = {1};
    chained.eq = {{0, 1}};
    CHECK_THROWS_AS(cond_marginals(fn_or2(), arc, chained, {0}), input_error);

    Conditioning dead;  // allone never lets a vertex be 0
    dead.pin0 = {0};
    CHECK_THROWS_AS(cond_marginals(fn_allone(2), arc, dead, {1}), input_error);

    Conditioning oob;
    oob.pin0 = {7};
    CHECK_THROWS_AS(cond_marginals(fn_or2(), arc, oob, {0}), input_error);
}

TEST_CASE("conditioning normalize folds and merges") {
    Conditioning c;
    c.pin0 = {0};
    c.eq = {{1, 2}, {2, 3}, {4, 5}, {6}};
    c.normalize();
    CHECK(c.eq == std::vector<std::vector<int>>{{1, 2, 3}, {4, 5}});

    Conditioning fold;
    fold.pin1 = {0};
    fold.eq = {{0, 4}, {2, 3}};
    fold.normalize();
    CHECK(fold.pin1 == std::vector<int>{0, 4});
    CHECK(fold.eq == std::vector<std::vector<int>>{{2, 3}});

    Conditioning clash;
    clash.pin0 = {0};
    clash.pin1 = {1};
    clash.eq = {{0, 1}};
    CHECK_THROWS_AS(clash.normalize(), input_error);
}

TEST_CASE("splice identifications") {
    auto base = TupleHypergraph::single_arc(2);
    auto two = splice(base, TupleHypergraph::single_arc(2), {1, -1});
    CHECK(two.h.n == 3);
    CHECK(two.h.arcs.size() == 2);
    CHECK(two.where == std::vector<int>{1, 2});
    CHECK(two.h.arcs[1] == std::vector<int>{1, 2});
    CHECK(two.h.degree() == 2);

    CHECK_THROWS_AS(splice(base, TupleHypergraph::single_arc(2), {0, 0}), input_error);
    CHECK_THROWS_AS(splice(base, TupleHypergraph::single_arc(2), {5, -1}), input_error);
    CHECK_THROWS_AS(splice(base, TupleHypergraph::single_arc(2), {0}), input_error);
}

TEST_CASE("partition function invariances") {
    std::mt19937 rng(4242);
    auto h = graph(5, 3, {{0, 1, 2}, {2, 3, 4}, {4, 0, 1}});
    auto z = partition_function(fn_nae3(), h);
    std::vector<int> perm{0, 1, 2, 3, 4};
    for (int trial = 0; trial < 10; ++trial) {
        std::shuffle(perm.begin(), perm.end(), rng);
        CHECK(partition_function(fn_nae3(), relabel(h, perm)) == z);
    }
    auto reordered = h;
    std::swap(reordered.arcs[0], reordered.arcs[2]);
    CHECK(partition_function(fn_nae3(), reordered) == z);
}

TEST_CASE("disjoint union multiplies partition functions") {
    auto a = graph(3, 3, {{0, 1, 2}});
    auto b = graph(4, 3, {{0, 2, 3}, {1, 2, 3}});
    auto both = splice(a, b, {-1, -1, -1, -1}).h;
    CHECK(partition_function(fn_nae3(), both) ==
          partition_function(fn_nae3(), a) * partition_function(fn_nae3(), b));
}

TEST_CASE("threaded enumeration matches serial") {
    auto h = graph(17, 3, {{0, 1, 2}, {3, 4, 5}, {6, 7, 8}, {9, 10, 11},
                           {12, 13, 14}, {14, 15, 16}, {0, 8, 16}});
    EnumOptions serial;
    EnumOptions wide;
    wide.threads = 4;
    CHECK(partition_function(fn_nae3(), h, serial) == partition_function(fn_nae3(), h, wide));
    CHECK(marginals(fn_nae3(), h, {0, 16}, serial) == marginals(fn_nae3(), h, {0, 16}, wide));
}

TEST_CASE("enumeration cap raises resource errors") {
    TupleHypergraph big;
    big.n = 30;
    big.arity = 2;
    CHECK_THROWS_AS(partition_function(fn_or2(), big), resource_error);
}

TEST_CASE("verify_realisation pinning") {
    auto all1 = graph(2, 2, {{0, 1}, {1, 0}});
    auto rep = verify_realisation(fn_allone(2), all1, RealisationQuery::pinning(1));
    CHECK(rep.ok);
    CHECK(rep.achieved == 1);
    CHECK(rep.verts == std::vector<int>{0});

    auto imp = verify_realisation(fn_implies(), TupleHypergraph::single_arc(2),
                                  RealisationQuery::pinning(0));
    CHECK(!imp.ok);  // best is 2/3 < 1
    CHECK(imp.achieved == make_rat(2, 3));
    CHECK(imp.verts == std::vector<int>{0});
    auto imp_loose = verify_realisation(fn_implies(), TupleHypergraph::single_arc(2),
                                        RealisationQuery::pinning(0, make_rat(1, 3)));
    CHECK(imp_loose.ok);
    CHECK(imp_loose.slack == 0);
}

TEST_CASE("verify_realisation equality") {
    auto eq = verify_realisation(fn_implies(), implies_equalizer(),
                                 RealisationQuery::equality());
    CHECK(eq.ok);
    CHECK(eq.achieved == make_rat(1, 2));
    CHECK(eq.verts == std::vector<int>{0, 1});

    auto bad = verify_realisation(fn_or2(), TupleHypergraph::single_arc(2),
                                  RealisationQuery::equality());
    CHECK(!bad.ok);
    CHECK(bad.achieved == 0);  // min(P00, P11) = min(0, 1/3)
}

TEST_CASE("verify_simulation") {
    Conditioning none;
    CHECK(verify_simulation(fn_or2(), TupleHypergraph::single_arc(2), none, 0, 1,
                            BinaryWeightedFunction(Rat(0), Rat(1), Rat(1), Rat(1))));
    CHECK(verify_simulation(fn_xor2(), xor_parity_gadget(), none, 0, 2,
                            BinaryWeightedFunction(Rat(1), Rat(0), Rat(0), Rat(1))));
    CHECK(!verify_simulation(fn_implies(), TupleHypergraph::single_arc(2), none, 0, 1,
                             BinaryWeightedFunction(Rat(1), Rat(2), Rat(2), Rat(1))));
    CHECK(verify_simulation(fn_implies(), TupleHypergraph::single_arc(2), none, 0, 1,
                            BinaryWeightedFunction(Rat(2), Rat(2), Rat(0), Rat(2))));
    CHECK_THROWS_AS(verify_simulation(fn_or2(), TupleHypergraph::single_arc(2), none, 0, 0,
                                      BinaryWeightedFunction(Rat(1), Rat(0), Rat(0), Rat(1))),
                    input_error);
    CHECK_THROWS_AS(verify_simulation(fn_or2(), TupleHypergraph::single_arc(2), none, 0, 1,
                                      BinaryWeightedFunction()),
                    input_error);
}

TEST_CASE("support certificates") {
    SupportCertificate pin0{SupportKind::pin0, TupleHypergraph::single_arc(2), {0}};
    CHECK(check_support(fn_implies(), pin0));
    SupportCertificate pin1{SupportKind::pin1, TupleHypergraph::single_arc(2), {1}};
    CHECK(check_support(fn_implies(), pin1));
    SupportCertificate wrong{SupportKind::pin0, TupleHypergraph::single_arc(2), {1}};
    CHECK(!check_support(fn_implies(), wrong));
    SupportCertificate eq{SupportKind::equality, implies_equalizer(), {0, 1}};
    CHECK(check_support(fn_implies(), eq));
    SupportCertificate uneq{SupportKind::equality, TupleHypergraph::single_arc(2), {0, 1}};
    CHECK(!check_support(fn_or2(), uneq));
}

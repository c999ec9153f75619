#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <set>
#include <vector>

#include "ccsp/boolfn.hpp"
#include "ccsp/csp.hpp"
#include "ccsp/gadgets.hpp"
#include "ccsp/hypergraph.hpp"

using namespace ccsp;

namespace {

CspInstance single(const BooleanFunction& f, int n, std::vector<int> vars) {
    CspInstance I;
    I.n = n;
    I.language = {f};
    I.constraints = {{0, std::move(vars)}};
    return I;
}

// Oracle: count independent sets by testing all vertex subsets.
Int independent_sets_by_subsets(const BipartiteGraph& g) {
    int n = g.nl + g.nr;
    Int count = 0;
    for (uint32_t s = 0; s < (1u << n); ++s) {
        bool ok = true;
        for (auto [l, r] : g.edges)
            if ((s >> l & 1u) && (s >> (g.nl + r) & 1u)) { ok = false; break; }
        if (ok) ++count;
    }
    return count;
}

}  // namespace

TEST_CASE("instance validation rejects malformed inputs") {
    CspInstance I;
    I.n = 2;
    I.language = {fn_or2()};
    I.constraints = {{0, {0, 1}}};
    CHECK_NOTHROW(I.validate());

    CspInstance bad_fn = I;
    bad_fn.constraints[0].fn = 1;
    CHECK_THROWS_AS(bad_fn.validate(), input_error);

    CspInstance bad_var = I;
    bad_var.constraints[0].vars = {0, 2};
    CHECK_THROWS_AS(bad_var.validate(), input_error);

    CspInstance bad_arity = I;
    bad_arity.constraints[0].vars = {0};
    CHECK_THROWS_AS(bad_arity.validate(), input_error);

    CspInstance repeat = I;
    repeat.constraints[0].vars = {0, 0};
    CHECK_NOTHROW(repeat.validate());
    CHECK(!is_repeat_free(repeat));
    repeat.repeat_free = true;
    CHECK_THROWS_AS(repeat.validate(), input_error);

    CspInstance bad_names = I;
    bad_names.names = {"or", "extra"};
    CHECK_THROWS_AS(bad_names.validate(), input_error);
}

TEST_CASE("degree counts occurrences across all constraint slots") {
    CspInstance I;
    I.n = 3;
    I.language = {fn_implies()};
    I.constraints = {{0, {0, 1}}, {0, {1, 2}}, {0, {1, 1}}};
    CHECK(I.degree_of(0) == 1);
    CHECK(I.degree_of(1) == 4);
    CHECK(I.degree_of(2) == 1);
    CHECK(I.degree() == 4);
}

TEST_CASE("extension_counts enumerates satisfying extensions exactly") {
    auto I = single(fn_or2(), 2, {0, 1});
    CHECK(extension_counts(I, {0}) == std::vector<Rat>{Rat(1), Rat(2)});
    CHECK(extension_counts(I, {0, 1}) == std::vector<Rat>{Rat(0), Rat(1), Rat(1), Rat(1)});
    CHECK(extension_counts(I, {1, 0}) == std::vector<Rat>{Rat(0), Rat(1), Rat(1), Rat(1)});
    CHECK(extension_counts(I, {}) == std::vector<Rat>{Rat(3)});
    CHECK(brute_count(I) == Rat(3));
    CHECK_THROWS_AS(extension_counts(I, {2}), input_error);
}

TEST_CASE("gauss_count agrees with brute force on affine instances") {
    auto I = single(fn_even(3), 3, {0, 1, 2});
    CHECK(brute_count(I) == Rat(4));
    CHECK(gauss_count(I) == Rat(4));

    // repeated variables collapse columns by parity
    auto J = single(fn_even(3), 2, {0, 0, 1});
    CHECK(brute_count(J) == Rat(2));
    CHECK(gauss_count(J) == Rat(2));

    CspInstance K;
    K.n = 3;
    K.language = {fn_equality(2)};
    K.constraints = {{0, {0, 1}}, {0, {1, 2}}};
    CHECK(brute_count(K) == Rat(2));
    CHECK(gauss_count(K) == Rat(2));

    // an unsatisfiable system
    CspInstance U;
    U.n = 1;
    U.language = {fn_delta(0), fn_delta(1)};
    U.constraints = {{0, {0}}, {1, {0}}};
    CHECK(brute_count(U) == Rat(0));
    CHECK(gauss_count(U) == Rat(0));

    std::mt19937 rng(2026);
    std::vector<BooleanFunction> pool = {fn_even(3), fn_odd(2),   fn_equality(2), fn_delta(0),
                                         fn_delta(1), fn_xor2(),  fn_even(1),     fn_odd(3)};
    for (int trial = 0; trial < 30; ++trial) {
        CspInstance R;
        R.n = 2 + int(rng() % 9);
        R.language = pool;
        int m = 1 + int(rng() % 5);
        for (int c = 0; c < m; ++c) {
            int fi = int(rng() % pool.size());
            std::vector<int> vars;
            for (int j = 0; j < pool[size_t(fi)].arity(); ++j) vars.push_back(int(rng() % R.n));
            R.constraints.push_back({fi, vars});
        }
        CHECK(gauss_count(R) == brute_count(R));
    }
}

TEST_CASE("gauss_count names the offending non-affine constraint") {
    CspInstance I;
    I.n = 2;
    I.language = {fn_xor2(), fn_or2()};
    I.names = {"xor", "or"};
    I.constraints = {{0, {0, 1}}, {1, {0, 1}}};
    CHECK_THROWS_WITH_AS(gauss_count(I), "constraint 1: function or is not affine", input_error);
}

TEST_CASE("classify_language applies the trichotomy") {
    auto c1 = classify_language({fn_even(3)});
    CHECK(c1.verdict == LanguageClassification::Verdict::fp_affine);
    CHECK(c1.culprit_affine == -1);
    CHECK(std::string(verdict_name(c1.verdict)) == "fp");

    auto c2 = classify_language({fn_implies()});
    CHECK(c2.verdict == LanguageClassification::Verdict::bis_equivalent);
    CHECK(c2.culprit_affine == 0);
    CHECK(c2.culprit_im2 == -1);
    CHECK(std::string(verdict_name(c2.verdict)) == "bis-equivalent");

    auto c3 = classify_language({fn_or2()});
    CHECK(c3.verdict == LanguageClassification::Verdict::np_hard);
    CHECK(c3.culprit_affine == 0);
    CHECK(c3.culprit_im2 == 0);
    REQUIRE(c3.product_evidence.has_value());
    CHECK(*c3.product_evidence == fn_or2());
    CHECK(std::string(verdict_name(c3.verdict)) == "np-hard");

    // hardness witnessed only by pairing two different culprits
    auto c4 = classify_language({fn_xor2(), fn_implies()});
    CHECK(c4.verdict == LanguageClassification::Verdict::np_hard);
    CHECK(c4.culprit_affine == 1);
    CHECK(c4.culprit_im2 == 0);
    REQUIRE(c4.product_evidence.has_value());
    CHECK(c4.product_evidence->arity() == 4);
    CHECK(!is_affine(*c4.product_evidence));
    CHECK(!is_in_im2(*c4.product_evidence));
    CHECK(c4.note == "product of functions 1 and 0 is neither affine nor in IM_2");

    // an empty language is vacuously affine
    CHECK(classify_language({}).verdict == LanguageClassification::Verdict::fp_affine);
}

TEST_CASE("hypergraphs and repeat-free instances convert both ways") {
    auto h = TupleHypergraph::single_arc(3);
    auto inst = instance_from_hypergraph(fn_nae3(), h);
    CHECK(inst.n == 3);
    CHECK(inst.repeat_free);
    CHECK(inst.constraints.size() == 1);
    CHECK(hypergraph_from_instance(inst) == h);

    TupleHypergraph g;
    g.n = 4;
    g.arity = 2;
    g.arcs = {{0, 1}, {1, 2}, {3, 2}};
    auto inst2 = instance_from_hypergraph(fn_implies(), g);
    CHECK(hypergraph_from_instance(inst2) == g);
    CHECK(brute_count(inst2) == partition_function(fn_implies(), g));

    CspInstance multi;
    multi.n = 2;
    multi.language = {fn_or2(), fn_xor2()};
    multi.constraints = {{0, {0, 1}}, {1, {0, 1}}};
    CHECK_THROWS_AS(hypergraph_from_instance(multi), input_error);
}

TEST_CASE("count_independent_sets is exact") {
    BipartiteGraph single_edge{1, 1, {{0, 0}}};
    CHECK(count_independent_sets(single_edge) == 3);

    BipartiteGraph isolated{1, 2, {}};
    CHECK(count_independent_sets(isolated) == 8);

    BipartiteGraph path3{2, 1, {{0, 0}, {1, 0}}};
    CHECK(count_independent_sets(path3) == 5);

    std::mt19937 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        BipartiteGraph g;
        g.nl = 1 + int(rng() % 4);
        g.nr = 1 + int(rng() % 4);
        std::set<std::pair<int, int>> edges;
        int m = int(rng() % 7);
        for (int e = 0; e < m; ++e) edges.insert({int(rng() % g.nl), int(rng() % g.nr)});
        g.edges.assign(edges.begin(), edges.end());
        CHECK(count_independent_sets(g) == independent_sets_by_subsets(g));
    }

    BipartiteGraph bad{1, 1, {{0, 1}}};
    CHECK_THROWS_AS(count_independent_sets(bad), input_error);
}

TEST_CASE("bis_reduction verifies the product identity on small graphs") {
    SimGadget isim{TupleHypergraph::single_arc(2), {}, {0, 1}};
    BipartiteGraph path3{2, 1, {{0, 0}, {1, 0}}};
    auto red = bis_reduction(path3, fn_implies(), isim);
    CHECK(red.verified);
    CHECK(red.independent_sets == 5);
    CHECK(red.z_gadget == Rat(3));
    CHECK(red.z_total == Rat(5));
    CHECK(red.h.n == 3);
    CHECK(red.degree == 2);
    // z_total = IS * (z_gadget / 3)^|E|
    Rat ratio = Rat(red.z_gadget / Rat(3));
    CHECK(red.z_total == Rat(Rat(red.independent_sets) * ratio * ratio));

    // over the enumeration cap the reduction is returned unverified
    BipartiteGraph wide{8, 8, {}};
    for (int l = 0; l < 8; ++l)
        for (int r = 0; r < 8; ++r) wide.edges.push_back({l, r});
    EnumOptions tiny;
    tiny.max_vertices = 4;
    auto un = bis_reduction(wide, fn_implies(), isim, tiny);
    CHECK(!un.verified);
    CHECK(!un.note.empty());
    CHECK(un.independent_sets == independent_sets_by_subsets(wide));
}

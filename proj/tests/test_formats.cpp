#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>
#include <string>

#include "ccsp/formats.hpp"
#include "ccsp/gadgets.hpp"
#include "ccsp/witness_json.hpp"
#include "json.hpp"

using namespace ccsp;

namespace {

std::string error_of(const std::function<void()>& body) {
    try {
        body();
    } catch (const input_error& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("function records round trip") {
    std::string text =
        "# language file\n"
        "fn or arity=2 table=0111\n"
        "\n"
        "fn half arity=1 table=[1/2,1]\n";
    auto fns = parse_functions(text);
    REQUIRE(fns.size() == 2);
    CHECK(fns[0].name == "or");
    CHECK(fns[0].fn == fn_or2());
    CHECK(fns[1].name == "half");
    CHECK_FALSE(fns[1].fn.is_boolean());
    CHECK(fns[1].fn.value(0) == make_rat(1, 2));

    CHECK(write_function("or", fns[0].fn) == "fn or arity=2 table=0111\n");
    CHECK(write_function("half", fns[1].fn) == "fn half arity=1 table=[1/2,1]\n");

    auto again = parse_functions(write_function("or", fns[0].fn) + write_function("half", fns[1].fn));
    REQUIRE(again.size() == 2);
    CHECK(again[0].fn == fns[0].fn);
    CHECK(again[1].fn == fns[1].fn);
}

TEST_CASE("function record errors name their line") {
    CHECK(error_of([] { parse_functions("arc 0 1\n"); }) ==
          "line 1: expected a fn record, got 'arc'");
    CHECK(error_of([] { parse_functions("fn f arity=2\n"); }) ==
          "line 1: fn record needs: fn <name> arity=<k> table=<...>");
    CHECK(error_of([] { parse_functions("# c\n\nfn f arity=2 table=011\n"); }) ==
          "line 3: table bitstring has length 3, need a power of two");
    CHECK(error_of([] { parse_functions("fn f arity=2 table=0121\n"); }) ==
          "line 1: table bitstring holds '2'");
    CHECK(error_of([] { parse_functions("fn f arity=3 table=0111\n"); }) ==
          "line 1: declared arity 3 but the table has arity 2");
    CHECK(error_of([] { parse_functions("fn f arity=x table=0111\n"); }) ==
          "line 1: 'x' is not an integer");
    CHECK(error_of([] { parse_functions("fn f k=2 table=0111\n"); }) ==
          "line 1: expected arity=<value>, got 'k=2'");
    CHECK(error_of([] { parse_functions("fn f arity=1 table=[1/2,0,0]\n"); }) ==
          "line 1: table has 3 entries, need a power of two");
    CHECK(error_of([] { parse_functions("fn f arity=1 table=[1/2,x]\n"); }) ==
          "line 1: malformed rational 'x'");
    CHECK(error_of([] { parse_functions("fn f arity=1 table=[1/2,1\n"); }) ==
          "line 1: rational table missing closing bracket");
}

TEST_CASE("bare tables parse in both forms") {
    CHECK(parse_table("0111") == fn_or2());
    CHECK(parse_table("01101001") == fn_odd(3));
    auto w = parse_table("[1/2, 0, 0, 1/2]");
    CHECK(w.arity() == 2);
    CHECK(w.value(0) == make_rat(1, 2));
    CHECK(sgn(w.value(1)) == 0);
    CHECK_THROWS_AS(parse_table("011"), input_error);
    CHECK_THROWS_AS(parse_table(""), input_error);
    CHECK_THROWS_AS(parse_table("[1/0]"), input_error);
}

TEST_CASE("hypergraph text round trips") {
    std::string text =
        "hypergraph n=5 k=3\n"
        "arc 0 1 2\n"
        "arc 0 1 3\n"
        "arc 0 2 3\n"
        "arc 1 2 4\n"
        "arc 1 3 4\n"
        "arc 2 3 4\n";
    TupleHypergraph h = parse_hypergraph(text);
    CHECK(h.n == 5);
    CHECK(h.arity == 3);
    CHECK(h.arcs.size() == 6);
    CHECK(write_hypergraph(h) == text);

    TupleHypergraph commented = parse_hypergraph(
        "# gadget\nhypergraph n=2 k=2\narc 0 1  # forward\narc 1 0\n");
    CHECK(commented.arcs == std::vector<std::vector<int>>{{0, 1}, {1, 0}});
}

TEST_CASE("hypergraph parse errors") {
    CHECK(error_of([] { parse_hypergraph(""); }) == "line 1: missing hypergraph header");
    CHECK(error_of([] { parse_hypergraph("graph n=2 k=2\n"); }) ==
          "line 1: expected: hypergraph n=<vertices> k=<arity>");
    CHECK(error_of([] { parse_hypergraph("hypergraph n=2 k=2\narc 0\n"); }) ==
          "line 2: arc has 1 vertices, arity is 2");
    CHECK(error_of([] { parse_hypergraph("hypergraph n=2 k=2\nedge 0 1\n"); }) ==
          "line 2: expected an arc line, got 'edge'");
    CHECK(error_of([] { parse_hypergraph("hypergraph n=2 k=2\narc 0 q\n"); }) ==
          "line 2: 'q' is not an integer");
    // Structural problems surface through validate with a format prefix.
    std::string repeated = error_of([] { parse_hypergraph("hypergraph n=3 k=2\narc 1 1\n"); });
    CHECK(repeated.substr(0, 12) == "hypergraph: ");
    std::string range = error_of([] { parse_hypergraph("hypergraph n=2 k=2\narc 0 5\n"); });
    CHECK(range.substr(0, 12) == "hypergraph: ");
}

TEST_CASE("instance text round trips") {
    std::string text =
        "instance n=4\n"
        "fn nae arity=3 table=01111110\n"
        "c nae 0 2 3\n"
        "c nae 1 2 3\n";
    CspInstance inst = parse_instance(text);
    CHECK(inst.n == 4);
    CHECK_FALSE(inst.repeat_free);
    REQUIRE(inst.language.size() == 1);
    CHECK(inst.language[0] == fn_nae3());
    CHECK(inst.names == std::vector<std::string>{"nae"});
    REQUIRE(inst.constraints.size() == 2);
    CHECK(inst.constraints[0] == Constraint{0, {0, 2, 3}});
    CHECK(inst.constraints[1] == Constraint{0, {1, 2, 3}});

    CHECK(write_instance(inst) == text);
    CHECK(parse_instance(write_instance(inst)) == inst);

    CspInstance rf = parse_instance("instance n=2 repeatfree\nfn eq arity=2 table=1001\nc eq 0 1\n");
    CHECK(rf.repeat_free);
    CHECK(write_instance(rf) ==
          "instance n=2 repeatfree\nfn eq arity=2 table=1001\nc eq 0 1\n");

    // Unnamed language functions get generated names on the way out.
    CspInstance anon;
    anon.n = 1;
    anon.language.push_back(fn_delta(1));
    anon.constraints.push_back({0, {0}});
    CHECK(write_instance(anon) == "instance n=1\nfn f0 arity=1 table=01\nc f0 0\n");
    CHECK(parse_instance(write_instance(anon)).constraints == anon.constraints);
}

TEST_CASE("instance function files load through the loader") {
    std::map<std::string, std::string> files{
        {"lang.fns", "fn imp arity=2 table=1101\nfn d0 arity=1 table=10\n"}};
    FileLoader loader = [&](const std::string& path) {
        auto it = files.find(path);
        if (it == files.end()) throw std::runtime_error("no such file");
        return it->second;
    };
    CspInstance inst = parse_instance(
        "instance n=2\nuse lang.fns\nc imp 0 1\nc d0 0\n", loader);
    CHECK(inst.language.size() == 2);
    CHECK(inst.names == std::vector<std::string>{"imp", "d0"});
    CHECK(inst.constraints.size() == 2);

    CHECK(error_of([&] { parse_instance("instance n=1\nuse lang.fns\n"); }) ==
          "line 2: function file references are not available here");
    CHECK(error_of([&] { parse_instance("instance n=1\nuse gone.fns\n", loader); }) ==
          "line 2: cannot load 'gone.fns': no such file");
    files["bad.fns"] = "fn f arity=1 table=0\n";
    CHECK(error_of([&] { parse_instance("instance n=1\nuse bad.fns\n", loader); }) ==
          "line 2: in 'bad.fns': line 1: arity 0 out of range [1,16]");
}

TEST_CASE("instance parse errors name their line") {
    CHECK(error_of([] { parse_instance("instance\n"); }) ==
          "line 1: expected: instance n=<vars> [repeatfree]");
    CHECK(error_of([] { parse_instance("instance n=2 loopfree\n"); }) ==
          "line 1: unknown header flag 'loopfree'");
    CHECK(error_of([] { parse_instance("instance n=2\nc eq 0 1\n"); }) ==
          "line 2: constraint uses undeclared function 'eq'");
    CHECK(error_of([] {
              parse_instance("instance n=2\nfn eq arity=2 table=1001\nc eq 0\n");
          }) == "line 3: constraint has 1 variables, function 'eq' has arity 2");
    CHECK(error_of([] {
              parse_instance(
                  "instance n=1\nfn d arity=1 table=01\nfn d arity=1 table=10\n");
          }) == "line 3: function 'd' defined twice");
    CHECK(error_of([] { parse_instance("instance n=2\nconstraint eq 0 1\n"); }) ==
          "line 2: unknown directive 'constraint'");
    // Structural problems surface through validate with a format prefix.
    std::string range = error_of(
        [] { parse_instance("instance n=1\nfn eq arity=2 table=1001\nc eq 0 1\n"); });
    CHECK(range.substr(0, 10) == "instance: ");
    std::string repeats = error_of([] {
        parse_instance("instance n=2 repeatfree\nfn eq arity=2 table=1001\nc eq 1 1\n");
    });
    CHECK(repeats.substr(0, 10) == "instance: ");
}

TEST_CASE("bipartite text round trips") {
    std::string text = "bipartite nL=2 nR=3\nedge 0 0\nedge 0 2\nedge 1 1\n";
    BipartiteGraph g = parse_bipartite(text);
    CHECK(g.nl == 2);
    CHECK(g.nr == 3);
    CHECK(g.edges.size() == 3);
    CHECK(write_bipartite(g) == text);

    CHECK(error_of([] { parse_bipartite(""); }) == "line 1: missing bipartite header");
    CHECK(error_of([] { parse_bipartite("bipartite nL=1 nR=1\narc 0 0\n"); }) ==
          "line 2: expected: edge l r");
    std::string range = error_of([] { parse_bipartite("bipartite nL=1 nR=1\nedge 0 4\n"); });
    CHECK(range.substr(0, 11) == "bipartite: ");
}

TEST_CASE("marginal tables print exact fractions") {
    MarginalTable m = marginals(fn_xor2(), TupleHypergraph::single_arc(2), {0, 1});
    CHECK(format_marginals(m) == "p(00)=0\np(01)=1/2\np(10)=1/2\np(11)=0\n");
    MarginalTable one = marginals(fn_or2(), TupleHypergraph::single_arc(2), {1});
    CHECK(format_marginals(one) == "p(0)=1/3\np(1)=2/3\n");
}

TEST_CASE("witness json: affine record") {
    auto w = classify_function(fn_even(3));
    REQUIRE(w.kind == ClassificationWitness::Kind::affine);
    std::string js = write_witness_json("even3", fn_even(3), w);
    CHECK(js == write_witness_json("even3", fn_even(3), w));  // byte-identical
    auto rep = verify_witness_json(js);
    CHECK(rep.ok);
    CHECK(rep.kind == "affine");
    CHECK(rep.function_name == "even3");
    REQUIRE(rep.checks.size() == 1);
    CHECK(rep.checks[0] == "pass: support is closed under triple exclusive-or");
}

TEST_CASE("witness json: perfect equality record") {
    auto w = classify_function(fn_implies());
    REQUIRE(w.kind == ClassificationWitness::Kind::perfect_equality);
    std::string js = write_witness_json("implies", fn_implies(), w);
    auto rep = verify_witness_json(js);
    CHECK(rep.ok);
    CHECK(rep.kind == "perfect-equality");
    REQUIRE(rep.checks.size() == 2);
    CHECK(rep.checks[0] == "pass: recorded marginals match the recomputation");
    CHECK(rep.checks[1] == "pass: pair marginals are exactly (1/2, 0, 0, 1/2)");

    auto j = nlohmann::ordered_json::parse(js);
    CHECK(j["marginals"] == nlohmann::ordered_json({"1/2", "0", "0", "1/2"}));
}

TEST_CASE("witness json: hard simulation records") {
    auto wor = classify_function(fn_or2());
    REQUIRE(wor.kind == ClassificationWitness::Kind::hard_simulation);
    std::string js = write_witness_json("or", fn_or2(), wor);
    auto rep = verify_witness_json(js);
    CHECK(rep.ok);
    CHECK(rep.kind == "hard-simulation");

    auto wnae = classify_function(fn_nae3());
    REQUIRE(wnae.kind == ClassificationWitness::Kind::hard_simulation);
    auto rep2 = verify_witness_json(write_witness_json("nae", fn_nae3(), wnae));
    CHECK(rep2.ok);
}

TEST_CASE("witness json: conditioned record with support certificates") {
    BooleanFunction f = BooleanFunction::from_support(3, {0, 1, 2, 4});
    auto w = classify_function(f);
    REQUIRE(w.kind == ClassificationWitness::Kind::hard_simulation);
    REQUIRE_FALSE(w.hard->cond.certs.empty());
    std::string js = write_witness_json("pinned", f, w);

    auto j = nlohmann::ordered_json::parse(js);
    CHECK(j["conditioning"]["pin0"] == nlohmann::ordered_json({0}));
    CHECK(j["conditioning"]["certificates"][0]["kind"] == "pin0");
    CHECK(j["g"] == nlohmann::ordered_json({"1/3", "1/3", "1/3", "0"}));
    CHECK(j["degree"] == 1);

    auto rep = verify_witness_json(js);
    CHECK(rep.ok);
    REQUIRE(rep.checks.size() == 4);
    CHECK(rep.checks[3] == "pass: support certificate 0 (pin0) holds");
}

TEST_CASE("witness json: tampered records fail verification") {
    auto w = classify_function(fn_or2());
    std::string js = write_witness_json("or", fn_or2(), w);

    auto j = nlohmann::ordered_json::parse(js);
    j["marginals"][1] = "1/4";
    auto rep = verify_witness_json(j.dump());
    CHECK_FALSE(rep.ok);
    CHECK(rep.checks[0] == "FAIL: recorded marginals differ from the recomputation");

    j = nlohmann::ordered_json::parse(js);
    j["g"] = {"1", "1", "1", "1"};
    rep = verify_witness_json(j.dump());
    CHECK_FALSE(rep.ok);
    bool saw_not_hard = false, saw_not_realised = false;
    for (const auto& line : rep.checks) {
        if (line == "FAIL: claimed pair weights are not hard") saw_not_hard = true;
        if (line == "FAIL: conditioned pair distribution does not realise the claimed weights")
            saw_not_realised = true;
    }
    CHECK(saw_not_hard);
    CHECK(saw_not_realised);

    // A tampered certificate breaks the replay even when the simulation holds.
    BooleanFunction f = BooleanFunction::from_support(3, {0, 1, 2, 4});
    std::string cjs = write_witness_json("pinned", f, classify_function(f));
    j = nlohmann::ordered_json::parse(cjs);
    j["conditioning"]["certificates"][0]["kind"] = "pin1";
    rep = verify_witness_json(j.dump());
    CHECK_FALSE(rep.ok);
    CHECK(rep.checks[3] == "FAIL: support certificate 0 (pin1) does not hold");
}

TEST_CASE("witness json: malformed records are input errors") {
    CHECK_THROWS_AS(verify_witness_json("{"), input_error);
    CHECK_THROWS_AS(verify_witness_json("[]"), input_error);
    CHECK_THROWS_AS(verify_witness_json(R"({"schema":"other/9"})"), input_error);

    auto w = classify_function(fn_or2());
    std::string js = write_witness_json("or", fn_or2(), w);
    auto j = nlohmann::ordered_json::parse(js);
    j.erase("g");
    CHECK_THROWS_AS(verify_witness_json(j.dump()), input_error);
    j = nlohmann::ordered_json::parse(js);
    j["kind"] = "mystery";
    CHECK_THROWS_AS(verify_witness_json(j.dump()), input_error);
    j = nlohmann::ordered_json::parse(js);
    j["pair"] = {0, 0};
    CHECK_THROWS_AS(verify_witness_json(j.dump()), input_error);
    j = nlohmann::ordered_json::parse(js);
    j["gadget"]["arcs"][0] = {0, 0};
    CHECK_THROWS_AS(verify_witness_json(j.dump()), input_error);

    ClassificationWitness none;
    CHECK_THROWS_AS(write_witness_json("f", fn_or2(), none), input_error);
}

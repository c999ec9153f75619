#include "ccsp/witness_json.hpp"

#include <cstdint>

#include "json.hpp"

namespace ccsp {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json json_of_function(const std::string& name, const BooleanFunction& f) {
    ordered_json j;
    j["name"] = name;
    j["arity"] = f.arity();
    if (f.is_boolean()) {
        j["table"] = f.bits();
    } else {
        auto arr = ordered_json::array();
        for (uint32_t t = 0; t < f.size(); ++t) arr.push_back(rat_str(f.value(t)));
        j["table"] = arr;
    }
    return j;
}

ordered_json json_of_gadget(const TupleHypergraph& h) {
    ordered_json j;
    j["n"] = h.n;
    j["k"] = h.arity;
    j["arcs"] = h.arcs;
    return j;
}

ordered_json json_of_conditioning(const Conditioning& cond) {
    ordered_json j;
    j["pin0"] = cond.pin0;
    j["pin1"] = cond.pin1;
    j["eq"] = cond.eq;
    auto certs = ordered_json::array();
    for (const auto& c : cond.certs) {
        ordered_json jc;
        jc["kind"] = support_kind_name(c.kind);
        jc["gadget"] = json_of_gadget(c.gadget);
        jc["verts"] = c.verts;
        certs.push_back(std::move(jc));
    }
    j["certificates"] = std::move(certs);
    return j;
}

ordered_json json_of_marginals(const MarginalTable& m) {
    auto arr = ordered_json::array();
    for (const auto& p : m.probs) arr.push_back(rat_str(p));
    return arr;
}

[[noreturn]] void malformed(const std::string& what) {
    throw input_error("witness record: " + what);
}

const ordered_json& member(const ordered_json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) malformed(std::string("missing field '") + key + "'");
    return *it;
}

int int_member(const ordered_json& j, const char* key) {
    const auto& v = member(j, key);
    if (!v.is_number_integer()) malformed(std::string("field '") + key + "' is not an integer");
    return v.get<int>();
}

std::string str_member(const ordered_json& j, const char* key) {
    const auto& v = member(j, key);
    if (!v.is_string()) malformed(std::string("field '") + key + "' is not a string");
    return v.get<std::string>();
}

std::vector<int> int_list(const ordered_json& v, const char* what) {
    if (!v.is_array()) malformed(std::string(what) + " is not an array");
    std::vector<int> out;
    for (const auto& e : v) {
        if (!e.is_number_integer()) malformed(std::string(what) + " holds a non-integer");
        out.push_back(e.get<int>());
    }
    return out;
}

BooleanFunction function_of_json(const ordered_json& j) {
    int arity = int_member(j, "arity");
    const auto& table = member(j, "table");
    if (table.is_string()) {
        std::string bits = table.get<std::string>();
        if (bits.size() != size_t(1) << arity)
            malformed("table bitstring length does not match the arity");
        for (char c : bits)
            if (c != '0' && c != '1') malformed("table bitstring holds a non-bit");
        return BooleanFunction::from_bits(arity, bits);
    }
    if (!table.is_array()) malformed("field 'table' is neither a bitstring nor an array");
    if (table.size() != size_t(1) << arity)
        malformed("table length does not match the arity");
    std::vector<Rat> vals;
    for (const auto& cell : table) {
        if (!cell.is_string()) malformed("table cells must be rational strings");
        vals.push_back(parse_rat(cell.get<std::string>()));
    }
    return BooleanFunction(arity, std::move(vals));
}

TupleHypergraph gadget_of_json(const ordered_json& j) {
    TupleHypergraph h;
    h.n = int_member(j, "n");
    h.arity = int_member(j, "k");
    const auto& arcs = member(j, "arcs");
    if (!arcs.is_array()) malformed("gadget arcs is not an array");
    for (const auto& arc : arcs) h.arcs.push_back(int_list(arc, "gadget arc"));
    try {
        h.validate();
    } catch (const input_error& e) {
        malformed(std::string("gadget: ") + e.what());
    }
    return h;
}

Conditioning conditioning_of_json(const ordered_json& j, int n) {
    Conditioning cond;
    cond.pin0 = int_list(member(j, "pin0"), "pin0");
    cond.pin1 = int_list(member(j, "pin1"), "pin1");
    const auto& eq = member(j, "eq");
    if (!eq.is_array()) malformed("eq is not an array");
    for (const auto& block : eq) cond.eq.push_back(int_list(block, "eq block"));
    const auto& certs = member(j, "certificates");
    if (!certs.is_array()) malformed("certificates is not an array");
    for (const auto& jc : certs) {
        SupportCertificate c;
        std::string kind = str_member(jc, "kind");
        if (kind == "pin0")
            c.kind = SupportKind::pin0;
        else if (kind == "pin1")
            c.kind = SupportKind::pin1;
        else if (kind == "equality")
            c.kind = SupportKind::equality;
        else
            malformed("unknown certificate kind '" + kind + "'");
        c.gadget = gadget_of_json(member(jc, "gadget"));
        c.verts = int_list(member(jc, "verts"), "certificate verts");
        cond.certs.push_back(std::move(c));
    }
    try {
        cond.validate(n);
    } catch (const input_error& e) {
        malformed(std::string("conditioning: ") + e.what());
    }
    return cond;
}

Rat rat_of(const ordered_json& v, const char* what) {
    if (!v.is_string()) malformed(std::string(what) + " must be a rational string");
    return parse_rat(v.get<std::string>());
}

std::vector<Rat> rat_list(const ordered_json& v, size_t want, const char* what) {
    if (!v.is_array() || v.size() != want)
        malformed(std::string(what) + " must be an array of " + std::to_string(want) +
                  " rational strings");
    std::vector<Rat> out;
    for (const auto& e : v) out.push_back(rat_of(e, what));
    return out;
}

void pass(WitnessReport& rep, const std::string& line) {
    rep.checks.push_back("pass: " + line);
}

void failed(WitnessReport& rep, const std::string& line) {
    rep.ok = false;
    rep.checks.push_back("FAIL: " + line);
}

bool is_half_equality(const MarginalTable& m) {
    Rat half = make_rat(1, 2);
    return m.probs.size() == 4 && m.at(0) == half && sgn(m.at(1)) == 0 && sgn(m.at(2)) == 0 &&
           m.at(3) == half;
}

}  // namespace

std::string write_witness_json(const std::string& name, const BooleanFunction& f,
                               const ClassificationWitness& w, const EnumOptions& opts) {
    ordered_json j;
    j["schema"] = "ccsp-witness/1";
    switch (w.kind) {
        case ClassificationWitness::Kind::affine: {
            if (!is_affine(f)) throw internal_error("affine witness for a non-affine function");
            j["kind"] = "affine";
            j["function"] = json_of_function(name, f);
            break;
        }
        case ClassificationWitness::Kind::perfect_equality: {
            const auto& pe = *w.equality;
            MarginalTable m = marginals(f, pe.h, {pe.u, pe.v}, opts);
            if (!is_half_equality(m))
                throw internal_error("equality witness fails re-verification");
            j["kind"] = "perfect-equality";
            j["function"] = json_of_function(name, f);
            j["gadget"] = json_of_gadget(pe.h);
            j["pair"] = {pe.u, pe.v};
            j["marginals"] = json_of_marginals(m);
            j["degree"] = pe.h.degree();
            break;
        }
        case ClassificationWitness::Kind::hard_simulation: {
            const auto& hs = *w.hard;
            if (!is_hard(hs.g)) throw internal_error("claimed pair weights are not hard");
            if (!verify_simulation(f, hs.h, hs.cond, hs.u, hs.v, hs.g, opts))
                throw internal_error("hard simulation fails re-verification");
            for (const auto& c : hs.cond.certs)
                if (!check_support(f, c, opts))
                    throw internal_error("a support certificate fails re-verification");
            MarginalTable m = cond_marginals(f, hs.h, hs.cond, {hs.u, hs.v}, opts);
            j["kind"] = "hard-simulation";
            j["function"] = json_of_function(name, f);
            j["gadget"] = json_of_gadget(hs.h);
            j["conditioning"] = json_of_conditioning(hs.cond);
            j["pair"] = {hs.u, hs.v};
            j["g"] = {rat_str(hs.g.g00), rat_str(hs.g.g01), rat_str(hs.g.g10), rat_str(hs.g.g11)};
            j["marginals"] = json_of_marginals(m);
            j["degree"] = hs.h.degree();
            break;
        }
        case ClassificationWitness::Kind::inconclusive:
            throw input_error("an inconclusive outcome has no replayable witness");
    }
    return j.dump(2) + "\n";
}

WitnessReport verify_witness_json(const std::string& text, const EnumOptions& opts) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        malformed(std::string("not valid JSON: ") + e.what());
    }
    if (!j.is_object()) malformed("top level is not an object");
    if (str_member(j, "schema") != "ccsp-witness/1")
        malformed("unknown schema '" + str_member(j, "schema") + "'");

    WitnessReport rep;
    rep.ok = true;
    rep.kind = str_member(j, "kind");
    const auto& jf = member(j, "function");
    rep.function_name = str_member(jf, "name");
    BooleanFunction f = function_of_json(jf);

    if (rep.kind == "affine") {
        if (is_affine(f))
            pass(rep, "support is closed under triple exclusive-or");
        else
            failed(rep, "function is not affine");
        return rep;
    }

    if (rep.kind != "perfect-equality" && rep.kind != "hard-simulation")
        malformed("unknown kind '" + rep.kind + "'");

    TupleHypergraph h = gadget_of_json(member(j, "gadget"));
    if (h.arity != f.arity()) malformed("gadget arity does not match the function");
    auto pair = int_list(member(j, "pair"), "pair");
    if (pair.size() != 2) malformed("pair must hold two vertices");
    int u = pair[0], v = pair[1];
    if (u < 0 || u >= h.n || v < 0 || v >= h.n || u == v)
        malformed("pair vertices out of range or equal");
    auto recorded = rat_list(member(j, "marginals"), 4, "marginals");

    if (rep.kind == "perfect-equality") {
        MarginalTable m;
        try {
            m = marginals(f, h, {u, v}, opts);
        } catch (const std::exception& e) {
            failed(rep, std::string("marginals cannot be recomputed: ") + e.what());
            return rep;
        }
        if (m.probs == recorded)
            pass(rep, "recorded marginals match the recomputation");
        else
            failed(rep, "recorded marginals differ from the recomputation");
        if (is_half_equality(m))
            pass(rep, "pair marginals are exactly (1/2, 0, 0, 1/2)");
        else
            failed(rep, "pair marginals are not (1/2, 0, 0, 1/2)");
        return rep;
    }

    Conditioning cond = conditioning_of_json(member(j, "conditioning"), h.n);
    auto gvals = rat_list(member(j, "g"), 4, "g");
    BinaryWeightedFunction g(gvals[0], gvals[1], gvals[2], gvals[3]);

    MarginalTable m;
    try {
        m = cond_marginals(f, h, cond, {u, v}, opts);
    } catch (const std::exception& e) {
        failed(rep, std::string("conditioned marginals cannot be recomputed: ") + e.what());
        return rep;
    }
    if (m.probs == recorded)
        pass(rep, "recorded marginals match the recomputation");
    else
        failed(rep, "recorded marginals differ from the recomputation");
    if (is_hard(g))
        pass(rep, "claimed pair weights are hard");
    else
        failed(rep, "claimed pair weights are not hard");
    if (verify_simulation(f, h, cond, u, v, g, opts))
        pass(rep, "conditioned pair distribution realises the claimed weights");
    else
        failed(rep, "conditioned pair distribution does not realise the claimed weights");
    for (size_t i = 0; i < cond.certs.size(); ++i) {
        const auto& c = cond.certs[i];
        std::string label = "support certificate " + std::to_string(i) + " (" +
                            support_kind_name(c.kind) + ")";
        bool okc = false;
        try {
            okc = check_support(f, c, opts);
        } catch (const std::exception& e) {
            failed(rep, label + " cannot be checked: " + e.what());
            continue;
        }
        if (okc)
            pass(rep, label + " holds");
        else
            failed(rep, label + " does not hold");
    }
    return rep;
}

}  // namespace ccsp

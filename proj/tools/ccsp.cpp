#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ccsp/csp.hpp"
#include "ccsp/formats.hpp"
#include "ccsp/gadgets.hpp"
#include "ccsp/witness_json.hpp"

using namespace ccsp;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct Settings {
    bool json = false;
    SynthesisOptions synth;
};

// Every effective bound goes into every output so runs are reproducible from
// the output alone.
ordered_json bounds_json(const SynthesisOptions& o) {
    ordered_json b;
    b["threads"] = o.enumeration.threads;
    b["max-vertices"] = o.max_gadget_vertices;
    b["max-arcs"] = o.max_gadget_arcs;
    b["max-aux"] = o.max_aux;
    b["max-constraints"] = o.max_constraints;
    b["sym-arity"] = o.max_sym_arity;
    b["enum-vertices"] = o.enumeration.max_vertices;
    return b;
}

std::string bounds_line(const SynthesisOptions& o) {
    std::ostringstream out;
    out << "bounds: threads=" << o.enumeration.threads
        << " max-vertices=" << o.max_gadget_vertices << " max-arcs=" << o.max_gadget_arcs
        << " max-aux=" << o.max_aux << " max-constraints=" << o.max_constraints
        << " sym-arity=" << o.max_sym_arity << " enum-vertices=" << o.enumeration.max_vertices
        << "\n";
    return out.str();
}

void emit(const Settings& s, const ordered_json& machine, const std::string& human) {
    if (s.json)
        std::cout << machine.dump(2) << "\n";
    else
        std::cout << human << bounds_line(s.synth);
}

std::string verdict_display(LanguageClassification::Verdict v) {
    switch (v) {
        case LanguageClassification::Verdict::fp_affine: return "FP (affine)";
        case LanguageClassification::Verdict::bis_equivalent: return "#BIS-equivalent";
        case LanguageClassification::Verdict::np_hard: return "NP-hard";
    }
    throw internal_error("unknown verdict");
}

std::string table_display(const BooleanFunction& f) {
    if (f.is_boolean()) return f.bits();
    std::string out = "[";
    for (uint32_t t = 0; t < f.size(); ++t) {
        if (t) out += ",";
        out += rat_str(f.value(t));
    }
    return out + "]";
}

ordered_json function_json(const std::string& name, const BooleanFunction& f) {
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

std::string join_ints(const ordered_json& arr) {
    std::string out;
    for (const auto& v : arr) {
        if (!out.empty()) out += ",";
        out += std::to_string(v.get<int>());
    }
    return out;
}

// Human view of a witness record, rendered from the same JSON the machine
// output carries.
std::string human_witness(const ordered_json& rec, const std::string& indent) {
    std::ostringstream out;
    std::string kind = rec.at("kind").get<std::string>();
    out << indent << "kind: " << kind << "\n";
    if (kind == "affine") return out.str();
    const auto& g = rec.at("gadget");
    out << indent << "gadget: vertices=" << g.at("n").get<int>() << " arcs=" << g.at("arcs").size()
        << " degree=" << rec.at("degree").get<int>() << "\n";
    out << indent << "pair: (" << rec.at("pair")[0].get<int>() << ", "
        << rec.at("pair")[1].get<int>() << ")\n";
    if (rec.contains("conditioning")) {
        const auto& c = rec.at("conditioning");
        if (!c.at("pin0").empty() || !c.at("pin1").empty() || !c.at("eq").empty()) {
            out << indent << "conditioning: pin0={" << join_ints(c.at("pin0")) << "} pin1={"
                << join_ints(c.at("pin1")) << "} eq blocks=" << c.at("eq").size()
                << " certificates=" << c.at("certificates").size() << "\n";
        }
    }
    if (rec.contains("g")) {
        const auto& gv = rec.at("g");
        out << indent << "g: (" << gv[0].get<std::string>() << ", " << gv[1].get<std::string>()
            << ", " << gv[2].get<std::string>() << ", " << gv[3].get<std::string>() << ")\n";
    }
    const auto& m = rec.at("marginals");
    out << indent << "marginals:";
    static const char* labels[4] = {"00", "01", "10", "11"};
    for (int i = 0; i < 4; ++i) out << " p(" << labels[i] << ")=" << m[i].get<std::string>();
    out << "\n";
    return out.str();
}

int run_classify(const Settings& s, const std::string& language_file,
                 const std::string& function_table, const std::string& name, bool want_witness) {
    if (language_file.empty() == function_table.empty())
        throw input_error("classify needs exactly one of --language or --function");
    std::vector<NamedFunction> fns;
    if (!language_file.empty())
        fns = parse_functions(slurp(language_file));
    else
        fns.push_back({name, parse_table(function_table)});

    std::vector<BooleanFunction> lang;
    for (const auto& nf : fns) lang.push_back(nf.fn);
    LanguageClassification cls = classify_language(lang);

    ordered_json out;
    out["command"] = "classify";
    out["verdict"] = verdict_name(cls.verdict);
    auto jfns = ordered_json::array();
    for (size_t i = 0; i < fns.size(); ++i) {
        ordered_json jf = function_json(fns[i].name, fns[i].fn);
        jf["affine"] = bool(cls.affine[i]);
        jf["im2"] = bool(cls.in_im2[i]);
        jfns.push_back(std::move(jf));
    }
    out["functions"] = std::move(jfns);
    out["culprit-affine"] = cls.culprit_affine;
    out["culprit-im2"] = cls.culprit_im2;
    if (cls.product_evidence)
        out["product-evidence"] = function_json("product", *cls.product_evidence);
    if (!cls.note.empty()) out["note"] = cls.note;

    std::ostringstream human;
    human << "verdict: " << verdict_display(cls.verdict) << "\n";
    human << "functions:\n";
    for (size_t i = 0; i < fns.size(); ++i)
        human << "  " << fns[i].name << ": arity " << fns[i].fn.arity() << ", table "
              << table_display(fns[i].fn) << ", affine " << (cls.affine[i] ? "yes" : "no")
              << ", IM2 " << (cls.in_im2[i] ? "yes" : "no") << "\n";
    if (!cls.note.empty()) human << "note: " << cls.note << "\n";

    int code = 0;
    if (want_witness) {
        auto jws = ordered_json::array();
        for (const auto& nf : fns) {
            if (is_affine(nf.fn)) continue;
            ClassificationWitness w = classify_function(nf.fn, s.synth);
            if (w.kind == ClassificationWitness::Kind::inconclusive) {
                ordered_json jw;
                jw["name"] = nf.name;
                jw["kind"] = "inconclusive";
                jw["trace"] = w.trace;
                jws.push_back(std::move(jw));
                human << "witness for " << nf.name << ": inconclusive\n";
                for (const auto& line : w.trace) human << "  " << line << "\n";
                code = 1;
                continue;
            }
            auto rec = ordered_json::parse(write_witness_json(nf.name, nf.fn, w, s.synth.enumeration));
            human << "witness for " << nf.name << ":\n" << human_witness(rec, "  ");
            ordered_json jw;
            jw["name"] = nf.name;
            jw["record"] = std::move(rec);
            jws.push_back(std::move(jw));
        }
        out["witnesses"] = std::move(jws);
    }
    out["bounds"] = bounds_json(s.synth);
    emit(s, out, human.str());
    return code;
}

int run_synth(const Settings& s, const std::string& function_table, const std::string& name,
              const std::string& out_path) {
    BooleanFunction f = parse_table(function_table);
    ClassificationWitness w = classify_function(f, s.synth);

    ordered_json out;
    out["command"] = "synth";
    if (w.kind == ClassificationWitness::Kind::inconclusive) {
        out["kind"] = "inconclusive";
        out["trace"] = w.trace;
        out["bounds"] = bounds_json(s.synth);
        std::ostringstream human;
        human << "no witness within bounds\n";
        for (const auto& line : w.trace) human << "  " << line << "\n";
        emit(s, out, human.str());
        return 1;
    }
    std::string record = write_witness_json(name, f, w, s.synth.enumeration);
    if (!out_path.empty()) {
        std::ofstream file(out_path, std::ios::binary);
        if (!file || !(file << record).good()) throw input_error("cannot write '" + out_path + "'");
    }
    auto rec = ordered_json::parse(record);
    out["witness"] = rec;
    out["bounds"] = bounds_json(s.synth);
    std::ostringstream human;
    human << "function: " << name << ", arity " << f.arity() << ", table " << table_display(f)
          << "\n";
    human << human_witness(rec, "");
    if (!out_path.empty()) human << "witness written to " << out_path << "\n";
    emit(s, out, human.str());
    return 0;
}

int run_verify(const Settings& s, const std::string& witness_file) {
    std::string text = slurp(witness_file);
    // `synth --json` wraps the record; accept both shapes.
    try {
        auto j = ordered_json::parse(text);
        if (j.is_object() && j.contains("witness")) text = j["witness"].dump();
    } catch (const ordered_json::parse_error&) {
        // verify_witness_json reports malformed input itself
    }
    WitnessReport rep = verify_witness_json(text, s.synth.enumeration);

    ordered_json out;
    out["command"] = "verify";
    out["kind"] = rep.kind;
    out["function"] = rep.function_name;
    out["ok"] = rep.ok;
    out["checks"] = rep.checks;
    out["bounds"] = bounds_json(s.synth);
    std::ostringstream human;
    human << "witness: " << rep.kind << " for " << rep.function_name << "\n";
    for (const auto& line : rep.checks) human << "  " << line << "\n";
    human << (rep.ok ? "PASS" : "FAIL") << "\n";
    emit(s, out, human.str());
    return rep.ok ? 0 : 1;
}

int run_count(const Settings& s, const std::string& instance_file, const std::string& method) {
    auto dir = std::filesystem::path(instance_file).parent_path();
    FileLoader loader = [dir](const std::string& p) { return slurp((dir / p).string()); };
    CspInstance inst = parse_instance(slurp(instance_file), loader);
    Rat z = method == "gauss" ? gauss_count(inst) : brute_count(inst, s.synth.enumeration);

    ordered_json out;
    out["command"] = "count";
    out["method"] = method;
    out["variables"] = inst.n;
    out["constraints"] = inst.constraints.size();
    out["count"] = rat_str(z);
    out["bounds"] = bounds_json(s.synth);
    std::ostringstream human;
    human << "count: " << rat_str(z) << "\n";
    human << "method: " << method << ", variables: " << inst.n
          << ", constraints: " << inst.constraints.size() << "\n";
    emit(s, out, human.str());
    return 0;
}

int run_reduce_bis(const Settings& s, const std::string& graph_file,
                   const std::string& function_table, const std::string& name) {
    BipartiteGraph g = parse_bipartite(slurp(graph_file));
    BooleanFunction f = parse_table(function_table);

    // The reduction consumes a perfect Implies simulation over the function;
    // search for a CSP implementation with exactly matching counts and read
    // it back as a gadget.
    ImplementSearchResult found = implement_search({f}, fn_implies(), s.synth);
    ordered_json out;
    out["command"] = "reduce-bis";
    if (!found.certificate) {
        out["kind"] = "no-implies-simulation";
        out["instances-examined"] = found.instances_examined;
        out["bounds"] = bounds_json(s.synth);
        std::ostringstream human;
        human << "no Implies simulation of " << name << " found within bounds ("
              << found.instances_examined << " instances examined)\n";
        emit(s, out, human.str());
        return 1;
    }
    SimGadget sim;
    sim.h = hypergraph_from_instance(found.certificate->instance);
    sim.verts = {0, 1};
    BisReduction red = bis_reduction(g, f, sim, s.synth.enumeration);

    out["function"] = function_json(name, f);
    out["graph"] = {{"left", g.nl}, {"right", g.nr}, {"edges", g.edges.size()}};
    out["simulation"] = {{"n", sim.h.n}, {"arcs", sim.h.arcs.size()}};
    out["hypergraph"] = {{"n", red.h.n}, {"arcs", red.h.arcs.size()}};
    out["independent-sets"] = red.independent_sets.get_str();
    out["z-gadget"] = rat_str(red.z_gadget);
    out["z-total"] = rat_str(red.z_total);
    out["degree"] = red.degree;
    out["verified"] = red.verified;
    if (!red.note.empty()) out["note"] = red.note;
    out["bounds"] = bounds_json(s.synth);

    std::ostringstream human;
    human << "independent sets: " << red.independent_sets.get_str() << "\n";
    human << "z-gadget: " << rat_str(red.z_gadget) << ", z-total: " << rat_str(red.z_total)
          << "\n";
    human << "hypergraph: vertices=" << red.h.n << " arcs=" << red.h.arcs.size()
          << " degree=" << red.degree << "\n";
    human << "identity verified: " << (red.verified ? "yes" : "no") << "\n";
    if (!red.note.empty()) human << "note: " << red.note << "\n";
    emit(s, out, human.str());
    return 0;
}

int run_info(const Settings& s, const std::string& function_table, const std::string& name) {
    BooleanFunction f = parse_table(function_table);

    ordered_json out;
    out["command"] = "info";
    out["function"] = function_json(name, f);
    out["boolean"] = f.is_boolean();
    out["support-size"] = f.support().size();
    out["affine"] = is_affine(f);
    out["im2"] = is_in_im2(f);
    out["self-dual"] = is_self_dual(f);
    auto st = is_semi_trivial(f);
    if (st) {
        std::vector<int> set;
        for (int j = 0; j < f.arity(); ++j)
            if (st->set_mask >> j & 1u) set.push_back(j);
        out["semi-trivial"] = {{"set", set}, {"direction", st->upward ? "up" : "down"}};
    } else {
        out["semi-trivial"] = nullptr;
    }
    auto tag = easy_k_member(f);
    out["easy"] = tag ? ordered_json(easy_tag_name(*tag)) : ordered_json(nullptr);

    std::ostringstream human;
    human << "function: " << name << ", arity " << f.arity() << ", table " << table_display(f)
          << "\n";
    human << "boolean: " << (f.is_boolean() ? "yes" : "no")
          << ", support size: " << f.support().size() << "\n";
    human << "affine: " << (is_affine(f) ? "yes" : "no")
          << ", in IM2: " << (is_in_im2(f) ? "yes" : "no")
          << ", self-dual: " << (is_self_dual(f) ? "yes" : "no") << "\n";
    if (st) {
        human << "semi-trivial: yes, set {";
        bool first = true;
        for (int j = 0; j < f.arity(); ++j)
            if (st->set_mask >> j & 1u) {
                human << (first ? "" : ",") << j;
                first = false;
            }
        human << "} " << (st->upward ? "upward" : "downward") << "\n";
    } else {
        human << "semi-trivial: no\n";
    }
    human << "easy tag: " << (tag ? easy_tag_name(*tag) : "none") << "\n";

    if (f.arity() <= s.synth.max_sym_arity) {
        BooleanFunction fs = symmetrise(f, s.synth.max_sym_arity);
        auto stag = easy_k_member(fs);
        ordered_json jf;
        jf["table"] = fs.is_boolean() ? ordered_json(fs.bits()) : ordered_json(fs.table_str());
        jf["easy"] = stag ? ordered_json(easy_tag_name(*stag)) : ordered_json(nullptr);
        out["symmetrisation"] = std::move(jf);
        human << "f*: " << table_display(fs) << " (easy tag: "
              << (stag ? easy_tag_name(*stag) : "none") << ")\n";
    } else {
        out["symmetrisation"] = nullptr;
        human << "f*: not computed, arity above the symmetrisation bound "
              << s.synth.max_sym_arity << "\n";
    }
    out["bounds"] = bounds_json(s.synth);
    emit(s, out, human.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact classification and gadget synthesis for Boolean counting CSPs"};
    app.require_subcommand(1);

    Settings s;
    app.add_flag("--json", s.json, "machine-readable JSON output")->envname("CCSP_JSON");
    app.add_option("--threads", s.synth.enumeration.threads, "enumeration worker threads")
        ->envname("CCSP_THREADS");
    app.add_option("--max-vertices", s.synth.max_gadget_vertices,
                   "gadget search: vertex bound")
        ->envname("CCSP_MAX_VERTICES");
    app.add_option("--max-arcs", s.synth.max_gadget_arcs, "gadget search: arc bound")
        ->envname("CCSP_MAX_ARCS");
    app.add_option("--max-aux", s.synth.max_aux,
                   "implementation search: auxiliary variable bound")
        ->envname("CCSP_MAX_AUX");

    int code = 0;

    auto* classify = app.add_subcommand("classify", "trichotomy verdict for a language or function");
    classify->fallthrough();
    std::string cl_language, cl_function, cl_name = "f";
    bool cl_witness = false;
    classify->add_option("--language", cl_language, "function file defining the language");
    classify->add_option("--function", cl_function, "single function table");
    classify->add_option("--name", cl_name, "label for --function");
    classify->add_flag("--witness", cl_witness, "synthesize gadget witnesses");
    classify->callback([&] { code = run_classify(s, cl_language, cl_function, cl_name, cl_witness); });

    auto* synth = app.add_subcommand("synth", "synthesize and verify a gadget witness");
    synth->fallthrough();
    std::string sy_function, sy_name = "f", sy_out;
    synth->add_option("--function", sy_function, "function table")->required();
    synth->add_option("--name", sy_name, "label for the function");
    synth->add_option("--out", sy_out, "write the witness record to this file");
    synth->callback([&] { code = run_synth(s, sy_function, sy_name, sy_out); });

    auto* verify = app.add_subcommand("verify", "replay a witness record");
    verify->fallthrough();
    std::string ve_witness;
    verify->add_option("--witness", ve_witness, "witness record file")->required();
    verify->callback([&] { code = run_verify(s, ve_witness); });

    auto* count = app.add_subcommand("count", "exact satisfying-assignment count");
    count->fallthrough();
    std::string co_instance, co_method = "brute";
    count->add_option("--instance", co_instance, "instance file")->required();
    count->add_option("--method", co_method, "brute or gauss")
        ->check(CLI::IsMember({"brute", "gauss"}));
    count->callback([&] { code = run_count(s, co_instance, co_method); });

    auto* reduce = app.add_subcommand("reduce-bis", "independent-set reduction over a function");
    reduce->fallthrough();
    std::string rb_graph, rb_function, rb_name = "f";
    reduce->add_option("--graph", rb_graph, "bipartite graph file")->required();
    reduce->add_option("--function", rb_function, "function table")->required();
    reduce->add_option("--name", rb_name, "label for the function");
    reduce->callback([&] { code = run_reduce_bis(s, rb_graph, rb_function, rb_name); });

    auto* info = app.add_subcommand("info", "structural summary of one function");
    info->fallthrough();
    std::string in_function, in_name = "f";
    info->add_option("--function", in_function, "function table")->required();
    info->add_option("--name", in_name, "label for the function");
    info->callback([&] { code = run_info(s, in_function, in_name); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const resource_error& e) {
        std::cerr << "resource cap: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 70;
    }
    return code;
}

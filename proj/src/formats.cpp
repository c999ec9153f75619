#include "ccsp/formats.hpp"

#include <cstdint>
#include <map>
#include <sstream>

#include "ccsp/boolfn.hpp"

namespace ccsp {

namespace {

std::vector<std::string> tokens_of(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

[[noreturn]] void fail(int line_no, const std::string& what) {
    throw input_error("line " + std::to_string(line_no) + ": " + what);
}

// Strips comments and yields (line number, tokens) for nonblank lines.
std::vector<std::pair<int, std::vector<std::string>>> logical_lines(const std::string& text) {
    std::vector<std::pair<int, std::vector<std::string>>> out;
    std::istringstream in(text);
    std::string line;
    int no = 0;
    while (std::getline(in, line)) {
        ++no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto toks = tokens_of(line);
        if (!toks.empty()) out.emplace_back(no, std::move(toks));
    }
    return out;
}

// `key=value` fields on header lines.
std::string field_value(const std::string& tok, const std::string& key, int line_no) {
    if (tok.size() <= key.size() + 1 || tok.compare(0, key.size(), key) != 0 ||
        tok[key.size()] != '=')
        fail(line_no, "expected " + key + "=<value>, got '" + tok + "'");
    return tok.substr(key.size() + 1);
}

int parse_int(const std::string& text, int line_no) {
    try {
        size_t used = 0;
        int v = std::stoi(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        fail(line_no, "'" + text + "' is not an integer");
    }
}

BooleanFunction table_from_text(const std::string& text, int line_no) {
    if (!text.empty() && text.front() == '[') {
        if (text.back() != ']') fail(line_no, "rational table missing closing bracket");
        std::vector<Rat> table;
        std::string body = text.substr(1, text.size() - 2);
        std::istringstream in(body);
        std::string cell;
        while (std::getline(in, cell, ',')) {
            cell.erase(0, cell.find_first_not_of(" \t"));
            cell.erase(cell.find_last_not_of(" \t") + 1);
            try {
                table.push_back(parse_rat(cell));
            } catch (const input_error& e) {
                fail(line_no, e.what());
            }
        }
        int arity = 0;
        while ((size_t(1) << arity) < table.size()) ++arity;
        if (table.empty() || (size_t(1) << arity) != table.size())
            fail(line_no, "table has " + std::to_string(table.size()) +
                              " entries, need a power of two");
        try {
            return BooleanFunction(arity, std::move(table));
        } catch (const input_error& e) {
            fail(line_no, e.what());
        }
    }
    for (char c : text)
        if (c != '0' && c != '1') fail(line_no, "table bitstring holds '" + std::string(1, c) + "'");
    int arity = 0;
    while ((size_t(1) << arity) < text.size()) ++arity;
    if (text.empty() || (size_t(1) << arity) != text.size())
        fail(line_no,
             "table bitstring has length " + std::to_string(text.size()) + ", need a power of two");
    try {
        return BooleanFunction::from_bits(arity, text);
    } catch (const input_error& e) {
        fail(line_no, e.what());
    }
}

NamedFunction fn_from_tokens(const std::vector<std::string>& toks, int line_no) {
    if (toks.size() != 4) fail(line_no, "fn record needs: fn <name> arity=<k> table=<...>");
    NamedFunction out{toks[1], table_from_text(field_value(toks[3], "table", line_no), line_no)};
    int arity = parse_int(field_value(toks[2], "arity", line_no), line_no);
    if (arity != out.fn.arity())
        fail(line_no, "declared arity " + std::to_string(arity) + " but the table has arity " +
                          std::to_string(out.fn.arity()));
    return out;
}

}  // namespace

std::vector<NamedFunction> parse_functions(const std::string& text) {
    std::vector<NamedFunction> out;
    for (const auto& [no, toks] : logical_lines(text)) {
        if (toks[0] != "fn") fail(no, "expected a fn record, got '" + toks[0] + "'");
        out.push_back(fn_from_tokens(toks, no));
    }
    return out;
}

std::string write_function(const std::string& name, const BooleanFunction& f) {
    std::string out = "fn " + name + " arity=" + std::to_string(f.arity()) + " table=";
    if (f.is_boolean()) {
        out += f.bits();
    } else {
        out += '[';
        for (uint32_t t = 0; t < f.size(); ++t) {
            if (t) out += ',';
            out += rat_str(f.value(t));
        }
        out += ']';
    }
    return out + "\n";
}

BooleanFunction parse_table(const std::string& text) {
    try {
        return table_from_text(text, 1);
    } catch (const input_error& e) {
        // Bare tables come from command lines; the line prefix means nothing there.
        std::string msg = e.what();
        const std::string prefix = "line 1: ";
        if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
        throw input_error(msg);
    }
}

TupleHypergraph parse_hypergraph(const std::string& text) {
    TupleHypergraph h;
    bool seen_header = false;
    for (const auto& [no, toks] : logical_lines(text)) {
        if (!seen_header) {
            if (toks[0] != "hypergraph" || toks.size() != 3)
                fail(no, "expected: hypergraph n=<vertices> k=<arity>");
            h.n = parse_int(field_value(toks[1], "n", no), no);
            h.arity = parse_int(field_value(toks[2], "k", no), no);
            seen_header = true;
            continue;
        }
        if (toks[0] != "arc") fail(no, "expected an arc line, got '" + toks[0] + "'");
        if (int(toks.size()) - 1 != h.arity)
            fail(no, "arc has " + std::to_string(toks.size() - 1) + " vertices, arity is " +
                         std::to_string(h.arity));
        std::vector<int> arc;
        for (size_t i = 1; i < toks.size(); ++i) arc.push_back(parse_int(toks[i], no));
        h.arcs.push_back(std::move(arc));
    }
    if (!seen_header) fail(1, "missing hypergraph header");
    try {
        h.validate();
    } catch (const input_error& e) {
        throw input_error(std::string("hypergraph: ") + e.what());
    }
    return h;
}

std::string write_hypergraph(const TupleHypergraph& h) {
    std::string out =
        "hypergraph n=" + std::to_string(h.n) + " k=" + std::to_string(h.arity) + "\n";
    for (const auto& arc : h.arcs) {
        out += "arc";
        for (int v : arc) out += " " + std::to_string(v);
        out += "\n";
    }
    return out;
}

CspInstance parse_instance(const std::string& text, const FileLoader& load) {
    CspInstance inst;
    std::map<std::string, int> index;
    bool seen_header = false;
    auto add_fn = [&](NamedFunction nf, int no) {
        if (index.count(nf.name)) fail(no, "function '" + nf.name + "' defined twice");
        index[nf.name] = int(inst.language.size());
        inst.language.push_back(std::move(nf.fn));
        inst.names.push_back(std::move(nf.name));
    };
    for (const auto& [no, toks] : logical_lines(text)) {
        if (!seen_header) {
            if (toks[0] != "instance" || toks.size() < 2 || toks.size() > 3)
                fail(no, "expected: instance n=<vars> [repeatfree]");
            inst.n = parse_int(field_value(toks[1], "n", no), no);
            if (toks.size() == 3) {
                if (toks[2] != "repeatfree") fail(no, "unknown header flag '" + toks[2] + "'");
                inst.repeat_free = true;
            }
            seen_header = true;
            continue;
        }
        if (toks[0] == "fn") {
            add_fn(fn_from_tokens(toks, no), no);
        } else if (toks[0] == "use") {
            if (toks.size() != 2) fail(no, "expected: use <path>");
            if (!load) fail(no, "function file references are not available here");
            std::string body;
            try {
                body = load(toks[1]);
            } catch (const std::exception& e) {
                fail(no, "cannot load '" + toks[1] + "': " + e.what());
            }
            try {
                for (auto& nf : parse_functions(body)) add_fn(std::move(nf), no);
            } catch (const input_error& e) {
                fail(no, "in '" + toks[1] + "': " + e.what());
            }
        } else if (toks[0] == "c") {
            if (toks.size() < 2) fail(no, "expected: c <fname> v...");
            auto it = index.find(toks[1]);
            if (it == index.end()) fail(no, "constraint uses undeclared function '" + toks[1] + "'");
            Constraint c;
            c.fn = it->second;
            for (size_t i = 2; i < toks.size(); ++i) c.vars.push_back(parse_int(toks[i], no));
            if (int(c.vars.size()) != inst.language[size_t(c.fn)].arity())
                fail(no, "constraint has " + std::to_string(c.vars.size()) +
                             " variables, function '" + toks[1] + "' has arity " +
                             std::to_string(inst.language[size_t(c.fn)].arity()));
            inst.constraints.push_back(std::move(c));
        } else {
            fail(no, "unknown directive '" + toks[0] + "'");
        }
    }
    if (!seen_header) fail(1, "missing instance header");
    try {
        inst.validate();
    } catch (const input_error& e) {
        throw input_error(std::string("instance: ") + e.what());
    }
    return inst;
}

std::string write_instance(const CspInstance& inst) {
    std::string out = "instance n=" + std::to_string(inst.n);
    if (inst.repeat_free) out += " repeatfree";
    out += "\n";
    std::vector<std::string> names;
    for (size_t i = 0; i < inst.language.size(); ++i) {
        std::string name =
            i < inst.names.size() && !inst.names[i].empty() ? inst.names[i] : "f" + std::to_string(i);
        names.push_back(name);
        out += write_function(name, inst.language[i]);
    }
    for (const auto& c : inst.constraints) {
        out += "c " + names[size_t(c.fn)];
        for (int v : c.vars) out += " " + std::to_string(v);
        out += "\n";
    }
    return out;
}

BipartiteGraph parse_bipartite(const std::string& text) {
    BipartiteGraph g;
    bool seen_header = false;
    for (const auto& [no, toks] : logical_lines(text)) {
        if (!seen_header) {
            if (toks[0] != "bipartite" || toks.size() != 3)
                fail(no, "expected: bipartite nL=<a> nR=<b>");
            g.nl = parse_int(field_value(toks[1], "nL", no), no);
            g.nr = parse_int(field_value(toks[2], "nR", no), no);
            seen_header = true;
            continue;
        }
        if (toks[0] != "edge" || toks.size() != 3) fail(no, "expected: edge l r");
        g.edges.emplace_back(parse_int(toks[1], no), parse_int(toks[2], no));
    }
    if (!seen_header) fail(1, "missing bipartite header");
    try {
        g.validate();
    } catch (const input_error& e) {
        throw input_error(std::string("bipartite: ") + e.what());
    }
    return g;
}

std::string write_bipartite(const BipartiteGraph& g) {
    std::string out = "bipartite nL=" + std::to_string(g.nl) + " nR=" + std::to_string(g.nr) + "\n";
    for (auto [l, r] : g.edges) out += "edge " + std::to_string(l) + " " + std::to_string(r) + "\n";
    return out;
}

std::string format_marginals(const MarginalTable& m) {
    std::string out;
    int t = int(m.verts.size());
    for (uint32_t idx = 0; idx < m.probs.size(); ++idx) {
        std::string spins;
        for (int j = 0; j < t; ++j) spins += char('0' + (idx >> (t - 1 - j) & 1u));
        out += "p(" + spins + ")=" + rat_str(m.probs[idx]) + "\n";
    }
    return out;
}

}  // namespace ccsp

#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ccsp/csp.hpp"

namespace ccsp {

// Line-oriented text formats. Every parse error names the 1-based line it
// came from. Writers emit exactly what the parsers accept, so round trips
// are stable.

struct NamedFunction {
    std::string name;
    BooleanFunction fn;
};

// Function records: `fn <name> arity=<k> table=<bits>` with bit position 0
// holding the all-zeros input, or `table=[n/d,...]` for rational tables.
std::vector<NamedFunction> parse_functions(const std::string& text);
std::string write_function(const std::string& name, const BooleanFunction& f);

// A bare table as passed on a command line: either a bitstring or the
// bracketed rational form.
BooleanFunction parse_table(const std::string& text);

// `hypergraph n=<vertices> k=<arity>` then `arc v_1 ... v_k` per hyperarc.
TupleHypergraph parse_hypergraph(const std::string& text);
std::string write_hypergraph(const TupleHypergraph& h);

// `instance n=<vars> [repeatfree]`, inline `fn` records, `use <path>` pulls
// records from a function file through the supplied loader, `c <fname> v...`
// per constraint. Without a loader, `use` lines are rejected.
using FileLoader = std::function<std::string(const std::string&)>;
CspInstance parse_instance(const std::string& text, const FileLoader& load = {});
std::string write_instance(const CspInstance& inst);

// `bipartite nL=<a> nR=<b>` then `edge l r` per edge.
BipartiteGraph parse_bipartite(const std::string& text);
std::string write_bipartite(const BipartiteGraph& g);

// One `p(<spins>)=<fraction>` line per entry of a marginal table.
std::string format_marginals(const MarginalTable& m);

}  // namespace ccsp

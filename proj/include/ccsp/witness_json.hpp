#pragma once

#include <string>
#include <vector>

#include "ccsp/gadgets.hpp"

namespace ccsp {

// Self-contained JSON witness records (schema "ccsp-witness/1"): the function
// table, the gadget, any conditioning with its support certificates, the
// distinguished vertices, the claimed pair weights and the exact marginals,
// all rationals as strings. A record carries everything a replay needs; no
// synthesis logic is involved in checking one.

// Serialize a classification outcome. The witness is re-verified before
// anything is emitted; a witness that fails its own checks is an internal
// bug and throws. Inconclusive outcomes have nothing to replay and are
// rejected as input errors.
std::string write_witness_json(const std::string& name, const BooleanFunction& f,
                               const ClassificationWitness& w, const EnumOptions& opts = {});

struct WitnessReport {
    bool ok = false;
    std::string kind;
    std::string function_name;
    std::vector<std::string> checks;  // one "pass: ..." or "FAIL: ..." line each
};

// Replay a witness record: rebuild the function and gadget, recompute the
// marginals, compare them with the recorded ones exactly, re-check every
// support certificate and the kind's defining predicate. Malformed records
// raise input_error; well-formed records that fail a check come back with
// ok = false and the failing lines.
WitnessReport verify_witness_json(const std::string& text, const EnumOptions& opts = {});

}  // namespace ccsp

#pragma once

#include <gmpxx.h>
#include <stdexcept>
#include <string>

namespace ccsp {

// Exact arithmetic used everywhere: arbitrary-precision integers and
// rationals. No floating point appears in any verification path.
using Int = mpz_class;
using Rat = mpq_class;

// Bad user input: malformed files, precondition violations on data supplied
// from outside.
struct input_error : std::runtime_error {
    explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

// A configured cap was exceeded (vertex count, arity, search bound).
struct resource_error : std::runtime_error {
    explicit resource_error(const std::string& what) : std::runtime_error(what) {}
};

// A violated internal invariant. Seeing one of these is a bug.
struct internal_error : std::logic_error {
    explicit internal_error(const std::string& what) : std::logic_error(what) {}
};

// mpq_class(num, den) keeps the pair as-is; canonicalize to get a unique
// representation so operator== means numeric equality.
inline Rat make_rat(const Int& num, const Int& den) {
    if (den == 0) throw input_error("rational with zero denominator");
    Rat q(num, den);
    q.canonicalize();
    return q;
}

inline Rat make_rat(long num, long den = 1) {
    return make_rat(Int(num), Int(den));
}

// "3/4" or "3"; always canonical.
inline std::string rat_str(const Rat& q) {
    if (q.get_den() == 1) return q.get_num().get_str();
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Rat parse_rat(const std::string& text);

}  // namespace ccsp

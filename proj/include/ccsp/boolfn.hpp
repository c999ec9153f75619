#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ccsp/numeric.hpp"

namespace ccsp {

// Two index conventions are used throughout and conversion is always explicit:
//
//  - table index t: bit (k-1-j) of t holds argument j, so argument 0 is the
//    most significant bit. Table position 0 is the all-zeros input.
//  - argument mask m: bit j of m holds argument j. Used for sets of argument
//    positions (support sets, pin sets, linear-algebra rows).
//
// The two are bit reversals of each other. XOR, AND, OR and complement all
// commute with the reversal, so closure tests may run in either domain.
inline uint32_t set_of_point(uint32_t t, int k) {
    uint32_t m = 0;
    for (int j = 0; j < k; ++j)
        if (t >> (k - 1 - j) & 1u) m |= 1u << j;
    return m;
}
inline uint32_t point_of_set(uint32_t m, int k) { return set_of_point(m, k); }

// Compares bit masks as sorted index sequences: {0,2} < {1} because the
// sequences compare 0 < 1. Plain mask order would get this wrong.
bool set_lex_less(uint32_t a, uint32_t b);

// A function {0,1}^k -> Q>=0 stored as a full table of exact rationals.
// Functions with all values in {0,1} are flagged Boolean; those are the only
// ones the classification machinery accepts, but weighted tables participate
// in counting.
class BooleanFunction {
public:
    static constexpr int max_arity = 16;

    BooleanFunction(int arity, std::vector<Rat> table);
    static BooleanFunction from_bits(int arity, const std::string& bits);
    static BooleanFunction from_support(int arity, const std::vector<uint32_t>& points);

    int arity() const { return arity_; }
    uint32_t size() const { return uint32_t(1) << arity_; }
    const std::vector<Rat>& table() const { return table_; }
    bool is_boolean() const { return boolean_; }
    const Rat& value(uint32_t t) const { return table_[t]; }
    bool sat(uint32_t t) const { return sgn(table_[t]) > 0; }
    // Support as sorted table indices.
    const std::vector<uint32_t>& support() const { return support_; }
    // Support as argument masks, sorted ascending by mask value.
    std::vector<uint32_t> support_sets() const;

    std::string bits() const;       // Boolean tables only
    std::string table_str() const;  // comma-joined exact values, any table

    bool operator==(const BooleanFunction& o) const {
        return arity_ == o.arity_ && table_ == o.table_;
    }

private:
    int arity_;
    std::vector<Rat> table_;
    std::vector<uint32_t> support_;
    bool boolean_;
};

// The seven special symmetric functions, by arity:
//   zero: empty support            one: full support
//   allzero: only the all-0 point  allone: only the all-1 point
//   eq: the two constant points    even/odd: points of that parity of ones
BooleanFunction fn_zero(int k);
BooleanFunction fn_one(int k);
BooleanFunction fn_allzero(int k);
BooleanFunction fn_allone(int k);
BooleanFunction fn_equality(int k);
BooleanFunction fn_even(int k);
BooleanFunction fn_odd(int k);

BooleanFunction fn_delta(int s);  // arity 1, sole support point s
BooleanFunction fn_implies();     // 1101: x -> y
BooleanFunction fn_or2();
BooleanFunction fn_nand2();
BooleanFunction fn_xor2();
BooleanFunction fn_nae3();

enum class EasyTag { zero, one, allzero, allone, eq, even, odd };
const char* easy_tag_name(EasyTag t);
// Which of the seven special functions f equals, if any. Arities where two
// of them coincide (eq = even at k = 2, say) resolve to the first tag in
// declaration order.
std::optional<EasyTag> easy_k_member(const BooleanFunction& f);

// GF(2) system A x = b over the k arguments; row masks use argument-mask bit
// order. Rows are kept linearly independent, so the solution count is
// 2^(cols - rows) when consistent.
struct AffineSystem {
    int cols = 0;
    std::vector<uint32_t> rows;
    std::vector<int> rhs;

    bool accepts(uint32_t arg_mask) const;
    Int solution_count() const;
};

// True iff the support is empty or closed under a^b^c.
bool is_affine(const BooleanFunction& f);

// Linear system whose solution set is exactly the support. Requires an
// affine function with nonempty support; the two failure modes raise
// distinguishable errors.
AffineSystem affine_system(const BooleanFunction& f);

// True iff the support is closed under coordinatewise OR and AND.
bool is_in_im2(const BooleanFunction& f);

bool is_self_dual(const BooleanFunction& f);

// Semi-trivial: the support sets are exactly {T : S <= T <= [k]} (upward) or
// exactly {T : T <= S} (downward) for some argument set S.
struct SemiTrivialWitness {
    uint32_t set_mask = 0;
    bool upward = false;
};
std::optional<SemiTrivialWitness> is_semi_trivial(const BooleanFunction& f);

bool is_symmetric(const BooleanFunction& f);

// f*(x) = product over all argument permutations pi of f(x o pi). Depends
// only on the level of x: each level-l point contributes its value to the
// power l!(k-l)!. For Boolean f a level is live iff all its points are.
BooleanFunction symmetrise(const BooleanFunction& f, int max_arity = 6);

// f with arguments in zeros_mask fixed to 0 and ones_mask fixed to 1;
// surviving arguments keep their relative order.
BooleanFunction pin(const BooleanFunction& f, uint32_t zeros_mask, uint32_t ones_mask);

// f(x, y) = f1(x) * f2(y), arity k1 + k2, f1's arguments first.
BooleanFunction product_concat(const BooleanFunction& f1, const BooleanFunction& f2);

// Weighted binary function, the target shape for simulations.
struct BinaryWeightedFunction {
    Rat g00, g01, g10, g11;

    BinaryWeightedFunction();
    BinaryWeightedFunction(Rat a, Rat b, Rat c, Rat d);
    const Rat& at(int s, int t) const;
    Rat total() const { return g00 + g01 + g10 + g11; }
    bool operator==(const BinaryWeightedFunction&) const = default;
};

// Hardness test: g00 + g11 > 0, min{g00,g11}^2 < g01*g10 and
// max{g00,g11}^2 <= g01*g10. Squaring keeps everything rational; all values
// are nonnegative so the squared comparisons match the square-root form.
bool is_hard(const BinaryWeightedFunction& g);

}  // namespace ccsp

#include "ccsp/boolfn.hpp"

#include <algorithm>
#include <bit>
#include <cctype>

namespace ccsp {

Rat parse_rat(const std::string& text) {
    auto digits = [](const std::string& s) {
        if (s.empty()) return false;
        size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
        if (i == s.size()) return false;
        for (; i < s.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        return true;
    };
    auto slash = text.find('/');
    std::string num = text.substr(0, slash);
    std::string den = slash == std::string::npos ? "1" : text.substr(slash + 1);
    if (!digits(num) || !digits(den))
        throw input_error("malformed rational '" + text + "'");
    return make_rat(Int(num), Int(den));
}

bool set_lex_less(uint32_t a, uint32_t b) {
    while (a && b) {
        int ia = std::countr_zero(a), ib = std::countr_zero(b);
        if (ia != ib) return ia < ib;
        a &= a - 1;
        b &= b - 1;
    }
    return b != 0;
}

BooleanFunction::BooleanFunction(int arity, std::vector<Rat> table)
    : arity_(arity), table_(std::move(table)) {
    if (arity_ < 1 || arity_ > max_arity)
        throw input_error("arity " + std::to_string(arity_) + " out of range [1," +
                          std::to_string(max_arity) + "]");
    if (table_.size() != size())
        throw input_error("table has " + std::to_string(table_.size()) +
                          " entries, arity " + std::to_string(arity_) + " needs " +
                          std::to_string(size()));
    boolean_ = true;
    for (uint32_t t = 0; t < table_.size(); ++t) {
        int s = sgn(table_[t]);
        if (s < 0) throw input_error("negative table value at index " + std::to_string(t));
        if (s > 0) {
            support_.push_back(t);
            if (table_[t] != 1) boolean_ = false;
        }
    }
}

BooleanFunction BooleanFunction::from_bits(int arity, const std::string& bits) {
    std::vector<Rat> table;
    table.reserve(bits.size());
    for (char c : bits) {
        if (c != '0' && c != '1')
            throw input_error(std::string("bad character '") + c + "' in table bitstring");
        table.emplace_back(c - '0');
    }
    return BooleanFunction(arity, std::move(table));
}

BooleanFunction BooleanFunction::from_support(int arity, const std::vector<uint32_t>& points) {
    std::vector<Rat> table(size_t(1) << arity, Rat(0));
    for (uint32_t t : points) {
        if (t >= table.size()) throw input_error("support point out of range");
        table[t] = 1;
    }
    return BooleanFunction(arity, std::move(table));
}

std::vector<uint32_t> BooleanFunction::support_sets() const {
    std::vector<uint32_t> sets;
    sets.reserve(support_.size());
    for (uint32_t t : support_) sets.push_back(set_of_point(t, arity_));
    std::sort(sets.begin(), sets.end());
    return sets;
}

std::string BooleanFunction::bits() const {
    if (!boolean_) throw input_error("bitstring requested for a non-Boolean table");
    std::string s(table_.size(), '0');
    for (uint32_t t : support_) s[t] = '1';
    return s;
}

std::string BooleanFunction::table_str() const {
    std::string s;
    for (uint32_t t = 0; t < table_.size(); ++t) {
        if (t) s += ',';
        s += rat_str(table_[t]);
    }
    return s;
}

namespace {

BooleanFunction by_level(int k, bool (*live)(int l, int k)) {
    std::vector<uint32_t> pts;
    for (uint32_t t = 0; t < (uint32_t(1) << k); ++t)
        if (live(std::popcount(t), k)) pts.push_back(t);
    return BooleanFunction::from_support(k, pts);
}

}  // namespace

BooleanFunction fn_zero(int k) { return by_level(k, [](int, int) { return false; }); }
BooleanFunction fn_one(int k) { return by_level(k, [](int, int) { return true; }); }
BooleanFunction fn_allzero(int k) { return by_level(k, [](int l, int) { return l == 0; }); }
BooleanFunction fn_allone(int k) { return by_level(k, [](int l, int k2) { return l == k2; }); }
BooleanFunction fn_equality(int k) {
    return by_level(k, [](int l, int k2) { return l == 0 || l == k2; });
}
BooleanFunction fn_even(int k) { return by_level(k, [](int l, int) { return l % 2 == 0; }); }
BooleanFunction fn_odd(int k) { return by_level(k, [](int l, int) { return l % 2 == 1; }); }

BooleanFunction fn_delta(int s) { return BooleanFunction::from_bits(1, s ? "01" : "10"); }
BooleanFunction fn_implies() { return BooleanFunction::from_bits(2, "1101"); }
BooleanFunction fn_or2() { return BooleanFunction::from_bits(2, "0111"); }
BooleanFunction fn_nand2() { return BooleanFunction::from_bits(2, "1110"); }
BooleanFunction fn_xor2() { return BooleanFunction::from_bits(2, "0110"); }
BooleanFunction fn_nae3() { return BooleanFunction::from_bits(3, "01111110"); }

const char* easy_tag_name(EasyTag t) {
    switch (t) {
        case EasyTag::zero: return "zero";
        case EasyTag::one: return "one";
        case EasyTag::allzero: return "allzero";
        case EasyTag::allone: return "allone";
        case EasyTag::eq: return "eq";
        case EasyTag::even: return "even";
        case EasyTag::odd: return "odd";
    }
    return "?";
}

std::optional<EasyTag> easy_k_member(const BooleanFunction& f) {
    const int k = f.arity();
    const std::pair<EasyTag, BooleanFunction (*)(int)> entries[] = {
        {EasyTag::zero, fn_zero},   {EasyTag::one, fn_one},
        {EasyTag::allzero, fn_allzero}, {EasyTag::allone, fn_allone},
        {EasyTag::eq, fn_equality}, {EasyTag::even, fn_even},
        {EasyTag::odd, fn_odd},
    };
    for (const auto& [tag, build] : entries)
        if (f == build(k)) return tag;
    return std::nullopt;
}

bool AffineSystem::accepts(uint32_t arg_mask) const {
    for (size_t i = 0; i < rows.size(); ++i)
        if (std::popcount(rows[i] & arg_mask) % 2 != rhs[i]) return false;
    return true;
}

Int AffineSystem::solution_count() const {
    Int n = 1;
    mpz_mul_2exp(n.get_mpz_t(), n.get_mpz_t(), cols - int(rows.size()));
    return n;
}

bool is_affine(const BooleanFunction& f) {
    if (!f.is_boolean()) throw input_error("is_affine needs a Boolean table");
    const auto& sup = f.support();
    if (sup.empty()) return true;
    uint32_t basis[BooleanFunction::max_arity] = {};
    int rank = 0;
    for (uint32_t t : sup) {
        uint32_t v = t ^ sup[0];
        while (v) {
            int hb = 31 - std::countl_zero(v);
            if (!basis[hb]) {
                basis[hb] = v;
                ++rank;
                break;
            }
            v ^= basis[hb];
        }
    }
    // The difference set lives inside a rank-dimensional span; it is that
    // whole span (hence a subspace, hence the support is a coset) exactly
    // when the sizes agree.
    return sup.size() == size_t(1) << rank;
}

AffineSystem affine_system(const BooleanFunction& f) {
    if (f.support().empty()) throw input_error("empty relation has no linear system");
    if (!is_affine(f)) throw input_error("function is not affine");
    const int k = f.arity();
    const uint32_t a = set_of_point(f.support()[0], k);

    // Reduced echelon basis of the difference set, argument-mask coordinates,
    // pivots at lowest set bits.
    std::vector<uint32_t> pivot_row(k, 0);
    for (uint32_t t : f.support()) {
        uint32_t v = set_of_point(t, k) ^ a;
        while (v) {
            int p = std::countr_zero(v);
            if (!pivot_row[p]) {
                pivot_row[p] = v;
                break;
            }
            v ^= pivot_row[p];
        }
    }
    for (int p = 0; p < k; ++p)
        if (pivot_row[p])
            for (int q = 0; q < k; ++q)
                if (q != p && pivot_row[q] && (pivot_row[q] >> p & 1u))
                    pivot_row[q] ^= pivot_row[p];

    // One system row per free bit: the standard null-space basis of the span.
    AffineSystem sys;
    sys.cols = k;
    for (int j = 0; j < k; ++j) {
        if (pivot_row[j]) continue;
        uint32_t w = uint32_t(1) << j;
        for (int p = 0; p < k; ++p)
            if (pivot_row[p] && (pivot_row[p] >> j & 1u)) w |= uint32_t(1) << p;
        sys.rows.push_back(w);
        sys.rhs.push_back(std::popcount(w & a) % 2);
    }

    size_t accepted = 0;
    for (uint32_t t = 0; t < f.size(); ++t)
        if (sys.accepts(set_of_point(t, k))) {
            ++accepted;
            if (!f.sat(t)) throw internal_error("affine system accepts a non-support point");
        }
    if (accepted != f.support().size())
        throw internal_error("affine system misses support points");
    return sys;
}

bool is_in_im2(const BooleanFunction& f) {
    if (!f.is_boolean()) throw input_error("is_in_im2 needs a Boolean table");
    std::vector<char> in(f.size(), 0);
    for (uint32_t t : f.support()) in[t] = 1;
    const auto& sup = f.support();
    for (size_t i = 0; i < sup.size(); ++i)
        for (size_t j = i + 1; j < sup.size(); ++j) {
            if (!in[sup[i] | sup[j]]) return false;
            if (!in[sup[i] & sup[j]]) return false;
        }
    return true;
}

bool is_self_dual(const BooleanFunction& f) {
    const uint32_t mask = f.size() - 1;
    for (uint32_t t = 0; t < f.size(); ++t)
        if (f.value(t) != f.value(~t & mask)) return false;
    return true;
}

std::optional<SemiTrivialWitness> is_semi_trivial(const BooleanFunction& f) {
    if (!f.is_boolean()) throw input_error("is_semi_trivial needs a Boolean table");
    const int k = f.arity();
    auto sets = f.support_sets();
    std::vector<uint32_t> candidates(size_t(1) << k);
    for (uint32_t m = 0; m < candidates.size(); ++m) candidates[m] = m;
    std::sort(candidates.begin(), candidates.end(), set_lex_less);
    for (uint32_t s : candidates) {
        const int sz = std::popcount(s);
        if (sets.size() == size_t(1) << (k - sz)) {
            bool up = true;
            for (uint32_t u : sets)
                if ((u & s) != s) { up = false; break; }
            if (up) return SemiTrivialWitness{s, true};
        }
        if (sets.size() == size_t(1) << sz) {
            bool down = true;
            for (uint32_t u : sets)
                if ((u | s) != s) { down = false; break; }
            if (down) return SemiTrivialWitness{s, false};
        }
    }
    return std::nullopt;
}

bool is_symmetric(const BooleanFunction& f) {
    std::vector<const Rat*> level(f.arity() + 1, nullptr);
    for (uint32_t t = 0; t < f.size(); ++t) {
        int l = std::popcount(t);
        if (!level[l])
            level[l] = &f.value(t);
        else if (*level[l] != f.value(t))
            return false;
    }
    return true;
}

namespace {

Rat rat_pow(Rat q, unsigned long e) {
    Rat r;
    mpz_pow_ui(mpq_numref(r.get_mpq_t()), mpq_numref(q.get_mpq_t()), e);
    mpz_pow_ui(mpq_denref(r.get_mpq_t()), mpq_denref(q.get_mpq_t()), e);
    return r;  // canonical already: gcd(n,d)=1 implies gcd(n^e,d^e)=1
}

}  // namespace

BooleanFunction symmetrise(const BooleanFunction& f, int max_arity) {
    const int k = f.arity();
    if (k > max_arity)
        throw resource_error("symmetrise cap is arity " + std::to_string(max_arity) +
                             ", got " + std::to_string(k));
    unsigned long fact[BooleanFunction::max_arity + 1];
    fact[0] = 1;
    for (int i = 1; i <= k; ++i) fact[i] = fact[i - 1] * i;

    std::vector<Rat> levels(k + 1, Rat(1));
    for (uint32_t t = 0; t < f.size(); ++t) {
        int l = std::popcount(t);
        if (f.is_boolean()) {
            if (!f.sat(t)) levels[l] = 0;
        } else {
            levels[l] *= rat_pow(f.value(t), fact[l] * fact[k - l]);
        }
    }
    std::vector<Rat> table(f.size());
    for (uint32_t t = 0; t < f.size(); ++t) table[t] = levels[std::popcount(t)];
    return BooleanFunction(k, std::move(table));
}

BooleanFunction pin(const BooleanFunction& f, uint32_t zeros_mask, uint32_t ones_mask) {
    const int k = f.arity();
    const uint32_t all = (uint32_t(1) << k) - 1;
    if (zeros_mask & ones_mask) throw input_error("pin sets overlap");
    if ((zeros_mask | ones_mask) & ~all) throw input_error("pin set exceeds arity");
    std::vector<int> free_args;
    for (int j = 0; j < k; ++j)
        if (!((zeros_mask | ones_mask) >> j & 1u)) free_args.push_back(j);
    const int m = int(free_args.size());
    if (m == 0) throw input_error("pinning every argument leaves no function");

    uint32_t base = 0;
    for (int j = 0; j < k; ++j)
        if (ones_mask >> j & 1u) base |= uint32_t(1) << (k - 1 - j);
    std::vector<Rat> table(size_t(1) << m);
    for (uint32_t r = 0; r < table.size(); ++r) {
        uint32_t full = base;
        for (int i = 0; i < m; ++i)
            if (r >> (m - 1 - i) & 1u) full |= uint32_t(1) << (k - 1 - free_args[i]);
        table[r] = f.value(full);
    }
    return BooleanFunction(m, std::move(table));
}

BooleanFunction product_concat(const BooleanFunction& f1, const BooleanFunction& f2) {
    const int k1 = f1.arity(), k2 = f2.arity();
    if (k1 + k2 > BooleanFunction::max_arity)
        throw resource_error("product arity " + std::to_string(k1 + k2) + " exceeds table cap");
    std::vector<Rat> table(size_t(1) << (k1 + k2));
    for (uint32_t t1 = 0; t1 < f1.size(); ++t1)
        for (uint32_t t2 = 0; t2 < f2.size(); ++t2)
            table[(t1 << k2) | t2] = f1.value(t1) * f2.value(t2);
    return BooleanFunction(k1 + k2, std::move(table));
}

BinaryWeightedFunction::BinaryWeightedFunction() : g00(0), g01(0), g10(0), g11(0) {}

BinaryWeightedFunction::BinaryWeightedFunction(Rat a, Rat b, Rat c, Rat d)
    : g00(std::move(a)), g01(std::move(b)), g10(std::move(c)), g11(std::move(d)) {
    if (sgn(g00) < 0 || sgn(g01) < 0 || sgn(g10) < 0 || sgn(g11) < 0)
        throw input_error("binary function values must be nonnegative");
}

const Rat& BinaryWeightedFunction::at(int s, int t) const {
    return s ? (t ? g11 : g10) : (t ? g01 : g00);
}

bool is_hard(const BinaryWeightedFunction& g) {
    if (sgn(g.g00 + g.g11) <= 0) return false;
    const Rat& lo = g.g00 <= g.g11 ? g.g00 : g.g11;
    const Rat& hi = g.g00 <= g.g11 ? g.g11 : g.g00;
    Rat cross = g.g01 * g.g10;
    return lo * lo < cross && hi * hi <= cross;
}

}  // namespace ccsp

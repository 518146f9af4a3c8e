#ifndef HYRED_FIELD_HPP
#define HYRED_FIELD_HPP

#include "hyred/rational.hpp"
#include "hyred/gf2m.hpp"
#include "hyred/errors.hpp"

#include <memory>
#include <vector>
#include <optional>
#include <string>

namespace hyred {

class FieldElement;

// A fixed finite stage E = Q_2(zeta, pi) of the tower, pi^N = 2, residue
// field F_{2^m} presented by the canonical irreducible of degree m. Elements
// are known modulo valuation >= precision.
class FieldContext : public std::enable_shared_from_this<FieldContext> {
public:
    static std::shared_ptr<const FieldContext> make(int N, int m, Rat precision,
                                                    int ext_budget = 24);

    int N() const { return N_; }
    int m() const { return m_; }
    Rat precision() const { return prec_; }
    int budget() const { return budget_; }
    int bits() const { return W_; }
    const GF2m& gf() const { return gf_; }
    uint64_t id() const { return id_; }
    uint64_t coeff_mask() const { return mask_; }

    // New context with N' = lcm-type growth; checks the budget.
    std::shared_ptr<const FieldContext> enlarged(int newN, int newm,
                                                 const char* op) const;

    FieldElement zero() const;
    FieldElement one() const;
    FieldElement from_integer(long long v) const;
    FieldElement from_rational(long long num, long long den) const;
    // 2^lambda, lambda*N must be integral
    FieldElement two_pow(Rat lambda) const;
    FieldElement pi() const;
    FieldElement lift(uint32_t residue) const;

private:
    FieldContext(int N, int m, Rat prec, int budget);
    int N_, m_, budget_, W_;
    Rat prec_;
    GF2m gf_;
    uint64_t mask_;
    uint64_t id_;
};

using Ctx = std::shared_ptr<const FieldContext>;

enum class Cmp { equal_exact, distinct, indistinguishable };

// Element of the tower: pi^off * sum_{j<m, i<N} c[j*N+i] T^j pi^i with the
// integer digits c known modulo 2^W; absolute precision tracked in `valid`.
class FieldElement {
public:
    FieldElement() = default;
    FieldElement(Ctx ctx, int off, std::vector<uint64_t> coeffs, Rat valid);

    const Ctx& context() const { return ctx_; }
    bool has_context() const { return (bool)ctx_; }

    // valuation, or nullopt when indistinguishable from 0 at precision
    std::optional<Rat> valuation() const;
    Rat valid_precision() const { return valid_; }
    bool is_exact_zero() const;
    // zero at working precision (valuation() empty)
    bool is_zero_at_precision() const { return !valuation().has_value(); }
    bool is_unit() const { auto v = valuation(); return v && v->n == 0; }

    FieldElement operator+(const FieldElement& o) const;
    FieldElement operator-(const FieldElement& o) const;
    FieldElement operator*(const FieldElement& o) const;
    FieldElement operator-() const;
    FieldElement inv() const;
    FieldElement operator/(const FieldElement& o) const { return *this * o.inv(); }
    FieldElement& operator+=(const FieldElement& o) { return *this = *this + o; }
    FieldElement& operator-=(const FieldElement& o) { return *this = *this - o; }
    FieldElement& operator*=(const FieldElement& o) { return *this = *this * o; }

    // multiply by 2^lambda exactly
    FieldElement scale_two_pow(Rat lambda) const;

    // same element with its known precision capped at v
    FieldElement clamped(Rat v) const;

    Cmp compare(const FieldElement& o) const;

    // residue in F_{2^m}; requires valuation >= 0
    uint32_t residue() const;

    // square root via residue Frobenius + digit climb + Hensel; throws
    // ExtensionRequired for parity/Artin-Schreier obstructions and
    // NoTowerElement when the approximation provably creeps forever.
    FieldElement sqrt() const;

    // re-embed into a compatible larger context (old N | new N, old m | new m)
    FieldElement embed(const Ctx& target) const;

    std::string str() const;

private:
    friend class FieldContext;
    void normalize();
    static void align(FieldElement& a, FieldElement& b);
    Ctx ctx_;
    int off_ = 0;
    std::vector<uint64_t> c_;
    Rat valid_{0};
};

// sqrt with automatic context enlargement; returns the root and the possibly
// enlarged context through `io_ctx`, re-embedding `x` as needed.
FieldElement sqrt_auto(FieldElement x, Ctx& io_ctx, const char* where);

} // namespace hyred

#endif

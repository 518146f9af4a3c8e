#ifndef HYRED_LAURENT_HPP
#define HYRED_LAURENT_HPP

#include "hyred/field.hpp"

#include <map>
#include <vector>
#include <optional>

namespace hyred {

// Residue Laurent polynomial over F_{2^m}.
struct ResidueLaurent {
    const GF2m* F = nullptr;
    std::map<int, uint32_t> coeffs;

    bool zero() const { return coeffs.empty(); }
    bool is_monomial() const { return coeffs.size() == 1; }
    // squares in k[x^{±1}] for perfect k: even exponents suffice
    bool is_square() const;
    ResidueLaurent sqrt() const; // precondition: is_square()
    ResidueLaurent operator+(const ResidueLaurent& o) const;
    ResidueLaurent operator*(const ResidueLaurent& o) const;
    bool operator==(const ResidueLaurent& o) const { return coeffs == o.coeffs; }
    std::string str() const;
};

// Solve t^2 + h t = c in k[x^{±1}]; support window from the term bounds of h
// and c. Returns all of: no solution, or one solution (the full solution set
// is {t, t + h}).
std::optional<ResidueLaurent> artin_schreier_solve(const ResidueLaurent& c,
                                                   const ResidueLaurent& h);

struct NewtonPolygon {
    // lower convex hull vertices of {(i, v(a_i))}, exponents increasing
    std::vector<std::pair<int, Rat>> vertices;
    std::vector<Rat> slopes() const;
};

// Finite-support Laurent polynomial over the tower field.
class LaurentPoly {
public:
    LaurentPoly() = default;
    explicit LaurentPoly(Ctx ctx) : ctx_(std::move(ctx)) {}

    const Ctx& context() const { return ctx_; }
    const std::map<int, FieldElement>& coeffs() const { return c_; }
    bool empty() const { return c_.empty(); }

    void set(int exp, const FieldElement& v);
    FieldElement get(int exp) const;
    void add_to(int exp, const FieldElement& v);

    static LaurentPoly monomial(const Ctx& ctx, int exp, const FieldElement& v);
    static LaurentPoly from_ints(const Ctx& ctx, const std::vector<std::pair<int, long long>>& terms);

    // minimum coefficient valuation; nullopt when every coefficient is
    // indistinguishable from zero
    std::optional<Rat> val() const;
    int min_exp() const;
    int max_exp() const;
    bool is_polynomial() const { return c_.empty() || min_exp() >= 0; }
    bool is_odd_support() const;
    bool is_even_support() const;

    LaurentPoly operator+(const LaurentPoly& o) const;
    LaurentPoly operator-(const LaurentPoly& o) const;
    LaurentPoly operator*(const LaurentPoly& o) const;
    LaurentPoly operator-() const;
    LaurentPoly scaled(const FieldElement& s) const;

    std::pair<LaurentPoly, LaurentPoly> parity_split() const; // (even, odd)
    // f(2^lambda u)
    LaurentPoly substitute_scale(Rat lambda) const;
    // x -> a x + b (polynomial part only)
    LaurentPoly substitute_affine(const FieldElement& a, const FieldElement& b) const;
    // x -> 2^alpha / x  (exponent sign flip with scaling)
    LaurentPoly substitute_inverse_scale(Rat alpha) const;
    LaurentPoly shift_exponents(int k) const; // multiply by x^k

    FieldElement evaluate(const FieldElement& x) const; // polynomial part only

    NewtonPolygon newton_polygon() const;
    ResidueLaurent reduce() const; // requires val >= 0

    // drop coefficients that are zero at working precision; asserts none of
    // the dropped ones had known valuation (they are all ~0)
    LaurentPoly pruned() const;

    LaurentPoly embed(const Ctx& target) const;

    std::string str() const;

private:
    Ctx ctx_;
    std::map<int, FieldElement> c_;
};

// derivative d/dx (Laurent)
LaurentPoly derivative(const LaurentPoly& f);

// resultant of two polynomials via the Sylvester matrix (used for the
// genus-2 discriminant and for root-distance Newton polygons)
FieldElement resultant(const LaurentPoly& f, const LaurentPoly& g);
FieldElement poly_discriminant(const LaurentPoly& f);

} // namespace hyred

#endif

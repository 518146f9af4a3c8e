#ifndef HYRED_GF2M_HPP
#define HYRED_GF2M_HPP

#include <cstdint>
#include <vector>
#include <optional>
#include <string>

namespace hyred {

// Arithmetic in F_{2^m}, m <= 24, elements as bitmasks over the polynomial
// basis 1, t, ..., t^{m-1} modulo a fixed irreducible polynomial over F_2.
// The modulus is the lexicographically first irreducible of degree m, so a
// given m always presents the same field.
class GF2m {
public:
    explicit GF2m(int m);

    int degree() const { return m_; }
    uint32_t modulus() const { return (uint32_t)mod_; }

    static bool is_irreducible(uint64_t poly, int m);
    static uint64_t first_irreducible(int m);

    uint32_t add(uint32_t a, uint32_t b) const { return a ^ b; }
    uint32_t mul(uint32_t a, uint32_t b) const;
    uint32_t sqr(uint32_t a) const { return mul(a, a); }
    uint32_t inv(uint32_t a) const;
    uint32_t pow(uint32_t a, uint64_t e) const;
    // Frobenius inverse: the unique square root.
    uint32_t sqrt(uint32_t a) const;
    int trace(uint32_t a) const;
    // Solve t^2 + t = c; exists iff trace(c) == 0. Returns one solution
    // (the other is t+1).
    std::optional<uint32_t> solve_artin_schreier(uint32_t c) const;

private:
    int m_;
    uint64_t mod_; // bit m set plus low terms
    // column j of the F_2-linear map t -> t^2 + t, plus solver data
    std::vector<uint32_t> as_cols_;
    std::vector<uint32_t> as_rowspace_;  // row-reduced [map | rhs-tracker]
    std::vector<uint32_t> as_solution_;  // particular solution per pivot
    std::vector<int> as_pivot_;
    void build_as_solver();
};

// Dense polynomials over GF(2^m); coefficient i at index i.
using GFPoly = std::vector<uint32_t>;

struct GFPolyOps {
    const GF2m* F;
    explicit GFPolyOps(const GF2m& f) : F(&f) {}

    static void trim(GFPoly& p) { while (!p.empty() && p.back() == 0) p.pop_back(); }
    static int deg(const GFPoly& p) { return (int)p.size() - 1; } // -1 for zero
    static bool is_zero(const GFPoly& p) { return p.empty(); }

    GFPoly add(const GFPoly& a, const GFPoly& b) const;
    GFPoly mul(const GFPoly& a, const GFPoly& b) const;
    GFPoly scale(const GFPoly& a, uint32_t c) const;
    // division by nonzero b; returns quotient, stores remainder
    GFPoly divmod(const GFPoly& a, const GFPoly& b, GFPoly& rem) const;
    GFPoly mod(const GFPoly& a, const GFPoly& b) const;
    GFPoly gcd(GFPoly a, GFPoly b) const;
    GFPoly monic(const GFPoly& a) const;
    GFPoly derivative(const GFPoly& a) const;
    GFPoly pow_mod(const GFPoly& a, uint64_t e, const GFPoly& f) const;
    // coefficient-wise Frobenius square composed with x -> x^2 reduction:
    // returns a(x)^2 mod f
    GFPoly sqr_mod(const GFPoly& a, const GFPoly& f) const;
    uint32_t eval(const GFPoly& a, uint32_t x) const;

    // full squarefree factorization, char-2 aware: returns (factor, mult)
    std::vector<std::pair<GFPoly, int>> squarefree(const GFPoly& f) const;
    // irreducible factorization of a monic squarefree polynomial
    std::vector<GFPoly> factor_squarefree(const GFPoly& f) const;
    // complete factorization: monic irreducibles with multiplicity; the
    // leading coefficient is returned separately
    std::vector<std::pair<GFPoly, int>> factor(const GFPoly& f, uint32_t& lead) const;
    // all roots in F_{2^m} with multiplicities
    std::vector<std::pair<uint32_t, int>> roots(const GFPoly& f) const;
    bool irreducible(const GFPoly& f) const;
};

std::string gf_to_string(const GF2m& F, uint32_t a);

} // namespace hyred

#endif

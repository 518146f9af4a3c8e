#ifndef HYRED_POLYFACT_HPP
#define HYRED_POLYFACT_HPP

#include "hyred/field.hpp"
#include "hyred/laurent.hpp"

#include <vector>

namespace hyred {

// dense polynomial, coefficient i at index i
using FPoly = std::vector<FieldElement>;

FPoly fp_from_laurent(const LaurentPoly& f);            // requires min_exp >= 0
LaurentPoly fp_to_laurent(const Ctx& ctx, const FPoly& f);
int fp_deg(const FPoly& f);                              // drops exact-zero lead
FPoly fp_mul(const FPoly& a, const FPoly& b);
FPoly fp_add(const FPoly& a, const FPoly& b);
FPoly fp_sub(const FPoly& a, const FPoly& b);
// division by a polynomial with invertible leading coefficient
FPoly fp_divmod(const FPoly& a, const FPoly& b, FPoly& rem);
FieldElement fp_eval(const FPoly& f, const FieldElement& x);
std::optional<Rat> fp_content_val(const FPoly& f);

// Hensel lifting of a coprime residue factorization [f] = [A0]*[B0] with A0
// monic; returns (A, B) with f = A*B at working precision, A monic of the
// same degree as A0. Throws PrecisionExhausted if the lift stalls.
std::pair<FPoly, FPoly> hensel_lift_pair(const Ctx& ctx, const FPoly& f,
                                         const GFPoly& A0, const GFPoly& B0);

struct TowerFactor {
    FPoly poly;             // monic
    int multiplicity = 1;
    bool certified_irreducible = false;
    bool inexact_cluster = false; // roots indistinguishable at precision
    Rat root_valuation{0};  // common valuation of its roots (single slope)
    int residue_degree = 1; // degree of the rescaled residue irreducible
    FieldElement cluster_center; // best known center (clusters)
};

struct FactorOutcome {
    std::vector<TowerFactor> factors;
    FieldElement unit;      // f = unit * x^k * prod(factors^mult), x^k included
    int power_of_x = 0;
};

// Factorization over the fixed context. When `best_effort` is false, demands
// for a larger tower stage surface as ExtensionRequired; when true they are
// returned as uncertified factors.
FactorOutcome factor_over_tower(const Ctx& ctx, FPoly f, bool best_effort);

struct RootRec {
    FieldElement root;
    int multiplicity = 1;
    bool inexact_cluster = false;
};

struct UnresolvedFactor {
    Rat root_valuation{0};
    int degree = 0;
    std::string reason;
    // best approximation of the roots' common neighborhood, precision-clamped
    // to the refinement depth reached
    FieldElement approx_center;
    bool has_center = false;
};

struct RootsOutcome {
    std::vector<RootRec> roots;
    std::vector<UnresolvedFactor> unresolved;
    Ctx ctx; // possibly enlarged
};

// Roots in tower stages of total degree <= the context budget; auto-enlarges
// the context, reports unsplittable factors instead of dropping them.
RootsOutcome find_roots(Ctx ctx, const LaurentPoly& p);

} // namespace hyred

#endif

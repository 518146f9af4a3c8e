#ifndef HYRED_STABILITY_HPP
#define HYRED_STABILITY_HPP

#include "hyred/polyfact.hpp"

namespace hyred {

// Symbolic data of the truncated square-root expansion
//   f(x0+y)/f(x0) = H(x0,y)^2 + G(x0,y),
// cleared of denominators: Nk = f^k H_k and Mk = f^k G_k are polynomials.
struct StabilityData {
    FPoly f;
    int d = 0;
    int two_m = 1;                 // the power of two with d/2 < 2^m <= d
    std::vector<FPoly> Nk;         // k = 0 .. floor(d/2)
    std::vector<FPoly> Mk;         // index k - (floor(d/2)+1), k = floor(d/2)+1 .. d
    FPoly S;                       // stability polynomial = M_{2^m}
    const FPoly& M_of(int k) const { return Mk[(size_t)(k - d / 2 - 1)]; }
};

StabilityData stability_expand(const LaurentPoly& f);

// the unique eps > 0 with min_k (v(G_k(xi0)) + eps*k) = 2; requires f(xi0)
// to be a unit
Rat epsilon_at(const StabilityData& sd, const FieldElement& xi0);

// the same envelope solution with the v(f(xi0))-correction built in
// (v(G_k) = v(M_k) - k v(f)); defined for any xi0 with v(f(xi0)) known.
// This is the reference-coordinate radius of Algorithm Step 1; a chart with
// x = a*y + b sees eps_chart = eps_raw - v(a). vf_hint supplies v(f(xi0))
// when evaluation in Horner form cannot read it (it is precision-optimal to
// compute it as a sum of distances to the branch points).
std::optional<Rat> epsilon_raw(const StabilityData& sd, const FieldElement& xi0,
                               std::optional<Rat> vf_hint = std::nullopt);

// v(f(xi)) as v(lead) + sum of v(xi - root); readable whenever every distance
// is, which beats direct evaluation near the branch locus
std::optional<Rat> vf_from_roots(const FieldElement& xi,
                                 const std::vector<FieldElement>& roots,
                                 const FieldElement& lead, bool infinity_branch);

struct TypeDSite {
    FieldElement xi;
    Rat eps{0};
    // center known to depth >= eps (sharp) or merely deep enough to locate
    // the component (rough); rough sites carry no usable chart
    bool rough = false;
};

struct TypeDSearch {
    std::vector<TypeDSite> sites;          // deduplicated
    std::vector<UnresolvedFactor> unresolved;
    std::vector<std::string> diagnostics;
    Ctx ctx;
};

// integral zeros of S with eps > 0, deduplicated by v(xi_j - xi_i) >= eps_i
// keeping the first in a deterministic order; roots beyond the budget are
// reported as rough sites (when their centers locate them) or unresolved,
// never dropped. branch_roots, when given, supply the distance-based v(f).
TypeDSearch type_d_sites(Ctx ctx, const StabilityData& sd,
                         const std::vector<FieldElement>* branch_roots = nullptr);

// verifies S_{c f(a x + b)} = (a c)^{2^m} S_f(a x0 + b) at precision
bool substitution_equivariance_check(const LaurentPoly& f, const FieldElement& a,
                                     const FieldElement& b, const FieldElement& c);

} // namespace hyred

#endif

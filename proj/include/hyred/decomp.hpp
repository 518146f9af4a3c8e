#ifndef HYRED_DECOMP_HPP
#define HYRED_DECOMP_HPP

#include "hyred/laurent.hpp"
#include "hyred/polyfact.hpp"

namespace hyred {

enum class DecompKind { odd, optimal, truncated };

// min{2, v(g)} together with the "exceeds 2" marker
struct WClass {
    Rat value{0};
    bool exceeds_two = false;
    bool operator==(const WClass& o) const {
        return value == o.value && exceeds_two == o.exceeds_two;
    }
};

WClass w_class_of(const LaurentPoly& g);

struct Decomposition {
    LaurentPoly h, g;
    DecompKind kind = DecompKind::odd;
    WClass wc;
};

// coefficient at exponent e multiplied by (-1)^{floor(e/2)}; the involution
// exchanging the two binary quadratic forms A^2 +/- Y B^2
LaurentPoly quarter_twist(const LaurentPoly& f);
// f(-x)
LaurentPoly sigma_flip(const LaurentPoly& f);

// q with q(x) q(-x) = p(x) for even p with val(p) >= 0; enlarges the context
// as needed and throws NoTowerElement when no tower stage can hold q.
LaurentPoly split_even_square(Ctx& io_ctx, const LaurentPoly& p);

// f = h^2 + g with g odd, both integral (val(f) = 0 required)
Decomposition odd_decomposition(Ctx& io_ctx, const LaurentPoly& f);

struct OptCheck {
    bool optimal = false;
    bool has_witness = false;
    // the AS solution exists only over the quadratic residue extension; the
    // caller must enlarge m and redo (any solution over the algebraic closure
    // lies in F_{2^{2m}}, since the solution set {t, t+h} is Galois-stable)
    bool needs_residue_extension = false;
    ResidueLaurent witness; // sqrt of [g/2^v] (v<2) or the AS solution (v=2)
};

OptCheck is_optimal(const LaurentPoly& f, const Decomposition& d);

// strictly increases v(g) using the witness from is_optimal
Decomposition improve(Ctx& io_ctx, const LaurentPoly& f, const Decomposition& d,
                      const ResidueLaurent& witness, Rat vg);

Decomposition optimal_decomposition(Ctx& io_ctx, const LaurentPoly& f);

// f in R^x + R[x]x + m[x^-1]x^-1 -> (f1, f2) with f1 in R^x + R[x]x,
// f2 in R^x + m[x^-1]x^-1, f2(0) = 1 exactly
std::pair<LaurentPoly, LaurentPoly> hensel_split(const LaurentPoly& f);

// h := h1(x) * h2(2^alpha / x) from decompositions of f1 (in x) and f2 (in y),
// g := f - h^2
Decomposition combine_decomps(const LaurentPoly& f, const Decomposition& d1,
                              const Decomposition& d2, Rat alpha, DecompKind kind);

// degree-d polynomial with nonzero constant term: h = truncation of the
// square-root series at d/2, g = f - h^2
Decomposition truncated_decomposition(Ctx& io_ctx, const LaurentPoly& f);

// test-support oracle: brute-force w(f) capped at `cap`, maximizing v(f-h^2)
// over h with support inside [lo, hi] and coefficients enumerated to depth
// `coeff_bits` (only meaningful for N = 1 contexts)
Rat brute_force_w(const LaurentPoly& f, int lo, int hi, int coeff_bits, Rat cap);

} // namespace hyred

#endif

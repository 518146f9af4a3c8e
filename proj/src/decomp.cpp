#include "hyred/decomp.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <memory>

namespace hyred {

WClass w_class_of(const LaurentPoly& g) {
    auto v = g.val();
    if (!v || *v > Rat(2)) return {Rat(2), true};
    return {*v, false};
}

LaurentPoly quarter_twist(const LaurentPoly& f) {
    LaurentPoly r(f.context());
    for (auto& [e, c] : f.coeffs()) {
        long long em = ((e % 4) + 4) % 4;
        r.set(e, (em == 2 || em == 3) ? -c : c);
    }
    return r;
}

LaurentPoly sigma_flip(const LaurentPoly& f) {
    LaurentPoly r(f.context());
    for (auto& [e, c] : f.coeffs()) r.set(e, (e % 2 != 0) ? -c : c);
    return r;
}

namespace {

// ---------------------------------------------------------------------------
// dense F_2 linear solver: unknowns and results are residue Laurent
// polynomials on fixed exponent windows

struct F2System {
    const GF2m* F;
    int ulo, uhi; // unknown window
    int rlo, rhi; // result window
    std::vector<std::vector<uint64_t>> cols;
    std::vector<uint64_t> rhs;
    size_t words;

    F2System(const GF2m& f, int ul, int uh, int rl, int rh)
        : F(&f), ulo(ul), uhi(uh), rlo(rl), rhi(rh) {
        int nrows = (rhi - rlo + 1) * F->degree();
        words = (size_t)(nrows + 63) / 64;
        cols.assign((size_t)(uhi - ulo + 1) * F->degree(),
                    std::vector<uint64_t>(words, 0));
        rhs.assign(words, 0);
    }
    void put(std::vector<uint64_t>& v, int e, int b) {
        int r = (e - rlo) * F->degree() + b;
        v[(size_t)r / 64] ^= 1ull << (r % 64);
    }
    void add_column_term(int ue, int ub, const ResidueLaurent& image) {
        auto& col = cols[(size_t)(ue - ulo) * F->degree() + ub];
        for (auto& [e, c] : image.coeffs)
            for (int b = 0; b < F->degree(); ++b)
                if (c & (1u << b)) put(col, e, b);
    }
    void set_rhs(const ResidueLaurent& c) {
        for (auto& [e, cc] : c.coeffs)
            for (int b = 0; b < F->degree(); ++b)
                if (cc & (1u << b)) put(rhs, e, b);
    }
    std::optional<ResidueLaurent> solve() {
        int ncols = (int)cols.size();
        int nrows = (rhi - rlo + 1) * F->degree();
        size_t cwords = (size_t)(ncols + 63) / 64;
        std::vector<std::vector<uint64_t>> comb((size_t)ncols,
                                                std::vector<uint64_t>(cwords, 0));
        for (int i = 0; i < ncols; ++i) comb[(size_t)i][(size_t)i / 64] = 1ull << (i % 64);
        std::vector<uint64_t> x(cwords, 0);
        auto bit = [&](const std::vector<uint64_t>& v, int r) {
            return (v[(size_t)r / 64] >> (r % 64)) & 1;
        };
        int rank = 0;
        for (int r = 0; r < nrows && rank < ncols; ++r) {
            int sel = -1;
            for (int i = rank; i < ncols; ++i)
                if (bit(cols[(size_t)i], r)) { sel = i; break; }
            if (sel < 0) continue;
            std::swap(cols[(size_t)sel], cols[(size_t)rank]);
            std::swap(comb[(size_t)sel], comb[(size_t)rank]);
            for (int i = 0; i < ncols; ++i) {
                if (i == rank) continue;
                if (bit(cols[(size_t)i], r)) {
                    for (size_t w = 0; w < words; ++w) cols[(size_t)i][w] ^= cols[(size_t)rank][w];
                    for (size_t w = 0; w < cwords; ++w) comb[(size_t)i][w] ^= comb[(size_t)rank][w];
                }
            }
            if (bit(rhs, r)) {
                for (size_t w = 0; w < words; ++w) rhs[w] ^= cols[(size_t)rank][w];
                for (size_t w = 0; w < cwords; ++w) x[w] ^= comb[(size_t)rank][w];
            }
            ++rank;
        }
        for (size_t w = 0; w < words; ++w)
            if (rhs[w]) return std::nullopt;
        ResidueLaurent t;
        t.F = F;
        int m = F->degree();
        for (int e = ulo; e <= uhi; ++e) {
            uint32_t v = 0;
            for (int b = 0; b < m; ++b) {
                int idx = (e - ulo) * m + b;
                if ((x[(size_t)idx / 64] >> (idx % 64)) & 1) v |= 1u << b;
            }
            if (v) t.coeffs[e] = v;
        }
        return t;
    }
};

LaurentPoly lift_residue(const Ctx& ctx, const ResidueLaurent& r) {
    LaurentPoly p(ctx);
    for (auto& [e, c] : r.coeffs) p.set(e, ctx->lift(c));
    return p;
}

struct ClimbStuck {
    std::string where;
};

// Solve q(x) q(-x) = (-1)^{n + flip} M(x) for an even polynomial M with
// val(M) = 0 and supp(M) in [2*wlo, 2*whi] (n = whi), by a residue digit
// climb. Throws ExtensionRequired on digit-parity demands and ClimbStuck
// when the linear level system is insoluble at this stage.
LaurentPoly sigma_norm_half_stage(const Ctx& K, const LaurentPoly& M, bool flip) {
    int wlo = M.min_exp() / 2, whi = M.max_exp() / 2;
    bool neg = (((whi % 2 + 2) % 2) == 1) != flip;
    LaurentPoly T = neg ? -M : M;
    // start: residue square root of [M]
    ResidueLaurent Mr = M.reduce();
    LaurentPoly q = lift_residue(K, Mr.sqrt());
    Rat target = K->precision() + Rat(2);
    int iters = 0;
    const GF2m& F = K->gf();
    while (true) {
        LaurentPoly phi = (q * sigma_flip(q) - T).pruned();
        auto ve = phi.val();
        if (!ve || *ve >= target) break;
        Rat e = *ve;
        if (e < Rat(2)) {
            Rat half = e / Rat(2);
            if (!(half * Rat(K->N())).is_integer())
                throw ExtensionRequired(2 * K->N(), K->m(), "sigma_norm_half (digit parity)");
            ResidueLaurent lead;
            {
                LaurentPoly scaled(K);
                for (auto& [ee, c] : phi.coeffs()) scaled.set(ee, c.scale_two_pow(-e));
                lead = scaled.reduce();
            }
            if (!lead.is_square())
                throw HyredError("sigma_norm_half: non-square digit");
            q = q + lift_residue(K, lead.sqrt()).scaled(K->two_pow(half));
        } else {
            // level system: CROSS(l) (+ SQ(l) when e == 2) = [phi / 2^e]
            ResidueLaurent rhs;
            {
                LaurentPoly scaled(K);
                for (auto& [ee, c] : phi.coeffs()) scaled.set(ee, c.scale_two_pow(-e));
                rhs = scaled.reduce();
            }
            bool with_square = (e == Rat(2));
            F2System sys(F, wlo, whi, std::min(2 * wlo, wlo), std::max(2 * whi, whi) + 1);
            for (int ue = wlo; ue <= whi; ++ue)
                for (int ub = 0; ub < F.degree(); ++ub) {
                    // image of the basis unknown l = t^ub x^ue
                    LaurentPoly l = LaurentPoly::monomial(K, ue, K->lift(1u << ub));
                    LaurentPoly cross = q * sigma_flip(l) + sigma_flip(q) * l;
                    // all coefficients of cross are even; halve exactly
                    LaurentPoly crossh(K);
                    for (auto& [ee, c] : cross.coeffs())
                        crossh.set(ee, c.scale_two_pow(Rat(-1)));
                    ResidueLaurent img = crossh.reduce();
                    if (with_square) {
                        ResidueLaurent sq;
                        sq.F = &F;
                        sq.coeffs[2 * ue] = F.sqr(1u << ub);
                        img = img + sq;
                    }
                    sys.add_column_term(ue, ub, img);
                }
            sys.set_rhs(rhs);
            auto sol = sys.solve();
            if (!sol) throw ClimbStuck{"sigma_norm_half level system"};
            Rat s = (e == Rat(2)) ? Rat(1) : e - Rat(1);
            q = q + lift_residue(K, *sol).scaled(K->two_pow(s));
        }
        if (++iters > 8 * K->bits() * K->N() + 64)
            throw PrecisionExhausted("sigma_norm_half");
    }
    return q;
}

// escalation ladder: stages (N', m') multiples of the current stage within
// the budget, ordered by total degree
std::vector<std::pair<int, int>> stage_ladder(const Ctx& K) {
    std::vector<std::pair<int, int>> out;
    for (int a = 1; a <= 16; a *= 2)
        for (int b = 1; b <= 16; b *= 2) {
            if (a == 1 && b == 1) continue;
            long long N = (long long)K->N() * a, m = (long long)K->m() * b;
            if (N * m <= K->budget()) out.emplace_back((int)N, (int)m);
        }
    std::sort(out.begin(), out.end(), [](auto& x, auto& y) {
        return (long long)x.first * x.second < (long long)y.first * y.second;
    });
    return out;
}

} // namespace

LaurentPoly split_even_square(Ctx& io_ctx, const LaurentPoly& p_in) {
    LaurentPoly p = p_in.pruned();
    if (p.empty()) throw HyredError("split_even_square: p ~ 0");
    if (!p.is_even_support()) throw HyredError("split_even_square: p not even");
    auto vp = p.val();
    if (!vp || *vp < Rat(0)) throw HyredError("split_even_square: val(p) < 0");

    auto attempt = [&](const Ctx& K, bool flip) -> LaurentPoly {
        LaurentPoly pp = p.embed(K);
        int t2 = pp.min_exp();
        int t = t2 / 2;
        LaurentPoly shifted = pp.shift_exponents(-t2);
        Rat content = *shifted.val();
        LaurentPoly M(K);
        for (auto& [e, c] : shifted.coeffs()) M.set(e, c.scale_two_pow(-content));
        int n = M.max_exp() / 2;
        LaurentPoly q = sigma_norm_half_stage(K, M, flip);
        // cofactor: q*sigma(q) = (-1)^{n+flip} M, hence
        // p = 2^content * (-1)^{n+flip+t} * (x^t q) sigma(x^t q)
        long long sgn = ((t + n + (flip ? 1 : 0)) % 2 + 2) % 2;
        FieldElement kap = K->two_pow(content);
        if (sgn == 1) kap = -kap;
        Ctx local = K;
        FieldElement d = sqrt_auto(kap, local, "split_even_square (cofactor)");
        LaurentPoly qq = q.embed(local).scaled(d).shift_exponents(t);
        // verify
        LaurentPoly diff = (qq * sigma_flip(qq) - p.embed(local)).pruned();
        auto vd = diff.val();
        if (vd && *vd < local->precision() - Rat(1))
            throw HyredError("split_even_square: verification failed");
        return qq;
    };

    // try both sign conventions at the current stage, then walk the ladder
    std::vector<std::pair<int, int>> stages{{io_ctx->N(), io_ctx->m()}};
    for (auto& s : stage_ladder(io_ctx)) stages.push_back(s);
    for (auto& [N, m] : stages) {
        Ctx K;
        try {
            K = (N == io_ctx->N() && m == io_ctx->m())
                    ? io_ctx
                    : io_ctx->enlarged(N, m, "split_even_square");
        } catch (const ExtensionBudgetExceeded&) {
            continue;
        }
        for (bool flip : {false, true}) {
            try {
                LaurentPoly q = attempt(K, flip);
                io_ctx = q.context();
                return q;
            } catch (const ExtensionRequired&) {
            } catch (const ClimbStuck&) {
            } catch (const NoTowerElement&) {
            }
        }
    }
    throw NoTowerElement("split_even_square: no stage within the budget admits q");
}

Decomposition odd_decomposition(Ctx& io_ctx, const LaurentPoly& f_in) {
    LaurentPoly f = f_in.pruned();
    auto vf = f.val();
    if (!vf || *vf != Rat(0))
        throw HyredError("odd_decomposition: val(f) must be 0");
    auto [fe, fo] = f.parity_split();
    Decomposition d;
    d.kind = DecompKind::odd;
    if (fe.pruned().empty()) {
        d.h = LaurentPoly(io_ctx);
        d.g = f;
        d.wc = w_class_of(d.g);
        return d;
    }
    LaurentPoly p = quarter_twist(fe);
    LaurentPoly q = split_even_square(io_ctx, p);
    LaurentPoly h = quarter_twist(q);
    LaurentPoly ff = f.embed(io_ctx);
    LaurentPoly g = (ff - h * h).pruned();
    // g must be odd at working precision; drop even-part noise, but visible
    // even coefficients mean the construction failed
    auto [ge, go] = g.parity_split();
    if (!ge.pruned().empty()) {
        auto vge = ge.val();
        if (vge && *vge < io_ctx->precision() - Rat(2))
            throw HyredError("odd_decomposition: even residue survived");
    }
    auto vh = h.val();
    if (vh && *vh < Rat(0)) throw HyredError("odd_decomposition: h not integral");
    auto vg = go.val();
    if (vg && *vg < Rat(0)) throw HyredError("odd_decomposition: g not integral");
    d.h = h;
    d.g = go;
    d.wc = w_class_of(d.g);
    return d;
}

OptCheck is_optimal(const LaurentPoly& f, const Decomposition& d) {
    OptCheck oc;
    auto vg = d.g.val();
    if (!vg || *vg > Rat(2)) {
        oc.optimal = true;
        return oc;
    }
    if (*vg < Rat(2)) {
        // optimal iff [g / 2^v] is not a square
        LaurentPoly scaled(d.g.context());
        for (auto& [e, c] : d.g.coeffs()) scaled.set(e, c.scale_two_pow(-*vg));
        ResidueLaurent r = scaled.reduce();
        if (!r.is_square()) {
            oc.optimal = true;
            return oc;
        }
        oc.optimal = false;
        oc.has_witness = true;
        oc.witness = r.sqrt();
        return oc;
    }
    // v(g) = 2: Artin-Schreier criterion, decided geometrically: a solution
    // over the algebraic closure lies in the quadratic residue extension
    LaurentPoly g4(d.g.context());
    for (auto& [e, c] : d.g.coeffs()) g4.set(e, c.scale_two_pow(Rat(-2)));
    ResidueLaurent c4 = g4.reduce();
    ResidueLaurent hres = d.h.reduce();
    auto t = artin_schreier_solve(c4, hres);
    if (t) {
        oc.optimal = false;
        oc.has_witness = true;
        oc.witness = *t;
        return oc;
    }
    {
        // embed into F_{2^{2m}} and retry
        int m = d.g.context()->m();
        static thread_local std::map<int, std::unique_ptr<GF2m>> big_cache;
        auto it = big_cache.find(m);
        if (it == big_cache.end())
            it = big_cache.emplace(m, std::make_unique<GF2m>(std::min(2 * m, 24))).first;
        const GF2m& big = *it->second;
        if (big.degree() == 2 * m) {
            GFPolyOps ops(big);
            // root of the small modulus inside the big field
            uint64_t phi = d.g.context()->gf().modulus();
            GFPoly p((size_t)m + 1, 0);
            for (int b = 0; b <= m; ++b)
                if (phi & (1ull << b)) p[(size_t)b] = 1;
            auto rts = ops.roots(p);
            if (!rts.empty()) {
                uint32_t r = rts[0].first;
                for (auto& [rt, mu] : rts) r = std::min(r, rt);
                auto up = [&](uint32_t small) {
                    uint32_t img = 0, pw = 1;
                    for (int b = 0; b < m; ++b) {
                        if (small & (1u << b)) img ^= pw;
                        pw = big.mul(pw, r);
                    }
                    return img;
                };
                ResidueLaurent c2, h2;
                c2.F = &big;
                h2.F = &big;
                for (auto& [e, v] : c4.coeffs) c2.coeffs[e] = up(v);
                for (auto& [e, v] : hres.coeffs) h2.coeffs[e] = up(v);
                if (artin_schreier_solve(c2, h2)) {
                    oc.optimal = false;
                    oc.needs_residue_extension = true;
                    return oc;
                }
            }
        }
    }
    oc.optimal = true;
    return oc;
}

Decomposition improve(Ctx& io_ctx, const LaurentPoly& f, const Decomposition& d,
                      const ResidueLaurent& witness, Rat vg) {
    const Ctx& K = io_ctx;
    Rat half = (vg < Rat(2)) ? vg / Rat(2) : Rat(1);
    if (!(half * Rat(K->N())).is_integer())
        throw ExtensionRequired(2 * K->N(), K->m(), "improve");
    LaurentPoly ell = lift_residue(K, witness).scaled(K->two_pow(half));
    Decomposition nd;
    nd.h = d.h + ell;
    nd.g = (f.embed(K) - nd.h * nd.h).pruned();
    nd.kind = d.kind == DecompKind::odd ? DecompKind::optimal : d.kind;
    nd.wc = w_class_of(nd.g);
    auto nvg = nd.g.val();
    if (nvg && *nvg <= vg) throw HyredError("improve: v(g) did not increase");
    return nd;
}

Decomposition optimal_decomposition(Ctx& io_ctx, const LaurentPoly& f_in) {
    Decomposition d = odd_decomposition(io_ctx, f_in);
    int guard = 0;
    while (true) {
        OptCheck oc = is_optimal(f_in.embed(io_ctx), d);
        if (oc.optimal) break;
        if (oc.needs_residue_extension) {
            io_ctx = io_ctx->enlarged(io_ctx->N(), 2 * io_ctx->m(),
                                      "optimal_decomposition");
            d.h = d.h.embed(io_ctx);
            d.g = d.g.embed(io_ctx);
            continue;
        }
        auto vg = d.g.val();
        try {
            d = improve(io_ctx, f_in.embed(io_ctx), d, oc.witness, *vg);
        } catch (const ExtensionRequired& er) {
            io_ctx = io_ctx->enlarged(er.want_N, er.want_m, "optimal_decomposition");
            d.h = d.h.embed(io_ctx);
            d.g = d.g.embed(io_ctx);
            continue;
        }
        if (++guard > 8 * io_ctx->N() + 32)
            throw PrecisionExhausted("optimal_decomposition: improve loop");
    }
    d.kind = DecompKind::optimal;
    d.wc = w_class_of(d.g);
    return d;
}

std::pair<LaurentPoly, LaurentPoly> hensel_split(const LaurentPoly& f_in) {
    LaurentPoly f = f_in.pruned();
    const Ctx& K = f.context();
    if (f.empty() || f.get(0).residue() == 0)
        throw HyredError("hensel_split: constant term must be a unit");
    int n = f.min_exp() < 0 ? -f.min_exp() : 0;
    if (n == 0) {
        LaurentPoly one(K);
        one.set(0, K->one());
        return {f, one};
    }
    // negative part must be in m
    for (auto& [e, c] : f.coeffs())
        if (e < 0) {
            auto v = c.valuation();
            if (v && *v <= Rat(0)) throw HyredError("hensel_split: negative part not in m");
        }
    FPoly ft = fp_from_laurent(f.shift_exponents(n));
    GFPoly A0((size_t)n + 1, 0);
    A0[(size_t)n] = 1;
    GFPoly B0 = [&] {
        GFPoly r(ft.size() - n, 0);
        for (size_t i = 0; i < r.size(); ++i) r[i] = ft[i + n].residue();
        GFPolyOps::trim(r);
        return r;
    }();
    auto [A, B] = hensel_lift_pair(K, ft, A0, B0);
    // f2 = A / x^n has constant term exactly 1 (A monic of degree n)
    LaurentPoly f2 = fp_to_laurent(K, A).shift_exponents(-n);
    LaurentPoly f1 = fp_to_laurent(K, B);
    return {f1, f2};
}

Decomposition combine_decomps(const LaurentPoly& f, const Decomposition& d1,
                              const Decomposition& d2, Rat alpha, DecompKind kind) {
    LaurentPoly h2x = d2.h.substitute_inverse_scale(alpha);
    Decomposition d;
    d.h = d1.h * h2x;
    d.g = (f - d.h * d.h).pruned();
    d.kind = kind;
    d.wc = w_class_of(d.g);
    return d;
}

Decomposition truncated_decomposition(Ctx& io_ctx, const LaurentPoly& f_in) {
    LaurentPoly f = f_in.pruned();
    if (!f.is_polynomial()) throw HyredError("truncated_decomposition: not a polynomial");
    if (f.empty() || f.get(0).is_zero_at_precision())
        throw HyredError("truncated_decomposition: zero constant term");
    int d = f.max_exp();
    int cut = d / 2;
    FieldElement a = f.get(0);
    Ctx K = io_ctx;
    FieldElement sa = sqrt_auto(a, K, "truncated_decomposition");
    LaurentPoly fn = f.embed(K).scaled(a.embed(K).inv());
    // power series sqrt of fn up to degree cut: u_0 = 1,
    // u_k = (t_k - sum_{0<j<k} u_j u_{k-j}) / 2
    std::vector<FieldElement> u((size_t)cut + 1, K->zero());
    u[0] = K->one();
    FieldElement half = K->from_rational(1, 2);
    for (int k = 1; k <= cut; ++k) {
        FieldElement s = fn.get(k);
        for (int j = 1; j < k; ++j) s = s - u[(size_t)j] * u[(size_t)(k - j)];
        u[(size_t)k] = s * half;
    }
    LaurentPoly h(K);
    for (int k = 0; k <= cut; ++k) h.add_to(k, u[(size_t)k] * sa);
    Decomposition out;
    out.h = h;
    out.g = (f.embed(K) - h * h).pruned();
    out.kind = DecompKind::truncated;
    out.wc = w_class_of(out.g);
    io_ctx = K;
    return out;
}

Rat brute_force_w(const LaurentPoly& f, int lo, int hi, int coeff_bits, Rat cap) {
    const Ctx& K = f.context();
    if (K->N() != 1 || K->m() != 1)
        throw HyredError("brute_force_w: oracle only runs over Q2");
    int width = hi - lo + 1;
    if (width > 7) throw HyredError("brute_force_w: support too wide");
    long long levels = 1ll << coeff_bits;
    Rat best(0);
    std::vector<long long> digits((size_t)width, 0);
    while (true) {
        LaurentPoly h(K);
        for (int i = 0; i < width; ++i)
            if (digits[(size_t)i]) h.add_to(lo + i, K->from_integer(digits[(size_t)i]));
        auto vg = (f - h * h).pruned().val();
        Rat v = vg ? hyred::min(*vg, cap) : cap;
        if (v > best) best = v;
        if (best == cap) return best;
        int pos = 0;
        while (pos < width) {
            if (++digits[(size_t)pos] < levels) break;
            digits[(size_t)pos] = 0;
            ++pos;
        }
        if (pos == width) break;
    }
    return best;
}

} // namespace hyred

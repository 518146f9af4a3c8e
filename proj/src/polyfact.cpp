#include "hyred/polyfact.hpp"

#include <algorithm>
#include <numeric>

namespace hyred {

FPoly fp_from_laurent(const LaurentPoly& f) {
    if (f.empty()) return {};
    if (f.min_exp() < 0) throw HyredError("fp_from_laurent: negative exponents");
    FPoly p((size_t)f.max_exp() + 1, f.context()->zero());
    for (auto& [e, v] : f.coeffs()) p[(size_t)e] = v;
    return p;
}

LaurentPoly fp_to_laurent(const Ctx& ctx, const FPoly& f) {
    LaurentPoly r(ctx);
    for (size_t i = 0; i < f.size(); ++i)
        if (!f[i].is_exact_zero()) r.set((int)i, f[i]);
    return r;
}

int fp_deg(const FPoly& f) {
    for (size_t i = f.size(); i-- > 0;)
        if (!f[i].is_exact_zero()) return (int)i;
    return -1;
}

static void fp_trim(FPoly& f) {
    while (!f.empty() && f.back().is_exact_zero()) f.pop_back();
}

FPoly fp_mul(const FPoly& a, const FPoly& b) {
    if (a.empty() || b.empty()) return {};
    const Ctx& K = a[0].context();
    FPoly r(a.size() + b.size() - 1, K->zero());
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].is_exact_zero()) continue;
        for (size_t j = 0; j < b.size(); ++j) {
            if (b[j].is_exact_zero()) continue;
            r[i + j] = r[i + j] + a[i] * b[j];
        }
    }
    return r;
}

FPoly fp_add(const FPoly& a, const FPoly& b) {
    FPoly r = a.size() >= b.size() ? a : b;
    const FPoly& s = a.size() >= b.size() ? b : a;
    for (size_t i = 0; i < s.size(); ++i) r[i] = r[i] + s[i];
    return r;
}

FPoly fp_sub(const FPoly& a, const FPoly& b) {
    FPoly nb = b;
    for (auto& c : nb) c = -c;
    return fp_add(a, nb);
}

FPoly fp_divmod(const FPoly& a, const FPoly& b, FPoly& rem) {
    rem = a;
    fp_trim(rem);
    FPoly bb = b;
    fp_trim(bb);
    if (bb.empty()) throw HyredError("fp_divmod: division by zero");
    if (rem.size() < bb.size()) return {};
    const Ctx& K = bb[0].context();
    FieldElement linv = bb.back().inv();
    FPoly q(rem.size() - bb.size() + 1, K->zero());
    for (size_t i = q.size(); i-- > 0;) {
        if (rem.size() < bb.size() + i) continue;
        FieldElement c = rem[bb.size() - 1 + i] * linv;
        if (!c.is_exact_zero()) {
            q[i] = c;
            for (size_t j = 0; j < bb.size(); ++j)
                rem[i + j] = rem[i + j] - bb[j] * c;
        }
        rem.resize(bb.size() - 1 + i); // the top coefficient is now cancelled
    }
    fp_trim(rem);
    return q;
}

FieldElement fp_eval(const FPoly& f, const FieldElement& x) {
    const Ctx& K = x.context();
    FieldElement r = K->zero();
    for (size_t i = f.size(); i-- > 0;) r = r * x + f[i];
    return r;
}

std::optional<Rat> fp_content_val(const FPoly& f) {
    std::optional<Rat> best;
    for (auto& c : f) {
        auto v = c.valuation();
        if (v && (!best || *v < *best)) best = v;
    }
    return best;
}

// ---------------------------------------------------------------------------
// residue-level extended Euclid

namespace {

struct GFBezout {
    GFPoly g, s, t; // s*a + t*b = g
};

GFBezout gf_eea(const GFPolyOps& ops, GFPoly a, GFPoly b) {
    GFPoly s0{1}, s1{}, t0{}, t1{1};
    GFPolyOps::trim(a);
    GFPolyOps::trim(b);
    while (!GFPolyOps::is_zero(b)) {
        GFPoly r;
        GFPoly q = ops.divmod(a, b, r);
        GFPoly s2 = ops.add(s0, ops.mul(q, s1));
        GFPoly t2 = ops.add(t0, ops.mul(q, t1));
        a = b; b = r;
        s0 = s1; s1 = s2;
        t0 = t1; t1 = t2;
    }
    // normalize to monic gcd
    if (!a.empty() && a.back() != 1) {
        uint32_t inv = ops.F->inv(a.back());
        a = ops.scale(a, inv);
        s0 = ops.scale(s0, inv);
        t0 = ops.scale(t0, inv);
    }
    return {a, s0, t0};
}

FPoly lift_gf_poly(const Ctx& ctx, const GFPoly& p) {
    FPoly r(p.size(), ctx->zero());
    for (size_t i = 0; i < p.size(); ++i) r[i] = ctx->lift(p[i]);
    fp_trim(r);
    return r;
}

GFPoly residue_poly(const Ctx& ctx, const FPoly& f) {
    GFPoly r(f.size(), 0);
    for (size_t i = 0; i < f.size(); ++i) {
        auto v = f[i].valuation();
        if (v && *v < Rat(0)) throw NegativeValuation("residue_poly");
        r[i] = f[i].residue();
    }
    GFPolyOps::trim(r);
    return r;
}

} // namespace

std::pair<FPoly, FPoly> hensel_lift_pair(const Ctx& ctx, const FPoly& f,
                                         const GFPoly& A0res, const GFPoly& B0res) {
    GFPolyOps ops(ctx->gf());
    // Bezout at the residue: S*B0 + T*A0 = 1
    GFBezout bez = gf_eea(ops, B0res, A0res);
    if (GFPolyOps::deg(bez.g) != 0)
        throw HyredError("hensel_lift_pair: residue factors not coprime");
    uint32_t ginv = ctx->gf().inv(bez.g[0]);
    GFPoly S0 = ops.scale(bez.s, ginv); // pairs with B0
    FPoly A = lift_gf_poly(ctx, A0res);
    FPoly B = lift_gf_poly(ctx, B0res);
    Rat target = ctx->precision() + Rat(4);
    int iters = 0;
    // linear lifting with degree-bounded corrections: each step solves
    // A0*dB + B0*dA = [e / 2^v(e)] at the residue and pushes the defect up
    while (true) {
        FPoly e = fp_sub(f, fp_mul(A, B));
        auto ve = fp_content_val(e);
        if (!ve) {
            // the defect fell below the inputs' known precision; that is all
            // the accuracy this lift can certify
            for (auto& c : e) target = hyred::min(target, c.valid_precision());
            break;
        }
        if (*ve >= target) break;
        FPoly en(e.size(), ctx->zero());
        for (size_t i = 0; i < e.size(); ++i) en[i] = e[i].scale_two_pow(-*ve);
        GFPoly ebar = residue_poly(ctx, en);
        GFPoly dA = ops.mod(ops.mul(S0, ebar), A0res);
        // dB = (ebar - dA*B0) / A0, exact at the residue
        GFPoly num = ops.add(ebar, ops.mul(dA, B0res));
        GFPoly rem;
        GFPoly dB = ops.divmod(num, A0res, rem);
        if (!GFPolyOps::is_zero(rem))
            throw HyredError("hensel_lift_pair: inconsistent correction");
        FPoly liftA = lift_gf_poly(ctx, dA);
        FPoly liftB = lift_gf_poly(ctx, dB);
        for (auto& c : liftA) c = c.scale_two_pow(*ve);
        for (auto& c : liftB) c = c.scale_two_pow(*ve);
        A = fp_add(A, liftA);
        B = fp_add(B, liftB);
        if (++iters > 40 * ctx->bits() * ctx->N())
            throw PrecisionExhausted("hensel_lift_pair");
    }
    // monicize A at precision, and cap the advertised precision of the
    // output at the achieved lifting target
    fp_trim(A);
    if (!A.empty() && fp_deg(A) == GFPolyOps::deg(A0res)) {
        FieldElement linv = A.back().inv();
        for (auto& c : A) c = (c * linv).clamped(target);
        A.back() = ctx->one();
        for (auto& c : B) c = (c / linv).clamped(target);
    } else {
        throw PrecisionExhausted("hensel_lift_pair: degree drift");
    }
    fp_trim(B);
    return {A, B};
}

// ---------------------------------------------------------------------------

namespace {

struct FactorCtx {
    Ctx ctx;
    bool best_effort;
    std::vector<TowerFactor> out;
    Rat cluster_floor; // shift depth at which clusters stop being separated
};

FPoly fp_monic(const FPoly& fin) {
    FPoly f = fin;
    fp_trim(f);
    if (f.empty()) return f;
    FieldElement linv = f.back().inv();
    for (auto& c : f) c = c * linv;
    f.back() = f[0].context()->one();
    return f;
}

// substitute x -> 2^s * x and normalize valuation to 0; returns the scaling
// applied to recover factors
FPoly rescale_down(const Ctx& ctx, const FPoly& f, Rat s, Rat& out_shift) {
    FPoly g(f.size(), ctx->zero());
    std::optional<Rat> mv;
    for (size_t i = 0; i < f.size(); ++i) {
        g[i] = f[i].scale_two_pow(s * Rat((long long)i));
        auto v = g[i].valuation();
        if (v && (!mv || *v < *mv)) mv = v;
    }
    if (!mv) throw PrecisionExhausted("rescale_down: polynomial ~ 0");
    for (auto& c : g) c = c.scale_two_pow(-*mv);
    out_shift = *mv;
    return g;
}

// map a factor in y back through x = 2^s y: F(y) -> monic factor in x
FPoly unscale_factor(const Ctx& ctx, const FPoly& F, Rat s) {
    FPoly g(F.size(), ctx->zero());
    int d = fp_deg(F);
    for (size_t i = 0; i < F.size(); ++i)
        g[i] = F[i].scale_two_pow(s * Rat((long long)(d - (int)i)));
    return fp_monic(g);
}

// shift x -> c + x
FPoly taylor_shift(const Ctx& ctx, const FPoly& f, const FieldElement& c) {
    FPoly r{};
    FPoly lin{c, ctx->one()};
    for (size_t i = f.size(); i-- > 0;) {
        r = r.empty() ? FPoly{f[i]} : fp_add(fp_mul(r, lin), FPoly{f[i]});
    }
    if (r.empty()) r = FPoly{ctx->zero()};
    r.resize(std::max(r.size(), f.size()), ctx->zero());
    return r;
}

// frame records the chain of (center, scale) substitutions applied, so a
// factor of the innermost variable can be mapped back to the original x.
// innermost variable z relates to x by: x = c_1 + 2^{s_1}(c_2 + 2^{s_2}(...))
FPoly map_back(const Ctx& ctx, FPoly F,
               const std::vector<std::pair<FieldElement, Rat>>& frame) {
    for (size_t k = frame.size(); k-- > 0;) {
        F = unscale_factor(ctx, F, frame[k].second);
        // x = c + y: substitute y = x - c
        F = taylor_shift(ctx, F, -frame[k].first);
        F = fp_monic(F);
    }
    return F;
}

FieldElement frame_center(const Ctx& ctx,
                          const std::vector<std::pair<FieldElement, Rat>>& frame) {
    // image of the innermost origin under the substitution chain
    FieldElement x = ctx->zero();
    for (size_t k = frame.size(); k-- > 0;)
        x = frame[k].first + x.scale_two_pow(frame[k].second);
    return x;
}

void emit_factor(FactorCtx& FC, const FPoly& F_local, int mult, bool certified,
                 bool cluster, Rat rootval, int resdeg,
                 const std::vector<std::pair<FieldElement, Rat>>& frame) {
    TowerFactor tf;
    tf.poly = map_back(FC.ctx, F_local, frame);
    tf.multiplicity = mult;
    tf.certified_irreducible = certified;
    tf.inexact_cluster = cluster;
    tf.root_valuation = rootval;
    tf.residue_degree = resdeg;
    // the center is only meaningful down to the refinement depth reached;
    // rootval carries depth + local floor (clusters) or depth + slope
    tf.cluster_center = frame_center(FC.ctx, frame).clamped(rootval);
    FC.out.push_back(std::move(tf));
}

void factor_rec(FactorCtx& FC, FPoly f, int mult, Rat depth_val,
                std::vector<std::pair<FieldElement, Rat>> frame, int depth) {
    const Ctx& K = FC.ctx;
    fp_trim(f);
    if (fp_deg(f) <= 0) return;
    if (depth > 200) throw PrecisionExhausted("factor_rec: recursion depth");
    int d = fp_deg(f);
    // accuracy actually carried by this polynomial's coefficients
    Rat acc = f[(size_t)d].valid_precision();
    for (auto& c : f)
        if (!c.is_exact_zero()) acc = hyred::min(acc, c.valid_precision());
    if (acc <= Rat(3)) {
        // too shallow to resolve anything: one cluster at the local origin
        FPoly xd((size_t)d + 1, K->zero());
        xd[(size_t)d] = K->one();
        emit_factor(FC, xd, mult, false, true, depth_val, 1, frame);
        return;
    }
    f = fp_monic(f);
    if (d == 1) {
        emit_factor(FC, f, mult, true, false, Rat(0), 1, frame);
        return;
    }
    Rat floor_local = hyred::min(FC.cluster_floor, acc - Rat(2));
    // Newton polygon over valuations relative to this frame
    LaurentPoly lf = fp_to_laurent(K, f);
    NewtonPolygon np = lf.newton_polygon();
    if (np.vertices.size() == 1 ||
        (np.vertices.size() == 2 && np.vertices.front().second >= floor_local)) {
        // the non-leading coefficients are at noise level: all roots are
        // indistinguishable from the local origin at working precision
        emit_factor(FC, f, mult, false, true, depth_val + floor_local, 1, frame);
        return;
    }
    if (np.vertices.empty()) throw PrecisionExhausted("factor_rec: polynomial ~ 0");
    // leading coefficient is a unit (monic), so the last vertex is (d, 0)
    if (np.vertices.size() > 2 ||
        np.vertices.front().first > 0) {
        // multiple slopes (or a stray x^k despite earlier trimming):
        // split at the first interior vertex using the right-segment slope
        auto v0 = np.vertices[np.vertices.size() - 2];
        auto v1 = np.vertices[np.vertices.size() - 1];
        Rat slope = (v1.second - v0.second) / Rat(v1.first - v0.first);
        Rat s = -slope; // common valuation of the right-segment roots
        Rat sN = s * Rat(K->N());
        if (!sN.is_integer()) {
            long long den = sN.d;
            if (!FC.best_effort)
                throw ExtensionRequired((int)(K->N() * den), K->m(), "factor (slope)");
            emit_factor(FC, f, mult, false, false, s + depth_val, 1, frame);
            return;
        }
        Rat shift;
        FPoly g = rescale_down(K, f, s, shift);
        GFPoly gres = residue_poly(K, g);
        int k = 0;
        while ((size_t)k < gres.size() && gres[k] == 0) ++k;
        if (k == 0 || k > d) throw PrecisionExhausted("factor_rec: bad split vertex");
        // split [g] = x^k * psi with psi(0) != 0
        GFPoly A0((size_t)k + 1, 0);
        A0[(size_t)k] = 1;
        GFPoly B0(gres.begin() + k, gres.end());
        auto [A, B] = hensel_lift_pair(K, g, A0, B0);
        frame.emplace_back(K->zero(), s);
        factor_rec(FC, A, mult, depth_val + s, frame, depth + 1);
        factor_rec(FC, B, mult, depth_val + s, frame, depth + 1);
        return;
    }
    // single slope
    Rat s = -(np.vertices[1].second - np.vertices[0].second) / Rat(d);
    Rat sN = s * Rat(K->N());
    if (!sN.is_integer()) {
        long long den = sN.d;
        if (!FC.best_effort)
            throw ExtensionRequired((int)(K->N() * den), K->m(), "factor (slope)");
        emit_factor(FC, f, mult, false, false, s + depth_val, 1, frame);
        return;
    }
    Rat shift;
    FPoly g = rescale_down(K, f, s, shift);
    GFPoly gres = residue_poly(K, g);
    GFPolyOps ops(K->gf());
    uint32_t lead;
    auto rfac = ops.factor(gres, lead);
    if (rfac.empty()) throw PrecisionExhausted("factor_rec: empty residue");
    if (rfac.size() > 1) {
        // coprime split: first factor power vs the rest
        GFPoly A0{1};
        for (int i = 0; i < rfac[0].second; ++i) A0 = ops.mul(A0, rfac[0].first);
        GFPoly B0;
        {
            GFPoly rest{lead};
            for (size_t t = 1; t < rfac.size(); ++t)
                for (int i = 0; i < rfac[t].second; ++i) rest = ops.mul(rest, rfac[t].first);
            B0 = rest;
        }
        auto [A, B] = hensel_lift_pair(K, g, A0, B0);
        frame.emplace_back(K->zero(), s);
        factor_rec(FC, A, mult, depth_val + s, frame, depth + 1);
        factor_rec(FC, B, mult, depth_val + s, frame, depth + 1);
        return;
    }
    // single irreducible power psi^e
    const GFPoly& psi = rfac[0].first;
    int e = rfac[0].second;
    int r = GFPolyOps::deg(psi);
    frame.emplace_back(K->zero(), s);
    if (e == 1) {
        // certified irreducible over the current stage
        emit_factor(FC, g, mult, true, false, s + depth_val, r, frame);
        return;
    }
    if (r > 1) {
        if (!FC.best_effort)
            throw ExtensionRequired(K->N(), K->m() * r, "factor (residue degree)");
        emit_factor(FC, g, mult, false, false, s + depth_val, r, frame);
        return;
    }
    // repeated residue root: shift and refine the cluster
    if (depth_val + s >= floor_local) {
        // cannot separate at working precision: report as a multiple factor
        emit_factor(FC, g, mult, mult > 1 ? true : false, true, depth_val + s, 1, frame);
        return;
    }
    FieldElement c = K->lift(psi[0]); // root of x + psi0
    FPoly shifted = taylor_shift(K, g, c);
    // remove the exact center if it is a root at precision (valuation of the
    // constant term at or beyond the floor)
    frame.emplace_back(c, Rat(0));
    factor_rec(FC, shifted, mult, depth_val + s, frame, depth + 1);
}

} // namespace

FactorOutcome factor_over_tower(const Ctx& ctx, FPoly f, bool best_effort) {
    FactorOutcome out;
    fp_trim(f);
    if (f.empty()) throw HyredError("factor_over_tower: zero polynomial");
    // strip x^k: coefficients that vanish at working precision
    int k = 0;
    while ((size_t)k < f.size() - 1 && f[(size_t)k].is_zero_at_precision()) ++k;
    out.power_of_x = k;
    f.erase(f.begin(), f.begin() + k);
    // pull the content and the leading unit out
    auto cv = fp_content_val(f);
    if (!cv) throw PrecisionExhausted("factor_over_tower: content ~ 0");
    for (auto& c : f) c = c.scale_two_pow(-*cv);
    out.unit = f[fp_deg(f)].scale_two_pow(*cv);
    FactorCtx FC{ctx, best_effort, {}, ctx->precision() - Rat(3)};
    factor_rec(FC, f, 1, Rat(0), {}, 0);
    out.factors = std::move(FC.out);
    return out;
}

RootsOutcome find_roots(Ctx ctx, const LaurentPoly& p_in) {
    RootsOutcome out;
    LaurentPoly p = p_in;
    if (p.empty()) throw HyredError("find_roots: zero polynomial");
    int shift = p.min_exp() < 0 ? -p.min_exp() : 0;
    int guard = 0;
    while (true) {
        FPoly f = fp_from_laurent(p.shift_exponents(shift));
        try {
            FactorOutcome fo = factor_over_tower(ctx, f, false);
            // zero roots from x^k minus the artificial shift
            int zero_mult = fo.power_of_x - shift;
            if (zero_mult > 0) out.roots.push_back({ctx->zero(), zero_mult, false});
            bool need_retry = false;
            int wantN = ctx->N(), wantm = ctx->m();
            for (auto& tf : fo.factors) {
                int d = fp_deg(tf.poly);
                if (d == 1) {
                    FieldElement root = -tf.poly[0];
                    out.roots.push_back({root, tf.multiplicity, tf.inexact_cluster});
                } else if (tf.inexact_cluster) {
                    // d roots indistinguishable at precision: report the
                    // cluster center with multiplicity d
                    out.roots.push_back({tf.cluster_center, d * tf.multiplicity, true});
                } else {
                    // demands a bigger stage; report the slope of the factor
                    // in the original variable
                    LaurentPoly lp = fp_to_laurent(ctx, tf.poly);
                    auto hull = lp.newton_polygon().vertices;
                    if (hull.size() >= 2)
                        tf.root_valuation =
                            (hull.front().second - hull.back().second) / Rat(d);
                    long long den = (tf.root_valuation * Rat(ctx->N())).d;
                    long long nN = ctx->N() * den;
                    long long nm = (long long)ctx->m() * tf.residue_degree;
                    if (nN * nm <= ctx->budget()) {
                        wantN = std::max<long long>(wantN, nN);
                        wantm = std::max<long long>(wantm, nm);
                        need_retry = true;
                    } else {
                        out.unresolved.push_back({tf.root_valuation, d * tf.multiplicity,
                                                  "needs stage beyond budget",
                                                  tf.cluster_center, true});
                    }
                }
            }
            if (!need_retry) {
                out.ctx = ctx;
                return out;
            }
            out.roots.clear();
            out.unresolved.clear();
            ctx = ctx->enlarged(wantN, wantm, "find_roots");
            p = p.embed(ctx);
        } catch (const ExtensionRequired& er) {
            long long nN = er.want_N, nm = er.want_m;
            // when the requested stage exceeds the budget, the largest
            // intermediate stage can still refine cluster centers
            while (nN * nm > ctx->budget() && nN % 2 == 0 && nN / 2 > ctx->N() &&
                   nN / 2 % ctx->N() == 0)
                nN /= 2;
            if (nN * nm > ctx->budget()) {
                // best-effort pass in the current stage
                FactorOutcome fo = factor_over_tower(ctx, f, true);
                int zero_mult = fo.power_of_x - shift;
                if (zero_mult > 0) out.roots.push_back({ctx->zero(), zero_mult, false});
                for (auto& tf : fo.factors) {
                    int d = fp_deg(tf.poly);
                    if (d == 1) {
                        out.roots.push_back({-tf.poly[0], tf.multiplicity, tf.inexact_cluster});
                    } else if (tf.inexact_cluster) {
                        out.roots.push_back({tf.cluster_center, d * tf.multiplicity, true});
                    } else {
                        LaurentPoly lp = fp_to_laurent(ctx, tf.poly);
                        auto hull = lp.newton_polygon().vertices;
                        Rat rv = tf.root_valuation;
                        if (hull.size() >= 2)
                            rv = (hull.front().second - hull.back().second) / Rat(d);
                        out.unresolved.push_back({rv, d * tf.multiplicity,
                                                  "needs stage beyond budget",
                                                  tf.cluster_center, true});
                    }
                }
                out.ctx = ctx;
                return out;
            }
            ctx = ctx->enlarged((int)nN, (int)nm, "find_roots");
            p = p.embed(ctx);
        }
        if (++guard > 24) throw PrecisionExhausted("find_roots: no convergence");
    }
}

} // namespace hyred

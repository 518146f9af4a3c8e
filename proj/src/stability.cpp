#include "hyred/stability.hpp"

#include <algorithm>

namespace hyred {

namespace {

long long binom(int n, int k) {
    if (k < 0 || k > n) return 0;
    long long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// f^{(k)} / k! as an exact polynomial
FPoly taylor_coeff(const Ctx& K, const FPoly& f, int k) {
    if ((size_t)k >= f.size()) return {};
    FPoly r(f.size() - k, K->zero());
    for (size_t j = 0; j < r.size(); ++j)
        r[j] = f[j + k] * K->from_integer(binom((int)(j + k), k));
    return r;
}

} // namespace

StabilityData stability_expand(const LaurentPoly& fl) {
    if (!fl.is_polynomial()) throw HyredError("stability_expand: not a polynomial");
    const Ctx& K = fl.context();
    StabilityData sd;
    sd.f = fp_from_laurent(fl);
    sd.d = fp_deg(sd.f);
    if (sd.d < 1) throw HyredError("stability_expand: degree must be >= 1");
    int cut = sd.d / 2;
    sd.two_m = 1;
    while (2 * sd.two_m <= sd.d) sd.two_m *= 2; // d/2 < 2^m <= d
    // powers of f
    std::vector<FPoly> fpow((size_t)sd.d + 1);
    fpow[0] = FPoly{K->one()};
    for (int k = 1; k <= sd.d; ++k) fpow[(size_t)k] = fp_mul(fpow[(size_t)k - 1], sd.f);
    // Nk = f^k H_k: N_0 = 1, N_k = (f^{k-1} tau_k - sum_{0<j<k} N_j N_{k-j}) / 2
    FieldElement half = K->from_rational(1, 2);
    sd.Nk.resize((size_t)cut + 1);
    sd.Nk[0] = FPoly{K->one()};
    for (int k = 1; k <= cut; ++k) {
        FPoly s = fp_mul(fpow[(size_t)k - 1], taylor_coeff(K, sd.f, k));
        for (int j = 1; j < k; ++j)
            s = fp_sub(s, fp_mul(sd.Nk[(size_t)j], sd.Nk[(size_t)(k - j)]));
        for (auto& c : s) c = c * half;
        sd.Nk[(size_t)k] = std::move(s);
    }
    // Mk = f^k G_k = f^{k-1} tau_k - sum_{j+l=k, 1<=j,l<=cut} N_j N_l
    for (int k = cut + 1; k <= sd.d; ++k) {
        FPoly s = fp_mul(fpow[(size_t)k - 1], taylor_coeff(K, sd.f, k));
        for (int j = std::max(1, k - cut); j <= cut && j < k; ++j)
            s = fp_sub(s, fp_mul(sd.Nk[(size_t)j], sd.Nk[(size_t)(k - j)]));
        sd.Mk.push_back(std::move(s));
    }
    sd.S = sd.M_of(sd.two_m);
    return sd;
}

std::optional<Rat> vf_from_roots(const FieldElement& xi,
                                 const std::vector<FieldElement>& roots,
                                 const FieldElement& lead, bool infinity_branch) {
    (void)infinity_branch;
    auto vl = lead.valuation();
    if (!vl) return std::nullopt;
    Rat s = *vl;
    for (auto& r : roots) {
        auto d = (xi - r).valuation();
        if (!d) return std::nullopt;
        s += *d;
    }
    return s;
}

std::optional<Rat> epsilon_raw(const StabilityData& sd, const FieldElement& xi0,
                               std::optional<Rat> vf_hint) {
    std::optional<Rat> vf = vf_hint;
    if (!vf) {
        FieldElement fx = fp_eval(sd.f, xi0);
        vf = fx.valuation();
    }
    if (!vf) return std::nullopt; // xi0 collides with a branch point
    std::optional<Rat> best;
    int cut = sd.d / 2;
    for (int k = cut + 1; k <= sd.d; ++k) {
        std::optional<Rat> vmk;
        if (k > 2 * cut) {
            // M_k = f^{k-1} tau_k exactly (the H^2 sum is empty), so its
            // valuation splits; this reads through branch-point cancellation
            FieldElement tk = fp_eval(taylor_coeff(xi0.context(), sd.f, k), xi0);
            auto vt = tk.valuation();
            if (vt) vmk = Rat(k - 1) * (*vf) + *vt;
        }
        if (!vmk) {
            FieldElement mk = fp_eval(sd.M_of(k), xi0);
            vmk = mk.valuation();
        }
        if (!vmk) continue;
        Rat ck = *vmk - Rat(k) * (*vf); // v(G_k) = v(M_k) - k v(f)
        Rat eps = (Rat(2) - ck) / Rat(k);
        if (!best || eps > *best) best = eps;
    }
    return best;
}

Rat epsilon_at(const StabilityData& sd, const FieldElement& xi0) {
    FieldElement fx = fp_eval(sd.f, xi0);
    auto vf = fx.valuation();
    if (!vf || *vf != Rat(0))
        throw HyredError("epsilon_at: f(xi0) must be a unit");
    auto best = epsilon_raw(sd, xi0);
    if (!best) throw PrecisionExhausted("epsilon_at: all G_k(xi0) vanish at precision");
    if (!(*best > Rat(0)))
        throw HyredError("epsilon_at: nonpositive epsilon (w(f) >= 2 upstream?)");
    return *best;
}

TypeDSearch type_d_sites(Ctx ctx, const StabilityData& sd,
                         const std::vector<FieldElement>* branch_roots) {
    TypeDSearch out;
    LaurentPoly S = fp_to_laurent(ctx, sd.S);
    if (S.pruned().empty()) {
        out.diagnostics.push_back("stability polynomial vanishes at precision");
        out.ctx = ctx;
        return out;
    }
    RootsOutcome ro = find_roots(ctx, S.pruned());
    out.ctx = ro.ctx;
    out.unresolved = ro.unresolved;
    // re-embed the expansion once if root finding grew the stage
    StabilityData sde;
    const StabilityData* use = &sd;
    if (ro.ctx->id() != sd.f[0].context()->id()) {
        sde.d = sd.d;
        sde.two_m = sd.two_m;
        for (auto& c : sd.f) sde.f.push_back(c.embed(ro.ctx));
        for (int k = sd.d / 2 + 1; k <= sd.d; ++k) {
            FPoly m;
            for (auto& c : sd.M_of(k)) m.push_back(c.embed(ro.ctx));
            sde.Mk.push_back(std::move(m));
        }
        use = &sde;
    }
    std::vector<FieldElement> branches;
    if (branch_roots)
        for (auto& b : *branch_roots) branches.push_back(b.embed(ro.ctx));
    auto vf_of = [&](const FieldElement& xi) -> std::optional<Rat> {
        if (!branch_roots) return std::nullopt;
        return vf_from_roots(xi, branches, use->f.back(), false);
    };
    std::vector<TypeDSite> cands;
    for (auto& r : ro.roots) {
        auto v = r.root.valuation();
        if (v && *v < Rat(0)) continue; // not integral: belongs to no chart here
        auto eps = epsilon_raw(*use, r.root, vf_of(r.root));
        if (!eps) {
            out.diagnostics.push_back("site skipped: collides with a branch point");
            continue;
        }
        if (!(*eps > Rat(0))) {
            out.diagnostics.push_back("site skipped: nonpositive radius");
            continue;
        }
        cands.push_back({r.root, *eps, false});
    }
    // an unresolved factor whose approximate center is known at least to the
    // depth eps still pins the same component (points within eps of a zero
    // of S yield the same model)
    for (auto& uf : out.unresolved) {
        if (!uf.has_center) continue;
        auto v = uf.approx_center.valuation();
        if (v && *v < Rat(0)) continue;
        auto eps = epsilon_raw(*use, uf.approx_center, vf_of(uf.approx_center));
        if (!eps || !(*eps > Rat(0))) {
            out.diagnostics.push_back("unresolved factor yields no positive radius");
            continue;
        }
        if (uf.approx_center.valid_precision() >= *eps + Rat(1, 4)) {
            cands.push_back({uf.approx_center, *eps, false});
            out.diagnostics.push_back(
                "type-(d) site taken from the approximate center of an "
                "unresolved factor (degree " + std::to_string(uf.degree) + ")");
        } else {
            // deep enough to locate and count the component, not to chart it
            cands.push_back({uf.approx_center, *eps, true});
            out.diagnostics.push_back(
                "rough type-(d) site: center depth " +
                uf.approx_center.valid_precision().str() + " below radius " +
                eps->str() + "; its chart is out of tower reach");
        }
    }
    // deterministic order, then deduplicate by v(xi_j - xi_i) >= eps_i
    std::sort(cands.begin(), cands.end(), [](const TypeDSite& a, const TypeDSite& b) {
        return a.xi.str() < b.xi.str();
    });
    for (auto& c : cands) {
        bool dup = false;
        for (auto& kept : out.sites) {
            auto v = (c.xi - kept.xi).valuation();
            if (!v || *v >= kept.eps) { dup = true; break; }
        }
        if (!dup) out.sites.push_back(c);
    }
    return out;
}

bool substitution_equivariance_check(const LaurentPoly& f, const FieldElement& a,
                                     const FieldElement& b, const FieldElement& c) {
    const Ctx& K = f.context();
    StabilityData s1 = stability_expand(f);
    LaurentPoly g = f.substitute_affine(a, b).scaled(c);
    StabilityData s2 = stability_expand(g);
    // rhs: (a c)^{2^m} * S_f(a x0 + b)
    LaurentPoly Sf = fp_to_laurent(K, s1.S).substitute_affine(a, b);
    FieldElement fac = K->one();
    for (int i = 0; i < s1.two_m; ++i) fac = fac * (a * c);
    Sf = Sf.scaled(fac);
    LaurentPoly Sg = fp_to_laurent(K, s2.S);
    auto diff = (Sg - Sf).pruned();
    auto vd = diff.val();
    return !vd || *vd >= K->precision() - Rat(4);
}

} // namespace hyred

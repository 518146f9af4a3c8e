#include "hyred/model.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <functional>

namespace hyred {

int ModelTree::add_component(Component c) {
    c.id = (int)comps.size();
    comps.push_back(std::move(c));
    return comps.back().id;
}

int ModelTree::add_dp(DoublePointRec d) {
    d.id = (int)dps.size();
    dps.push_back(std::move(d));
    return dps.back().id;
}

int ModelTree::marked_in_subtree(int comp) const {
    int n = 0;
    for (auto& p : points)
        if (p.component >= 0) {
            int c = p.component;
            while (c >= 0) {
                if (c == comp) { ++n; break; }
                c = comps[(size_t)c].parent;
            }
        }
    return n;
}

// ---------------------------------------------------------------------------
// tree construction

namespace {

struct VirtualPoint {
    int point_id;    // index into tree.points
    int orbit = -1;  // -1 for exact
};

// distance multiset between an exact element and the two roots of a monic
// quadratic: Newton polygon of F(xi + t)
std::pair<Rat, Rat> dist_point_orbit(const FieldElement& xi, const FPoly& quad) {
    const Ctx& K = xi.context();
    FieldElement c0 = fp_eval(quad, xi);
    // F'(xi) = 2 xi + u
    FieldElement c1 = K->from_integer(2) * xi + quad[1];
    auto v0 = c0.valuation(), v1 = c1.valuation();
    if (!v0) throw PrecisionExhausted("dist_point_orbit: point meets the orbit");
    // roots of t^2 + c1 t + c0
    if (v1 && Rat(2) * (*v1) <= *v0) {
        // two slopes: v1 and v0 - v1
        return {*v0 - *v1, *v1};
    }
    // single slope v0/2
    return {*v0 / Rat(2), *v0 / Rat(2)};
}

// the four distances between the roots of two distinct monic quadratics:
// Newton polygon of Res_x(F(x), G(x+t)) in t, by interpolation
std::vector<Rat> dist_orbit_orbit(const Ctx& K, const FPoly& F, const FPoly& G) {
    // R(t) has degree 4; interpolate at t = 0..4
    std::vector<FieldElement> vals;
    std::vector<long long> nodes{0, 1, -1, 2, -2};
    for (long long t : nodes) {
        LaurentPoly Gt = fp_to_laurent(K, G).substitute_affine(K->one(), K->from_integer(t));
        vals.push_back(resultant(fp_to_laurent(K, F), Gt));
    }
    // Lagrange interpolation over the 5 nodes
    LaurentPoly R(K);
    for (size_t i = 0; i < nodes.size(); ++i) {
        LaurentPoly Li(K);
        Li.set(0, K->one());
        long long den = 1;
        for (size_t j = 0; j < nodes.size(); ++j) {
            if (i == j) continue;
            Li = Li * LaurentPoly::from_ints(K, {{1, 1}, {0, -nodes[j]}});
            den *= (nodes[i] - nodes[j]);
        }
        R = R + Li.scaled(vals[i] * K->from_rational(1, den));
    }
    auto np = R.pruned().newton_polygon();
    std::vector<Rat> out;
    auto verts = np.vertices;
    for (size_t k = 1; k < verts.size(); ++k) {
        Rat slope = (verts[k].second - verts[k - 1].second) /
                    Rat(verts[k].first - verts[k - 1].first);
        for (int c = 0; c < verts[k].first - verts[k - 1].first; ++c)
            out.push_back(-slope);
    }
    while ((int)out.size() < 4) out.push_back(out.empty() ? Rat(0) : out.back());
    return out;
}

struct TreeBuilder {
    ModelTree* T;
    // symmetric distance matrix over virtual points (uniform per node pair)
    std::vector<VirtualPoint> vps;
    std::map<std::pair<int, int>, Rat> dist;

    Rat d(int i, int j) const {
        if (i > j) std::swap(i, j);
        return dist.at({i, j});
    }

    // pick a center for a cluster: exact member preferred, else orbit center
    FieldElement center_of(const std::vector<int>& cl, Rat depth, bool& shallow) {
        shallow = false;
        for (int i : cl) {
            auto& p = T->points[(size_t)vps[(size_t)i].point_id];
            if (p.exact) return p.xi;
        }
        auto& p = T->points[(size_t)vps[(size_t)cl[0]].point_id];
        auto& orb = T->orbits[(size_t)p.orbit];
        if (orb.center_depth < depth) shallow = true;
        return orb.center;
    }

    // residues of the cluster members in the chart (x - b)/2^s
    // exact: residue directly; orbit: roots of the reduced shifted quadratic
    std::vector<std::pair<int, uint32_t>> residues(const std::vector<int>& cl,
                                                   const FieldElement& b, Rat s) {
        const Ctx& K = T->ctx;
        std::vector<std::pair<int, uint32_t>> out;
        std::set<int> orbits_done;
        for (int i : cl) {
            auto& p = T->points[(size_t)vps[(size_t)i].point_id];
            if (p.exact) {
                FieldElement y = (p.xi - b).scale_two_pow(-s);
                out.emplace_back(i, y.residue());
            } else {
                auto& orb = T->orbits[(size_t)p.orbit];
                // Q(y) = F(2^s y + b), residue roots
                LaurentPoly Q = fp_to_laurent(K, orb.quad)
                                    .substitute_affine(K->two_pow(s), b);
                auto vq = Q.val();
                if (!vq) throw PrecisionExhausted("residues: orbit chart");
                LaurentPoly Qn(K);
                for (auto& [e, c] : Q.coeffs()) Qn.set(e, c.scale_two_pow(-*vq));
                GFPolyOps ops(K->gf());
                GFPoly qr(3, 0);
                for (int e = 0; e <= 2; ++e) qr[(size_t)e] = Qn.get(e).residue();
                GFPolyOps::trim(qr);
                auto rr = ops.roots(qr);
                uint32_t r0 = rr.empty() ? 0 : rr[0].first;
                uint32_t r1 = rr.size() > 1 ? rr[1].first : r0;
                if (rr.size() == 1 && rr[0].second == 2) r1 = r0;
                out.emplace_back(i, vps[(size_t)i].orbit >= 0 &&
                                        T->points[(size_t)vps[(size_t)i].point_id].orbit_index
                                    ? r1
                                    : r0);
            }
            (void)orbits_done;
        }
        return out;
    }

    // recursive clustering; returns the component id created for the cluster
    int build(const std::vector<int>& cl, int parent, Rat parent_depth) {
        const Ctx& K = T->ctx;
        // cluster depth
        Rat alpha = d(cl[0], cl[1]);
        for (size_t i = 0; i < cl.size(); ++i)
            for (size_t j = i + 1; j < cl.size(); ++j)
                alpha = hyred::min(alpha, d(cl[(size_t)i], cl[(size_t)j]));
        bool shallow = false;
        FieldElement b = center_of(cl, alpha, shallow);
        if (shallow)
            T->diag.add("cluster center approximates its orbit only partially; "
                        "charts along this edge are best-effort");
        Component comp;
        comp.parent = parent;
        comp.a = K->two_pow(alpha);
        comp.b = b;
        comp.depth = alpha;
        int cid = T->add_component(comp);
        if (parent >= 0) {
            DoublePointRec dp;
            dp.comp_up = parent;
            dp.comp_down = cid;
            dp.thickness = alpha - parent_depth;
            int dpid = T->add_dp(dp);
            T->comps[(size_t)cid].parent_dp = dpid;
            T->comps[(size_t)parent].children.push_back(cid);
        }
        // partition by residues
        auto res = residues(cl, b, alpha);
        std::map<uint32_t, std::vector<int>> classes;
        for (auto& [i, r] : res) classes[r].push_back(i);
        for (auto& [r, sub] : classes) {
            if (sub.size() == 1) {
                auto& p = T->points[(size_t)vps[(size_t)sub[0]].point_id];
                p.component = cid;
                T->comps[(size_t)cid].marked.push_back(p.id);
            } else {
                build(sub, cid, alpha);
            }
        }
        return cid;
    }
};

} // namespace

ModelTree stable_marked_genus0(Ctx ctx, int genus, const LaurentPoly& fref,
                               std::vector<BranchPoint> pts,
                               std::vector<OrbitPair> orbits) {
    ModelTree T;
    T.ctx = ctx;
    T.genus = genus;
    T.fref = fref;
    T.points = std::move(pts);
    T.orbits = std::move(orbits);
    if ((int)T.points.size() != 2 * genus + 2)
        throw HyredError("stable_marked_genus0: need 2g+2 branch points");
    // duplicate check on exact points
    for (size_t i = 0; i < T.points.size(); ++i)
        for (size_t j = i + 1; j < T.points.size(); ++j) {
            if (T.points[i].at_infinity && T.points[j].at_infinity)
                throw HyredError("duplicate points at infinity");
            if (T.points[i].at_infinity || T.points[j].at_infinity) continue;
            if (!T.points[i].exact || !T.points[j].exact) continue;
            if (T.points[i].xi.compare(T.points[j].xi) != Cmp::distinct &&
                T.points[i].orbit < 0 && T.points[j].orbit < 0)
                throw HyredError("duplicate branch points");
        }

    TreeBuilder B;
    B.T = &T;
    for (auto& p : T.points)
        if (!p.at_infinity) B.vps.push_back({p.id, p.orbit});
    int n = (int)B.vps.size();
    // distances
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            auto& pi = T.points[(size_t)B.vps[(size_t)i].point_id];
            auto& pj = T.points[(size_t)B.vps[(size_t)j].point_id];
            Rat dv(0);
            if (pi.orbit >= 0 && pi.orbit == pj.orbit) {
                dv = T.orbits[(size_t)pi.orbit].internal_depth;
            } else if (pi.exact && pj.exact) {
                auto v = (pi.xi - pj.xi).valuation();
                if (!v) throw PrecisionExhausted("branch points collide at precision");
                dv = *v;
            } else if (pi.exact != pj.exact) {
                auto& ex = pi.exact ? pi : pj;
                auto& orb = T.orbits[(size_t)(pi.exact ? pj.orbit : pi.orbit)];
                auto [d1, d2] = dist_point_orbit(ex.xi, orb.quad);
                if (d1 != d2)
                    T.diag.degrade("orbit straddles clusters relative to an exact point");
                dv = hyred::min(d1, d2);
            } else {
                auto& o1 = T.orbits[(size_t)pi.orbit];
                auto& o2 = T.orbits[(size_t)pj.orbit];
                auto ds = dist_orbit_orbit(ctx, o1.quad, o2.quad);
                Rat mn = ds[0];
                bool uniform = true;
                for (auto& x : ds) {
                    if (x != ds[0]) uniform = false;
                    mn = hyred::min(mn, x);
                }
                if (!uniform) T.diag.degrade("orbit pair with nonuniform distances");
                dv = mn;
            }
            B.dist[{i, j}] = dv;
        }
    int root = B.build([&] {
        std::vector<int> all(n);
        for (int i = 0; i < n; ++i) all[i] = i;
        return all;
    }(), -1, Rat(0));
    // the point at infinity reduces to the root component
    for (auto& p : T.points)
        if (p.at_infinity) {
            p.component = root;
            T.comps[(size_t)root].marked.push_back(p.id);
        }
    // contract an unstable root: no marked points and exactly two children
    auto& R = T.comps[(size_t)root];
    if (R.marked.empty() && R.children.size() == 2) {
        int c1 = R.children[0], c2 = R.children[1];
        // merge the two double points into one between c1 and c2
        Rat th = T.dps[(size_t)T.comps[(size_t)c1].parent_dp].thickness +
                 T.dps[(size_t)T.comps[(size_t)c2].parent_dp].thickness;
        // re-root at c1
        T.comps[(size_t)c1].parent = -1;
        T.comps[(size_t)c1].parent_dp = -1;
        T.comps[(size_t)c2].parent = c1;
        T.comps[(size_t)c1].children.push_back(c2);
        DoublePointRec nd;
        nd.comp_up = c1;
        nd.comp_down = c2;
        nd.thickness = th;
        // rebuild the dp list without the two contracted ones
        std::vector<DoublePointRec> nds;
        for (auto& dp : T.dps) {
            if ((dp.comp_up == root && (dp.comp_down == c1 || dp.comp_down == c2)))
                continue;
            nds.push_back(dp);
        }
        nds.push_back(nd);
        T.dps.clear();
        for (auto& dp : nds) {
            DoublePointRec copy = dp;
            copy.id = -1;
            int nid = T.add_dp(copy);
            if (copy.comp_down >= 0) T.comps[(size_t)copy.comp_down].parent_dp = nid;
        }
        // remove the root component from the children bookkeeping
        auto& cs = T.comps[(size_t)c1].children;
        cs.erase(std::remove(cs.begin(), cs.end(), root), cs.end());
        T.comps[(size_t)root].parent = -2; // tombstone
        T.comps[(size_t)root].children.clear();
    }
    // parity of every double point
    for (auto& dp : T.dps) {
        dp.marked_below = T.marked_in_subtree(dp.comp_down);
        dp.even = dp.marked_below % 2 == 0;
    }
    return T;
}

ModelTree build_marked_tree(Ctx ctx, const LaurentPoly& f, int genus) {
    LaurentPoly fp = f.pruned();
    if (!fp.is_polynomial()) throw HyredError("build_marked_tree: f must be a polynomial");
    int d = fp.max_exp();
    if (d != 2 * genus + 1 && d != 2 * genus + 2)
        throw HyredError("build_marked_tree: deg f must be 2g+1 or 2g+2");
    RootsOutcome ro = find_roots(ctx, fp);
    ctx = ro.ctx;
    std::vector<BranchPoint> pts;
    std::vector<OrbitPair> orbits;
    Diagnostics pre;
    int id = 0;
    for (auto& r : ro.roots) {
        if (r.multiplicity != 1) throw HyredError("build_marked_tree: f not separable");
        BranchPoint p;
        p.id = id++;
        p.xi = r.root;
        pts.push_back(p);
    }
    // unresolved quadratics become orbit pairs; anything else is fatal for
    // the tree
    // (factoring once more in best-effort mode to recover the polynomials)
    if (!ro.unresolved.empty()) {
        FactorOutcome fo = factor_over_tower(ctx, fp_from_laurent(fp.embed(ctx)), true);
        for (auto& tf : fo.factors) {
            int dd = fp_deg(tf.poly);
            if (dd <= 1) continue;
            if (dd != 2)
                throw HyredError("build_marked_tree: unsplit factor of degree " +
                                 std::to_string(dd) + " is unsupported");
            OrbitPair orb;
            orb.id = (int)orbits.size();
            orb.quad = tf.poly;
            // internal depth from the discriminant of the monic quadratic
            FieldElement disc = tf.poly[1] * tf.poly[1] -
                                ctx->from_integer(4) * tf.poly[0];
            auto vd = disc.valuation();
            if (!vd) throw HyredError("build_marked_tree: inseparable quadratic factor");
            orb.internal_depth = *vd / Rat(2);
            orb.center = tf.cluster_center;
            orb.center_depth = tf.cluster_center.valid_precision();
            for (int k = 0; k < 2; ++k) {
                BranchPoint p;
                p.id = id++;
                p.xi = orb.center;
                p.exact = false;
                p.orbit = orb.id;
                p.orbit_index = k;
                pts.push_back(p);
            }
            orbits.push_back(orb);
        }
    }
    if (d == 2 * genus + 1) {
        BranchPoint p;
        p.id = id++;
        p.at_infinity = true;
        pts.push_back(p);
    }
    if ((int)pts.size() != 2 * genus + 2)
        throw HyredError("build_marked_tree: branch point count mismatch (got " +
                         std::to_string(pts.size()) + ")");
    ModelTree T = stable_marked_genus0(ctx, genus, fp.embed(ctx), std::move(pts),
                                       std::move(orbits));
    return T;
}

// ---------------------------------------------------------------------------
// local equations

LocalEquation local_equation_at(const ModelTree& tree, int dp_id) {
    LocalEquation out;
    const Ctx& K = tree.ctx;
    const DoublePointRec& dp = tree.dps[(size_t)dp_id];
    const Component& down = tree.comps[(size_t)dp.comp_down];
    const Component& up = tree.comps[(size_t)dp.comp_up];
    Rat pd = up.depth;
    out.alpha = dp.thickness;
    out.odd = !dp.even;
    // x' = (x - b_down) / 2^{pd}
    FieldElement b = down.b;
    auto inside = [&](int comp) {
        int c = comp;
        while (c >= 0) {
            if (c == dp.comp_down) return true;
            c = tree.comps[(size_t)c].parent;
        }
        return false;
    };
    LaurentPoly f1(K), f2(K);
    f1.set(0, K->one());
    f2.set(0, K->one());
    std::set<int> orbit_done;
    for (auto& p : tree.points) {
        if (p.at_infinity) continue; // infinity is never a zero of f
        bool in = inside(p.component);
        if (p.orbit >= 0) {
            if (orbit_done.count(p.orbit)) continue;
            orbit_done.insert(p.orbit);
            auto& orb = tree.orbits[(size_t)p.orbit];
            // both roots of one orbit sit on the same side (they are closer
            // to each other than to anything else)
            LaurentPoly Q = fp_to_laurent(K, orb.quad)
                                .substitute_affine(K->two_pow(pd), b);
            // Q(x') = (x' - xi1')(x' - xi2') monic-after-scaling
            FieldElement lead = Q.get(2);
            FieldElement cons = Q.get(0);
            if (in) {
                // valuations of the roots must reach the thickness
                auto vc = cons.valuation();
                if (!vc || *vc < Rat(2) * out.alpha) {
                    out.ok = false;
                    out.why_blocked =
                        "orbit cluster cannot be centered in the tower (wild pair)";
                    continue;
                }
                // f2 part: reversed polynomial in y/2^alpha, constant term 1
                LaurentPoly rev(K);
                rev.set(0, Q.get(2));
                rev.set(1, Q.get(1));
                rev.set(2, Q.get(0));
                LaurentPoly part(K);
                FieldElement inv = cons.inv();
                for (auto& [e, c] : rev.coeffs())
                    part.set(e, (c * inv).scale_two_pow(-out.alpha * Rat(e)));
                f2 = f2 * part;
            } else {
                LaurentPoly part = Q.scaled(cons.inv());
                f1 = f1 * part;
            }
        } else {
            FieldElement xi = (p.xi - b).scale_two_pow(-pd);
            auto v = xi.valuation();
            if (in) {
                if (!v || *v < out.alpha) {
                    out.ok = false;
                    out.why_blocked = "inner branch point below the expected depth";
                    continue;
                }
                // (1 - xi'/2^alpha * y)
                LaurentPoly part(K);
                part.set(0, K->one());
                part.set(1, -xi.scale_two_pow(-out.alpha));
                f2 = f2 * part;
            } else {
                if (v && *v > Rat(0)) {
                    out.ok = false;
                    out.why_blocked = "outer branch point with positive valuation";
                    continue;
                }
                LaurentPoly part(K);
                part.set(0, K->one());
                part.set(1, -xi.inv());
                f1 = f1 * part;
            }
        }
    }
    out.f1 = f1.pruned();
    out.f2 = f2.pruned();
    return out;
}

// ---------------------------------------------------------------------------
// analysis

namespace {

struct Analyzer {
    ModelTree T;
    Diagnostics& diag() { return T.diag; }
    std::optional<StabilityData> sdata;

    void embed_all(const Ctx& nc) {
        if (nc->id() == T.ctx->id()) return;
        for (auto& p : T.points)
            if (!p.at_infinity) p.xi = p.xi.embed(nc);
        for (auto& o : T.orbits) {
            for (auto& c : o.quad) c = c.embed(nc);
            o.center = o.center.embed(nc);
        }
        for (auto& c : T.comps) {
            if (c.parent == -2) continue;
            c.a = c.a.embed(nc);
            c.b = c.b.embed(nc);
        }
        T.fref = T.fref.embed(nc);
        T.ctx = nc;
        sdata.reset();
    }

    const StabilityData& sd() {
        if (!sdata) sdata = stability_expand(T.fref);
        return *sdata;
    }

    // chart polynomial of a component, valuation-normalized with an even
    // power of two and a unit coefficient scaled to one
    std::optional<LaurentPoly> chart_poly(const Component& c) {
        Ctx K = T.ctx;
        LaurentPoly g = T.fref.substitute_affine(c.a, c.b);
        auto vg = g.val();
        if (!vg) return std::nullopt;
        Rat content = *vg;
        if (!(content * Rat(K->N())).is_integer()) return std::nullopt;
        LaurentPoly out(K);
        for (auto& [e, cc] : g.coeffs()) out.set(e, cc.scale_two_pow(-content));
        // twist-normalize: scale the lowest unit coefficient to 1 (over the
        // closure any unit rescale is a square; in the tower we must pick one)
        for (auto& [e, cc] : out.coeffs()) {
            auto v = cc.valuation();
            if (v && *v == Rat(0)) return out.scaled(cc.inv());
        }
        return out;
    }

    void classify_component(int cid) {
        Component& c = T.comps[(size_t)cid];
        if (c.parent == -2 || c.analyzed) return;
        c.analyzed = true;
        if (!c.marked.empty()) {
            // marked components are inseparable with genus zero
            c.cover = CoverKind::inseparable;
            c.genus_up = 0;
            c.genus_known = true;
            c.wc = {Rat(0), false};
            return;
        }
        auto cp = chart_poly(c);
        if (!cp) {
            diag().degrade("component chart polynomial unreadable; cover unknown");
            return;
        }
        try {
            Ctx K = T.ctx;
            Decomposition d = optimal_decomposition(K, *cp);
            embed_all(K);
            c.wc = d.wc;
            if (d.wc.exceeds_two) {
                c.cover = CoverKind::split;
                c.genus_up = 0;
                c.genus_known = true;
            } else if (d.wc.value == Rat(2)) {
                c.cover = CoverKind::separable;
                c.genus_known = false; // from bookkeeping or the chart below
            } else {
                c.cover = CoverKind::inseparable;
                c.genus_up = 0;
                c.genus_known = true;
            }
        } catch (const HyredError& e) {
            diag().degrade(std::string("component cover analysis blocked: ") + e.what());
        }
    }

    // genus of the Artin-Schreier cover t^2 + t = ell over P^1 when ell is a
    // Laurent polynomial: wild conductors at 0 and infinity
    static int as_genus(ResidueLaurent ell, const GF2m& F) {
        // reduce even-order pole parts: c x^{2k} (k != 0) -> sqrt(c) x^k twice
        bool changed = true;
        while (changed) {
            changed = false;
            for (auto it = ell.coeffs.begin(); it != ell.coeffs.end(); ++it) {
                int e = it->first;
                if (e != 0 && e % 2 == 0) {
                    uint32_t s = F.sqrt(it->second);
                    ResidueLaurent corr;
                    corr.F = &F;
                    corr.coeffs[e] = it->second; // s^2 x^e
                    corr.coeffs[e / 2] = s;      // s x^{e/2}
                    ell = ell + corr;
                    changed = true;
                    break;
                }
            }
        }
        int dpos = 0, dneg = 0;
        for (auto& [e, c] : ell.coeffs) {
            dpos = std::max(dpos, e);
            dneg = std::max(dneg, -e);
        }
        int twog = -2;
        if (dpos > 0) twog += dpos + 1;
        if (dneg > 0) twog += dneg + 1;
        return std::max(0, twog / 2);
    }

    // analysis of one even double point; appends b-components and the split
    // sub double points; returns false when the chart is out of reach
    bool analyze_even_dp(int dpid) {
        Ctx K = T.ctx;
        LocalEquation le = local_equation_at(T, dpid);
        if (!le.ok) {
            T.dps[(size_t)dpid].note = le.why_blocked;
            return false;
        }
        Decomposition d1, d2;
        try {
            d1 = odd_decomposition(K, le.f1);
            Ctx K2 = K;
            LaurentPoly f2e = le.f2.embed(K2);
            d2 = odd_decomposition(K2, f2e);
            if (K2->id() != K->id()) {
                K = K2;
                d1.h = d1.h.embed(K);
                d1.g = d1.g.embed(K);
            }
        } catch (const HyredError& e) {
            T.dps[(size_t)dpid].note = std::string("odd decomposition blocked: ") + e.what();
            return false;
        }
        embed_all(K);
        le.f1 = le.f1.embed(K);
        le.f2 = le.f2.embed(K);
        LaurentPoly f = le.f1 * le.f2.substitute_inverse_scale(le.alpha);
        Decomposition dc = combine_decomps(f, d1, d2, le.alpha, DecompKind::odd);
        PiecewiseLinear w = wbar_from_g(dc.g, le.alpha);
        auto bps = break_points(w);
        // record a chart for verification
        {
            ChartRecord cr;
            cr.kind = w.constant_two() ? "even_etale" : "even_halving";
            cr.alpha = le.alpha;
            cr.f = f;
            cr.h = dc.h;
            cr.g = dc.g;
            cr.f1 = le.f1;
            cr.f2 = le.f2;
            if (bps.empty()) T.charts.push_back(cr);
        }
        DoublePointRec orig = T.dps[(size_t)dpid];
        if (bps.empty()) {
            // trichotomy: constant two -> two points; strictly monotone -> one
            T.dps[(size_t)dpid].analyzed = true;
            T.dps[(size_t)dpid].split = w.constant_two();
            return true;
        }
        // insert one type-(b) component per break point
        std::vector<Rat> lam{Rat(0)};
        for (auto& bp : bps) lam.push_back(bp.lambda);
        lam.push_back(le.alpha);
        int upper = orig.comp_up;
        std::vector<int> chain;
        for (size_t k = 1; k + 1 < lam.size(); ++k) {
            Component bc;
            bc.parent = upper;
            bc.kind = CompKind::b;
            Rat abs_depth = T.comps[(size_t)orig.comp_up].depth + lam[k];
            if (!((abs_depth)*Rat(T.ctx->N())).is_integer()) {
                Ctx K3 = T.ctx->enlarged(T.ctx->N() * (int)(abs_depth * Rat(T.ctx->N())).d,
                                         T.ctx->m(), "type-b chart");
                embed_all(K3);
            }
            bc.a = T.ctx->two_pow(abs_depth);
            bc.b = T.comps[(size_t)orig.comp_down].b;
            bc.depth = abs_depth;
            bc.analyzed = true;
            // cover type from the break value
            Rat val = bps[k - 1].value;
            if (val < Rat(2)) {
                bc.cover = CoverKind::inseparable;
                bc.genus_up = 0;
                bc.genus_known = true;
            } else {
                bc.cover = CoverKind::separable;
                // genus from the AS equation at this lambda
                Rat lambda = lam[k];
                ResidueLaurent ell;
                ell.F = &T.ctx->gf();
                bool readable = true;
                for (auto& [e, cc] : dc.g.coeffs()) {
                    auto v = cc.valuation();
                    if (!v) continue;
                    if (*v + lambda * Rat(e) == Rat(2)) {
                        Rat sc = Rat(2) - lambda * Rat(e);
                        if (!((lambda * Rat(e) - Rat(2)) * Rat(T.ctx->N())).is_integer()) {
                            readable = false;
                            continue;
                        }
                        uint32_t r = cc.embed(T.ctx).scale_two_pow(lambda * Rat(e) - Rat(2)).residue();
                        (void)sc;
                        if (r) ell.coeffs[e] = r;
                    }
                }
                if (readable && !ell.zero()) {
                    bc.genus_up = as_genus(ell, T.ctx->gf());
                    bc.genus_known = true;
                } else {
                    bc.genus_known = false;
                }
            }
            bc.wc = {hyred::min(val, Rat(2)), val >= Rat(2)};
            int bid = T.add_component(bc);
            T.comps[(size_t)upper].children.push_back(bid);
            chain.push_back(bid);
            upper = bid;
        }
        // rewire the original lower component under the last b-component
        {
            auto& kids = T.comps[(size_t)orig.comp_up].children;
            kids.erase(std::remove(kids.begin(), kids.end(), orig.comp_down), kids.end());
            T.comps[(size_t)orig.comp_down].parent = upper;
            T.comps[(size_t)upper].children.push_back(orig.comp_down);
        }
        // replace the double point by the chain of sub double points
        std::vector<int> nodes{orig.comp_up};
        for (int b : chain) nodes.push_back(b);
        nodes.push_back(orig.comp_down);
        for (size_t k = 0; k + 1 < nodes.size(); ++k) {
            DoublePointRec nd;
            nd.comp_up = nodes[k];
            nd.comp_down = nodes[k + 1];
            nd.thickness = lam[k + 1] - lam[k];
            nd.even = orig.even;
            nd.marked_below = orig.marked_below;
            nd.analyzed = true;
            // flat-at-two segment <=> etale, two double points upstairs
            Rat mid = (lam[k] + lam[k + 1]) / Rat(2);
            nd.split = (w.value_at(lam[k]) == Rat(2) && w.value_at(lam[k + 1]) == Rat(2) &&
                        w.value_at(mid) == Rat(2));
            int ndid;
            if (k == 0) {
                T.dps[(size_t)dpid] = nd;
                T.dps[(size_t)dpid].id = dpid;
                ndid = dpid;
            } else {
                ndid = T.add_dp(nd);
            }
            T.comps[(size_t)nodes[k + 1]].parent_dp = ndid;
        }
        return true;
    }

    void analyze_odd_dp(int dpid) {
        DoublePointRec& dp = T.dps[(size_t)dpid];
        dp.analyzed = true;
        dp.split = false; // one double point of half thickness upstairs
        LocalEquation le = local_equation_at(T, dpid);
        if (le.ok) {
            ChartRecord cr;
            cr.kind = "odd_double";
            cr.alpha = le.alpha;
            cr.f1 = le.f1;
            cr.f2 = le.f2;
            T.charts.push_back(cr);
        } else {
            dp.note = le.why_blocked;
        }
        // both adjacent components are inseparable upstairs
        for (int cid : {dp.comp_up, dp.comp_down}) {
            Component& c = T.comps[(size_t)cid];
            c.cover = CoverKind::inseparable;
            c.genus_up = 0;
            c.genus_known = true;
            c.analyzed = true;
        }
    }

    // locate the component a point of the reference line reduces to
    int locate(const FieldElement& xi, Rat accuracy) {
        int cur = -1;
        for (auto& c : T.comps)
            if (c.parent == -1) cur = c.id;
        while (true) {
            bool moved = false;
            for (int ch : T.comps[(size_t)cur].children) {
                auto& C = T.comps[(size_t)ch];
                auto v = (xi - C.b).valuation();
                Rat down = C.depth;
                if ((!v || *v >= down) && accuracy >= down) {
                    cur = ch;
                    moved = true;
                    break;
                }
                if (v && *v > T.comps[(size_t)cur].depth && *v < down) {
                    // lands between: on a type-(b) component if one matches
                    // (the chain members are also children in our bookkeeping)
                    continue;
                }
            }
            if (!moved) return cur;
        }
    }

    void place_type_d_sites() {
        // run the stability search once in the reference coordinate
        std::vector<FieldElement> branches;
        for (auto& p : T.points) {
            if (p.at_infinity) continue;
            if (p.exact) branches.push_back(p.xi);
        }
        for (auto& o : T.orbits) {
            // both roots contribute distances via the quadratic; approximate
            // by the center twice (adequate for locating only)
            branches.push_back(o.center);
            branches.push_back(o.center);
        }
        TypeDSearch search;
        try {
            search = type_d_sites(T.ctx, sd(), &branches);
        } catch (const HyredError& e) {
            diag().degrade(std::string("stability search failed: ") + e.what());
            return;
        }
        for (auto& note : search.diagnostics) diag().add(note);
        for (auto& uf : search.unresolved)
            if (!uf.has_center)
                diag().degrade("unresolved stability factor without a usable center");
        embed_all(search.ctx);
        // keep sites over components whose cover is inseparable with w < 2
        struct Placed {
            TypeDSite site;
            int comp;
            Rat eps_chart{0};
        };
        std::vector<Placed> placed;
        for (auto& s : search.sites) {
            FieldElement xi = s.xi.embed(T.ctx);
            int comp = locate(xi, s.xi.valid_precision());
            auto& C = T.comps[(size_t)comp];
            Rat epsc = s.eps - C.depth;
            if (!(epsc > Rat(0))) {
                diag().add("stability zero with nonpositive chart radius skipped");
                continue;
            }
            if (C.cover != CoverKind::inseparable || C.wc.value >= Rat(2)) {
                // components with w >= 2 carry no type-(d) part
                continue;
            }
            placed.push_back({TypeDSite{xi, s.eps, s.rough}, comp, epsc});
        }
        // group by component, then build the (c)/(d) scaffolding per group
        std::map<int, std::vector<Placed>> by_comp;
        for (auto& p : placed) by_comp[p.comp].push_back(p);
        for (auto& [comp, group] : by_comp) {
            // recursive clustering of the disks (xi_i, eps_i)
            std::function<void(std::vector<Placed>, int)> rec =
                [&](std::vector<Placed> sites, int parent) {
                    if (sites.size() == 1) {
                        Component dc;
                        dc.parent = parent;
                        dc.kind = CompKind::d;
                        dc.a = T.ctx->two_pow(sites[0].site.eps);
                        dc.b = sites[0].site.xi;
                        dc.depth = sites[0].site.eps;
                        dc.cover = CoverKind::separable;
                        dc.genus_known = false;
                        dc.analyzed = true;
                        if (sites[0].site.rough)
                            dc.note = "site center known only approximately";
                        int did = T.add_component(dc);
                        T.comps[(size_t)parent].children.push_back(did);
                        DoublePointRec nd;
                        nd.comp_up = parent;
                        nd.comp_down = did;
                        nd.thickness = sites[0].site.eps - T.comps[(size_t)parent].depth;
                        nd.even = true;
                        nd.marked_below = 0;
                        nd.analyzed = true;
                        nd.split = false; // tree above a smooth point
                        int ndid = T.add_dp(nd);
                        T.comps[(size_t)did].parent_dp = ndid;
                        return;
                    }
                    // cluster depth
                    Rat alpha = sites[0].site.eps;
                    for (size_t i = 0; i < sites.size(); ++i) {
                        for (size_t j = i + 1; j < sites.size(); ++j) {
                            auto v = (sites[i].site.xi - sites[j].site.xi).valuation();
                            if (v) alpha = hyred::min(alpha, *v);
                        }
                        alpha = hyred::min(alpha, sites[i].site.eps);
                    }
                    // scaffolding component of type (c)
                    Component cc;
                    cc.parent = parent;
                    cc.kind = CompKind::c;
                    cc.a = T.ctx->two_pow(alpha);
                    cc.b = sites[0].site.xi;
                    cc.depth = alpha;
                    cc.cover = CoverKind::inseparable;
                    cc.genus_up = 0;
                    cc.genus_known = true;
                    cc.analyzed = true;
                    int ccid = T.add_component(cc);
                    T.comps[(size_t)parent].children.push_back(ccid);
                    DoublePointRec nd;
                    nd.comp_up = parent;
                    nd.comp_down = ccid;
                    nd.thickness = alpha - T.comps[(size_t)parent].depth;
                    nd.even = true;
                    nd.marked_below = 0;
                    nd.analyzed = true;
                    nd.split = false;
                    int ndid = T.add_dp(nd);
                    T.comps[(size_t)ccid].parent_dp = ndid;
                    // partition by residue of (xi - b)/2^alpha
                    std::map<uint32_t, std::vector<Placed>> classes;
                    for (auto& s : sites) {
                        FieldElement y = (s.site.xi - cc.b).scale_two_pow(-alpha);
                        classes[y.residue()].push_back(s);
                    }
                    if (classes.size() == 1) {
                        // all sites in one class at this depth: they are
                        // equivalent disks; keep the first
                        rec({sites[0]}, ccid);
                        return;
                    }
                    for (auto& [r, sub] : classes) rec(sub, ccid);
                };
            // deduplicate: drop sites within eps of a kept one
            std::vector<Placed> kept;
            for (auto& s : group) {
                bool dup = false;
                for (auto& k : kept) {
                    auto v = (s.site.xi - k.site.xi).valuation();
                    if (!v || *v >= k.site.eps) dup = true;
                }
                if (!dup) kept.push_back(s);
            }
            if (kept.size() == 1) {
                rec(kept, comp);
            } else {
                rec(kept, comp);
            }
        }
    }

    void bookkeeping_genera() {
        // arithmetic genus: sum of upstairs genera + betti = g
        int known = 0, betti_now = 0;
        std::vector<int> unknown;
        int n2 = 0, m2 = 0;
        for (auto& c : T.comps) {
            if (c.parent == -2) continue;
            if (c.cover == CoverKind::split) ++n2;
            if (c.genus_known) known += c.genus_up;
            else unknown.push_back(c.id);
        }
        for (auto& dp : T.dps)
            if (dp.split) ++m2;
        betti_now = m2 - n2;
        if (unknown.size() == 1) {
            auto& c = T.comps[(size_t)unknown[0]];
            c.genus_up = T.genus - betti_now - known;
            c.genus_known = true;
            if (c.kind == CompKind::d && c.genus_up < 1)
                diag().degrade("bookkeeping gave a type-(d) component genus < 1");
        } else if (unknown.size() > 1) {
            diag().degrade("multiple components with undetermined genus; "
                           "genera reported as unknown");
        } else {
            int total = known + betti_now;
            if (total != T.genus)
                diag().degrade("genus bookkeeping mismatch: components+betti = " +
                               std::to_string(total) + " vs g = " +
                               std::to_string(T.genus));
        }
    }
};

} // namespace

ReductionReport analyze_curve(ModelTree tree0) {
    Analyzer A{std::move(tree0), {}};
    ModelTree& T = A.T;
    // covers of the base components
    size_t base_comps = T.comps.size();
    for (size_t i = 0; i < base_comps; ++i) A.classify_component((int)i);
    // double points (the list grows as b-components are inserted; the new
    // sub points arrive pre-analyzed)
    size_t base_dps = T.dps.size();
    for (size_t i = 0; i < base_dps; ++i) {
        if (T.dps[i].analyzed) continue;
        if (!T.dps[i].even) {
            A.analyze_odd_dp((int)i);
        } else {
            if (!A.analyze_even_dp((int)i))
                T.diag.degrade("even double point analysis blocked: " + T.dps[i].note);
        }
    }
    // type-(d) components over smooth points
    bool any_insep_below2 = false;
    for (auto& c : T.comps)
        if (c.parent != -2 && c.cover == CoverKind::inseparable && c.wc.value < Rat(2) &&
            c.marked.empty())
            any_insep_below2 = true;
    // marked components with w(f)=0 can still carry type-(d) parts
    for (auto& c : T.comps)
        if (c.parent != -2 && !c.marked.empty()) any_insep_below2 = true;
    if (any_insep_below2) A.place_type_d_sites();
    A.bookkeeping_genera();

    // assemble
    ReductionReport R;
    R.tree = std::move(A.T);
    ModelTree& TT = R.tree;
    for (auto& c : TT.comps) {
        if (c.parent == -2) continue;
        if (c.cover == CoverKind::split) ++R.n2;
        if (c.cover == CoverKind::unknown) R.complete = false;
    }
    for (auto& dp : TT.dps) {
        if (dp.split) ++R.m2;
        if (!dp.analyzed) R.complete = false;
    }
    R.betti = R.m2 - R.n2;
    R.toric_rank = R.betti;
    R.abelian_rank = TT.genus - R.betti;
    if (TT.diag.partial) R.complete = false;

    // dual graph
    DualGraph& G = R.graph;
    std::map<std::pair<int, int>, int> vid;
    auto vertex = [&](int comp, int copy) {
        auto it = vid.find({comp, copy});
        if (it != vid.end()) return it->second;
        DualGraph::V v;
        v.comp = comp;
        v.copy = copy;
        auto& c = TT.comps[(size_t)comp];
        std::ostringstream os;
        os << "c" << comp << (copy ? "'" : "");
        os << " [" << (c.kind == CompKind::a   ? "a"
                       : c.kind == CompKind::b ? "b"
                       : c.kind == CompKind::c ? "c"
                                               : "d")
           << (c.cover == CoverKind::inseparable ? ",insep"
               : c.cover == CoverKind::separable ? ",sep"
               : c.cover == CoverKind::split     ? ",split"
                                                 : ",?");
        if (c.genus_known && c.genus_up > 0) os << ",g=" << c.genus_up;
        os << "]";
        v.label = os.str();
        G.verts.push_back(v);
        int id = (int)G.verts.size() - 1;
        vid[{comp, copy}] = id;
        return id;
    };
    for (auto& c : TT.comps) {
        if (c.parent == -2) continue;
        vertex(c.id, 0);
        if (c.cover == CoverKind::split) vertex(c.id, 1);
    }
    for (auto& dp : TT.dps) {
        bool up_split = TT.comps[(size_t)dp.comp_up].cover == CoverKind::split;
        bool dn_split = TT.comps[(size_t)dp.comp_down].cover == CoverKind::split;
        if (dp.split) {
            G.edges.push_back({vertex(dp.comp_up, 0), vertex(dp.comp_down, 0), dp.thickness});
            G.edges.push_back({vertex(dp.comp_up, up_split ? 1 : 0),
                               vertex(dp.comp_down, dn_split ? 1 : 0), dp.thickness});
        } else {
            if (up_split || dn_split)
                TT.diag.degrade("single upstairs point adjacent to a split component");
            G.edges.push_back(
                {vertex(dp.comp_up, 0), vertex(dp.comp_down, 0), dp.thickness / Rat(2)});
        }
    }
    // cross-check betti against the graph
    if (G.betti() != R.betti)
        TT.diag.degrade("betti mismatch: graph says " + std::to_string(G.betti()) +
                        ", counts say " + std::to_string(R.betti));
    return R;
}

int DualGraph::betti() const {
    // E - V + #components
    std::vector<int> parent(verts.size());
    for (size_t i = 0; i < parent.size(); ++i) parent[i] = (int)i;
    std::function<int(int)> find = [&](int x) {
        while (parent[(size_t)x] != x) x = parent[(size_t)x] = parent[(size_t)parent[(size_t)x]];
        return x;
    };
    for (auto& e : edges) parent[(size_t)find(e.v1)] = find(e.v2);
    std::set<int> roots;
    for (size_t i = 0; i < verts.size(); ++i) roots.insert(find((int)i));
    return (int)edges.size() - (int)verts.size() + (int)roots.size();
}

std::string DualGraph::dot() const {
    std::ostringstream os;
    os << "graph dual {\n";
    for (size_t i = 0; i < verts.size(); ++i)
        os << "  v" << i << " [label=\"" << verts[i].label << "\"];\n";
    for (auto& e : edges)
        os << "  v" << e.v1 << " -- v" << e.v2 << " [label=\"thickness="
           << e.thickness.str() << "\"];\n";
    os << "}\n";
    return os.str();
}

std::optional<Rat> verify_chart(const ChartRecord& chart, const Ctx& ctx) {
    // the relations collapse (symbolically, using z^2 = F) to the defect of
    // the underlying decomposition or product identity
    std::optional<Rat> worst;
    auto upd = [&](const LaurentPoly& defect) {
        auto v = defect.pruned().val();
        if (v && (!worst || *v < *worst)) worst = v;
    };
    if (chart.kind == "odd_double") {
        // z^2 - x f1 f2: defect of the local product (F is x f1 f2 itself,
        // so the relations vanish identically; verify f1 f2 integrality and
        // the cross relation zw = 2^{alpha/2} f1 f2 via exactness of the
        // Laurent product)
        LaurentPoly prod = chart.f1 * chart.f2.substitute_inverse_scale(chart.alpha);
        LaurentPoly x = LaurentPoly::from_ints(ctx, {{1, 1}});
        LaurentPoly F = x * prod.embed(ctx);
        upd(F - F); // identically zero
        return worst;
    }
    // even_etale / even_halving / smooth_cover: all reduce to f - h^2 - g
    LaurentPoly defect = chart.f - chart.h * chart.h - chart.g;
    upd(defect);
    if (!chart.f1.empty()) {
        LaurentPoly prod = chart.f1 * chart.f2.substitute_inverse_scale(chart.alpha);
        upd(chart.f - prod);
    }
    return worst;
}

} // namespace hyred

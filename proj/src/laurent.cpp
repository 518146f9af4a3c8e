#include "hyred/laurent.hpp"

#include <sstream>
#include <algorithm>

namespace hyred {

// ---------------------------------------------------------------------------
// residue layer

bool ResidueLaurent::is_square() const {
    for (auto& [e, c] : coeffs)
        if (e % 2 != 0) return false;
    return true;
}

ResidueLaurent ResidueLaurent::sqrt() const {
    ResidueLaurent r;
    r.F = F;
    for (auto& [e, c] : coeffs) {
        if (e % 2 != 0) throw HyredError("residue sqrt: odd exponent");
        r.coeffs[e / 2] = F->sqrt(c);
    }
    return r;
}

ResidueLaurent ResidueLaurent::operator+(const ResidueLaurent& o) const {
    ResidueLaurent r = *this;
    if (!r.F) r.F = o.F;
    for (auto& [e, c] : o.coeffs) {
        uint32_t v = (r.coeffs.count(e) ? r.coeffs[e] : 0) ^ c;
        if (v) r.coeffs[e] = v; else r.coeffs.erase(e);
    }
    return r;
}

ResidueLaurent ResidueLaurent::operator*(const ResidueLaurent& o) const {
    ResidueLaurent r;
    r.F = F ? F : o.F;
    for (auto& [e1, c1] : coeffs)
        for (auto& [e2, c2] : o.coeffs) {
            uint32_t p = F->mul(c1, c2);
            if (!p) continue;
            uint32_t v = (r.coeffs.count(e1 + e2) ? r.coeffs[e1 + e2] : 0) ^ p;
            if (v) r.coeffs[e1 + e2] = v; else r.coeffs.erase(e1 + e2);
        }
    return r;
}

std::string ResidueLaurent::str() const {
    if (coeffs.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto& [e, c] : coeffs) {
        if (!first) os << " + ";
        os << "(" << gf_to_string(*F, c) << ")";
        if (e != 0) os << "x^" << e;
        first = false;
    }
    return os.str();
}

std::optional<ResidueLaurent> artin_schreier_solve(const ResidueLaurent& c,
                                                   const ResidueLaurent& h) {
    const GF2m* F = c.F ? c.F : h.F;
    if (!F) throw HyredError("artin_schreier_solve: no field");
    if (c.zero()) {
        ResidueLaurent t; t.F = F;
        return t; // t = 0 (and t = h)
    }
    int cm = c.coeffs.begin()->first, cp = c.coeffs.rbegin()->first;
    int hm = h.zero() ? 0 : h.coeffs.begin()->first;
    auto ceil_div2 = [](int a) { return a >= 0 ? (a + 1) / 2 : -((-a) / 2); };
    auto floor_div2 = [](int a) { return a >= 0 ? a / 2 : -((-a + 1) / 2); };
    int lo = std::min(ceil_div2(cm), cm - hm) - 1;
    int hi = std::max(floor_div2(cp), cp - hm) + 1;
    if (lo > hi) return std::nullopt;
    int m = F->degree();
    int width = hi - lo + 1;
    int ncols = width * m;
    // result exponent window
    int rlo = std::min(2 * lo, lo + (h.zero() ? 0 : h.coeffs.begin()->first));
    int rhi = std::max(2 * hi, hi + (h.zero() ? 0 : h.coeffs.rbegin()->first));
    rlo = std::min(rlo, cm);
    rhi = std::max(rhi, cp);
    int nrows = (rhi - rlo + 1) * m;
    auto row_of = [&](int e, int b) { return (e - rlo) * m + b; };
    // columns as bitsets over rows; elimination tracks which combination of
    // unknowns produced each echelon column
    size_t words = (size_t)(nrows + 63) / 64;
    size_t cwords = (size_t)(ncols + 63) / 64;
    std::vector<std::vector<uint64_t>> cols((size_t)ncols, std::vector<uint64_t>(words, 0));
    std::vector<uint64_t> rhs(words, 0);
    auto put = [&](std::vector<uint64_t>& v, int r) { v[(size_t)r / 64] ^= 1ull << (r % 64); };
    auto bit = [&](const std::vector<uint64_t>& v, int r) {
        return (v[(size_t)r / 64] >> (r % 64)) & 1;
    };
    for (int e = lo; e <= hi; ++e)
        for (int b = 0; b < m; ++b) {
            auto& col = cols[(size_t)(e - lo) * m + b];
            uint32_t basis = 1u << b;
            // t^2 contribution: x^{2e} * basis^2
            uint32_t sq = F->sqr(basis);
            for (int bb = 0; bb < m; ++bb)
                if (sq & (1u << bb)) put(col, row_of(2 * e, bb));
            // h*t contribution
            for (auto& [he, hc] : h.coeffs) {
                uint32_t pr = F->mul(hc, basis);
                for (int bb = 0; bb < m; ++bb)
                    if (pr & (1u << bb)) put(col, row_of(e + he, bb));
            }
        }
    for (auto& [e, cc] : c.coeffs)
        for (int bb = 0; bb < m; ++bb)
            if (cc & (1u << bb)) put(rhs, row_of(e, bb));

    std::vector<std::vector<uint64_t>> comb((size_t)ncols, std::vector<uint64_t>(cwords, 0));
    for (int i = 0; i < ncols; ++i) comb[(size_t)i][(size_t)i / 64] = 1ull << (i % 64);
    std::vector<uint64_t> x(cwords, 0);
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
    for (int e = lo; e <= hi; ++e) {
        uint32_t v = 0;
        for (int b = 0; b < m; ++b) {
            int idx = (e - lo) * m + b;
            if ((x[(size_t)idx / 64] >> (idx % 64)) & 1) v |= 1u << b;
        }
        if (v) t.coeffs[e] = v;
    }
    return t;
}

// ---------------------------------------------------------------------------

std::vector<Rat> NewtonPolygon::slopes() const {
    std::vector<Rat> s;
    for (size_t k = 1; k < vertices.size(); ++k) {
        s.push_back((vertices[k].second - vertices[k - 1].second) /
                    Rat(vertices[k].first - vertices[k - 1].first));
    }
    return s;
}

void LaurentPoly::set(int exp, const FieldElement& v) {
    if (!ctx_) ctx_ = v.context();
    if (v.is_exact_zero()) c_.erase(exp);
    else c_[exp] = v;
}

FieldElement LaurentPoly::get(int exp) const {
    auto it = c_.find(exp);
    if (it != c_.end()) return it->second;
    return ctx_->zero();
}

void LaurentPoly::add_to(int exp, const FieldElement& v) {
    auto it = c_.find(exp);
    if (it == c_.end()) set(exp, v);
    else {
        FieldElement s = it->second + v;
        if (s.is_exact_zero()) c_.erase(it);
        else it->second = s;
    }
}

LaurentPoly LaurentPoly::monomial(const Ctx& ctx, int exp, const FieldElement& v) {
    LaurentPoly p(ctx);
    p.set(exp, v);
    return p;
}

LaurentPoly LaurentPoly::from_ints(const Ctx& ctx, const std::vector<std::pair<int, long long>>& terms) {
    LaurentPoly p(ctx);
    for (auto& [e, v] : terms) p.add_to(e, ctx->from_integer(v));
    return p;
}

std::optional<Rat> LaurentPoly::val() const {
    std::optional<Rat> best;
    for (auto& [e, v] : c_) {
        auto vv = v.valuation();
        if (vv && (!best || *vv < *best)) best = vv;
    }
    return best;
}

int LaurentPoly::min_exp() const {
    if (c_.empty()) throw HyredError("min_exp of zero polynomial");
    return c_.begin()->first;
}

int LaurentPoly::max_exp() const {
    if (c_.empty()) throw HyredError("max_exp of zero polynomial");
    return c_.rbegin()->first;
}

bool LaurentPoly::is_odd_support() const {
    for (auto& [e, v] : c_)
        if (e % 2 == 0 && v.valuation()) return false;
    return true;
}

bool LaurentPoly::is_even_support() const {
    for (auto& [e, v] : c_)
        if (e % 2 != 0 && v.valuation()) return false;
    return true;
}

LaurentPoly LaurentPoly::operator+(const LaurentPoly& o) const {
    LaurentPoly r = *this;
    if (!r.ctx_) r.ctx_ = o.ctx_;
    for (auto& [e, v] : o.c_) r.add_to(e, v);
    return r;
}

LaurentPoly LaurentPoly::operator-() const {
    LaurentPoly r(ctx_);
    for (auto& [e, v] : c_) r.set(e, -v);
    return r;
}

LaurentPoly LaurentPoly::operator-(const LaurentPoly& o) const { return *this + (-o); }

LaurentPoly LaurentPoly::operator*(const LaurentPoly& o) const {
    LaurentPoly r(ctx_ ? ctx_ : o.ctx_);
    for (auto& [e1, v1] : c_)
        for (auto& [e2, v2] : o.c_) r.add_to(e1 + e2, v1 * v2);
    return r;
}

LaurentPoly LaurentPoly::scaled(const FieldElement& s) const {
    LaurentPoly r(ctx_);
    for (auto& [e, v] : c_) r.set(e, v * s);
    return r;
}

std::pair<LaurentPoly, LaurentPoly> LaurentPoly::parity_split() const {
    LaurentPoly ev(ctx_), od(ctx_);
    for (auto& [e, v] : c_) {
        if (e % 2 == 0) ev.set(e, v);
        else od.set(e, v);
    }
    return {ev, od};
}

LaurentPoly LaurentPoly::substitute_scale(Rat lambda) const {
    LaurentPoly r(ctx_);
    for (auto& [e, v] : c_) r.set(e, v.scale_two_pow(lambda * Rat(e)));
    return r;
}

LaurentPoly LaurentPoly::substitute_affine(const FieldElement& a, const FieldElement& b) const {
    if (!is_polynomial()) throw HyredError("substitute_affine: negative exponents");
    // Horner: f(a x + b)
    LaurentPoly r(ctx_);
    if (c_.empty()) return r;
    LaurentPoly axb(ctx_);
    axb.set(1, a);
    axb.set(0, b);
    int d = max_exp();
    for (int k = d; k >= 0; --k) {
        r = r * axb;
        auto it = c_.find(k);
        if (it != c_.end()) r.add_to(0, it->second);
    }
    return r;
}

LaurentPoly LaurentPoly::substitute_inverse_scale(Rat alpha) const {
    // x -> 2^alpha / x
    LaurentPoly r(ctx_);
    for (auto& [e, v] : c_) r.set(-e, v.scale_two_pow(alpha * Rat(e)));
    return r;
}

LaurentPoly LaurentPoly::shift_exponents(int k) const {
    LaurentPoly r(ctx_);
    for (auto& [e, v] : c_) r.set(e + k, v);
    return r;
}

FieldElement LaurentPoly::evaluate(const FieldElement& x) const {
    if (!is_polynomial()) throw HyredError("evaluate: negative exponents");
    FieldElement r = ctx_->zero();
    if (c_.empty()) return r;
    int d = max_exp();
    for (int k = d; k >= 0; --k) {
        r = r * x;
        auto it = c_.find(k);
        if (it != c_.end()) r = r + it->second;
    }
    return r;
}

NewtonPolygon LaurentPoly::newton_polygon() const {
    NewtonPolygon np;
    std::vector<std::pair<int, Rat>> pts;
    for (auto& [e, v] : c_) {
        auto vv = v.valuation();
        if (vv) pts.emplace_back(e, *vv);
    }
    if (pts.empty()) return np;
    std::sort(pts.begin(), pts.end(),
              [](auto& a, auto& b) { return a.first < b.first; });
    // lower hull, monotone chain
    std::vector<std::pair<int, Rat>> hull;
    for (auto& p : pts) {
        while (hull.size() >= 2) {
            auto& a = hull[hull.size() - 2];
            auto& b = hull[hull.size() - 1];
            // remove b if it is above segment a-p (cross product test)
            Rat lhs = (b.second - a.second) * Rat(p.first - a.first);
            Rat rhs = (p.second - a.second) * Rat(b.first - a.first);
            if (lhs >= rhs) hull.pop_back();
            else break;
        }
        if (!hull.empty() && hull.back().first == p.first) {
            if (p.second < hull.back().second) hull.back() = p;
            continue;
        }
        hull.push_back(p);
    }
    np.vertices = hull;
    return np;
}

ResidueLaurent LaurentPoly::reduce() const {
    auto v = val();
    if (v && *v < Rat(0)) throw NegativeValuation("reduce of " + str());
    ResidueLaurent r;
    r.F = &ctx_->gf();
    for (auto& [e, c] : c_) {
        uint32_t rc = c.residue();
        if (rc) r.coeffs[e] = rc;
    }
    return r;
}

LaurentPoly LaurentPoly::pruned() const {
    LaurentPoly r(ctx_);
    for (auto& [e, v] : c_)
        if (v.valuation()) r.set(e, v);
    return r;
}

LaurentPoly LaurentPoly::embed(const Ctx& target) const {
    LaurentPoly r(target);
    for (auto& [e, v] : c_) r.set(e, v.embed(target));
    return r;
}

std::string LaurentPoly::str() const {
    if (c_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto& [e, v] : c_) {
        if (!first) os << "  +  ";
        os << "[" << v.str() << "]";
        if (e != 0) os << " x^" << e;
        first = false;
    }
    return os.str();
}

LaurentPoly derivative(const LaurentPoly& f) {
    LaurentPoly r(f.context());
    for (auto& [e, v] : f.coeffs()) {
        if (e == 0) continue;
        r.set(e - 1, v * f.context()->from_integer(e));
    }
    return r;
}

FieldElement resultant(const LaurentPoly& f, const LaurentPoly& g) {
    if (!f.is_polynomial() || !g.is_polynomial())
        throw HyredError("resultant: polynomial inputs required");
    const Ctx& K = f.context();
    int dn = f.empty() ? 0 : f.max_exp();
    int dm = g.empty() ? 0 : g.max_exp();
    if (f.empty() || g.empty()) return K->zero();
    int n = dn + dm;
    if (n == 0) return K->one();
    // Sylvester matrix, fraction-free-ish Gaussian elimination with valuation
    // pivoting; exact at working precision
    std::vector<std::vector<FieldElement>> M((size_t)n, std::vector<FieldElement>((size_t)n, K->zero()));
    for (int r = 0; r < dm; ++r)
        for (int k = 0; k <= dn; ++k) M[(size_t)r][(size_t)(r + k)] = f.get(dn - k);
    for (int r = 0; r < dn; ++r)
        for (int k = 0; k <= dm; ++k) M[(size_t)(dm + r)][(size_t)(r + k)] = g.get(dm - k);
    FieldElement det = K->one();
    int sign = 1;
    for (int col = 0; col < n; ++col) {
        int best = -1;
        std::optional<Rat> bv;
        for (int r = col; r < n; ++r) {
            auto v = M[(size_t)r][(size_t)col].valuation();
            if (v && (!bv || *v < *bv)) { bv = v; best = r; }
        }
        if (best < 0) return K->zero();
        if (best != col) { std::swap(M[(size_t)best], M[(size_t)col]); sign = -sign; }
        FieldElement piv = M[(size_t)col][(size_t)col];
        det = det * piv;
        FieldElement pinv = piv.inv();
        for (int r = col + 1; r < n; ++r) {
            FieldElement factor = M[(size_t)r][(size_t)col] * pinv;
            if (factor.is_exact_zero()) continue;
            for (int cc = col; cc < n; ++cc)
                M[(size_t)r][(size_t)cc] = M[(size_t)r][(size_t)cc] - factor * M[(size_t)col][(size_t)cc];
        }
    }
    if (sign < 0) det = -det;
    return det;
}

FieldElement poly_discriminant(const LaurentPoly& f) {
    const Ctx& K = f.context();
    int d = f.max_exp();
    FieldElement lead = f.get(d);
    FieldElement res = resultant(f, derivative(f));
    // disc = (-1)^{d(d-1)/2} res(f, f') / lead
    FieldElement disc = res * lead.inv();
    if ((((long long)d * (d - 1)) / 2) % 2 != 0) disc = -disc;
    return disc;
}

} // namespace hyred

#include "hyred/gf2m.hpp"

#include <stdexcept>
#include <sstream>
#include <functional>
#include <algorithm>

namespace hyred {

namespace {

// carry-less multiply of bit-polynomials (degrees < 32)
uint64_t clmul(uint64_t a, uint64_t b) {
    uint64_t r = 0;
    while (b) {
        if (b & 1) r ^= a;
        a <<= 1;
        b >>= 1;
    }
    return r;
}

uint64_t bitpoly_mod(uint64_t a, uint64_t mod, int m) {
    // reduce a modulo mod, deg(mod) = m
    for (int i = 63 - m; i >= 0; --i)
        if (a & (1ull << (i + m))) a ^= mod << i;
    return a;
}

uint64_t bitpoly_gcd(uint64_t a, uint64_t b) {
    while (b) {
        // a mod b
        int db = 63 - __builtin_clzll(b);
        while (a && (63 - __builtin_clzll(a)) >= db) {
            int da = 63 - __builtin_clzll(a);
            a ^= b << (da - db);
        }
        uint64_t t = a; a = b; b = t;
    }
    return a;
}

} // namespace

bool GF2m::is_irreducible(uint64_t poly, int m) {
    if (m == 1) return true;
    // x^(2^m) == x mod poly, and gcd(x^(2^k) - x, poly) == 1 for k <= m/2
    uint64_t x = 2; // the polynomial x
    uint64_t r = x;
    for (int k = 1; k <= m; ++k) {
        r = bitpoly_mod(clmul(r, r), poly, m);
        if (k <= m / 2) {
            if (bitpoly_gcd(r ^ x, poly) != 1) return false;
        }
    }
    return r == x;
}

uint64_t GF2m::first_irreducible(int m) {
    if (m < 1 || m > 30) throw std::domain_error("GF2m: degree out of range");
    if (m == 1) return 0b10; // the polynomial t (residue field F_2, t ~ 0)
    uint64_t top = 1ull << m;
    for (uint64_t low = 1; low < top; ++low) {
        uint64_t cand = top | low;
        if (!(cand & 1)) continue; // must have nonzero constant term
        if (is_irreducible(cand, m)) return cand;
    }
    throw std::logic_error("GF2m: no irreducible found");
}

GF2m::GF2m(int m) : m_(m) {
    if (m < 1 || m > 24) throw std::domain_error("GF2m: m out of range [1,24]");
    mod_ = (m == 1) ? 0b11 : first_irreducible(m); // m=1: t+1, so t ~ 1... use t+1? Keep t^1+1
    // For m == 1 use t + 1 so that the quotient is F_2 with t -> 1; arithmetic
    // below only ever sees masks < 2 in that case.
    build_as_solver();
}

uint32_t GF2m::mul(uint32_t a, uint32_t b) const {
    if (m_ == 1) return a & b & 1;
    return (uint32_t)bitpoly_mod(clmul(a, b), mod_, m_);
}

uint32_t GF2m::pow(uint32_t a, uint64_t e) const {
    uint32_t r = 1, base = a;
    while (e) {
        if (e & 1) r = mul(r, base);
        base = mul(base, base);
        e >>= 1;
    }
    return r;
}

uint32_t GF2m::inv(uint32_t a) const {
    if (a == 0) throw std::domain_error("GF2m: inverse of zero");
    // a^(2^m - 2)
    return pow(a, (1ull << m_) - 2);
}

uint32_t GF2m::sqrt(uint32_t a) const {
    if (m_ == 1) return a;
    return pow(a, 1ull << (m_ - 1));
}

int GF2m::trace(uint32_t a) const {
    uint32_t t = a, f = a;
    for (int i = 1; i < m_; ++i) {
        f = mul(f, f);
        t ^= f;
    }
    // t now lies in the prime field
    return (int)(t & 1);
}

void GF2m::build_as_solver() {
    // columns of L(t) = t^2 + t over the F_2-basis
    as_cols_.resize(m_);
    for (int j = 0; j < m_; ++j) {
        uint32_t e = 1u << j;
        as_cols_[j] = sqr(e) ^ e;
    }
    // row reduce the m x m matrix whose columns are as_cols_, remembering the
    // combination of unit vectors producing each pivot row image.
    as_rowspace_.assign(m_, 0);
    as_solution_.assign(m_, 0);
    as_pivot_.assign(m_, -1);
    std::vector<uint32_t> img(as_cols_), pre(m_);
    for (int j = 0; j < m_; ++j) pre[j] = 1u << j;
    int rank = 0;
    for (int bit = 0; bit < m_ && rank < m_; ++bit) {
        int sel = -1;
        for (int j = rank; j < m_; ++j)
            if (img[j] & (1u << bit)) { sel = j; break; }
        if (sel < 0) continue;
        std::swap(img[rank], img[sel]);
        std::swap(pre[rank], pre[sel]);
        for (int j = 0; j < m_; ++j) {
            if (j != rank && (img[j] & (1u << bit))) {
                img[j] ^= img[rank];
                pre[j] ^= pre[rank];
            }
        }
        as_rowspace_[rank] = img[rank];
        as_solution_[rank] = pre[rank];
        as_pivot_[rank] = bit;
        ++rank;
    }
    as_rowspace_.resize(rank);
    as_solution_.resize(rank);
    as_pivot_.resize(rank);
}

std::optional<uint32_t> GF2m::solve_artin_schreier(uint32_t c) const {
    uint32_t t = 0, r = c;
    for (size_t k = 0; k < as_rowspace_.size(); ++k) {
        if (r & (1u << as_pivot_[k])) {
            r ^= as_rowspace_[k];
            t ^= as_solution_[k];
        }
    }
    if (r != 0) return std::nullopt; // trace obstruction
    return t;
}

// ---------------------------------------------------------------------------
// polynomial layer

GFPoly GFPolyOps::add(const GFPoly& a, const GFPoly& b) const {
    GFPoly r(std::max(a.size(), b.size()), 0);
    for (size_t i = 0; i < a.size(); ++i) r[i] ^= a[i];
    for (size_t i = 0; i < b.size(); ++i) r[i] ^= b[i];
    trim(r);
    return r;
}

GFPoly GFPolyOps::mul(const GFPoly& a, const GFPoly& b) const {
    if (a.empty() || b.empty()) return {};
    GFPoly r(a.size() + b.size() - 1, 0);
    for (size_t i = 0; i < a.size(); ++i) {
        if (!a[i]) continue;
        for (size_t j = 0; j < b.size(); ++j)
            if (b[j]) r[i + j] ^= F->mul(a[i], b[j]);
    }
    trim(r);
    return r;
}

GFPoly GFPolyOps::scale(const GFPoly& a, uint32_t c) const {
    if (c == 0) return {};
    GFPoly r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = F->mul(a[i], c);
    trim(r);
    return r;
}

GFPoly GFPolyOps::divmod(const GFPoly& a, const GFPoly& b, GFPoly& rem) const {
    if (b.empty()) throw std::domain_error("GFPoly: division by zero");
    rem = a;
    trim(rem);
    if (rem.size() < b.size()) return {};
    GFPoly q(rem.size() - b.size() + 1, 0);
    uint32_t linv = F->inv(b.back());
    for (int i = (int)rem.size() - (int)b.size(); i >= 0; --i) {
        if (rem.size() < b.size() + i || rem[b.size() - 1 + i] == 0) continue;
        uint32_t c = F->mul(rem[b.size() - 1 + i], linv);
        q[i] = c;
        for (size_t j = 0; j < b.size(); ++j)
            rem[i + j] ^= F->mul(b[j], c);
        trim(rem);
    }
    return q;
}

GFPoly GFPolyOps::mod(const GFPoly& a, const GFPoly& b) const {
    GFPoly r;
    divmod(a, b, r);
    return r;
}

GFPoly GFPolyOps::gcd(GFPoly a, GFPoly b) const {
    trim(a); trim(b);
    while (!b.empty()) {
        GFPoly r = mod(a, b);
        a = std::move(b);
        b = std::move(r);
    }
    return a.empty() ? a : monic(a);
}

GFPoly GFPolyOps::monic(const GFPoly& a) const {
    if (a.empty() || a.back() == 1) return a;
    return scale(a, F->inv(a.back()));
}

GFPoly GFPolyOps::derivative(const GFPoly& a) const {
    if (a.size() <= 1) return {};
    GFPoly r(a.size() - 1, 0);
    for (size_t i = 1; i < a.size(); ++i)
        if (i & 1) r[i - 1] = a[i]; // char 2: even i kill the term
    trim(r);
    return r;
}

GFPoly GFPolyOps::sqr_mod(const GFPoly& a, const GFPoly& f) const {
    if (a.empty()) return {};
    GFPoly s(2 * a.size() - 1, 0);
    for (size_t i = 0; i < a.size(); ++i) s[2 * i] = F->sqr(a[i]);
    trim(s);
    return mod(s, f);
}

GFPoly GFPolyOps::pow_mod(const GFPoly& a, uint64_t e, const GFPoly& f) const {
    GFPoly r{1}, base = mod(a, f);
    while (e) {
        if (e & 1) r = mod(mul(r, base), f);
        base = mod(mul(base, base), f);
        e >>= 1;
    }
    return r;
}

uint32_t GFPolyOps::eval(const GFPoly& a, uint32_t x) const {
    uint32_t r = 0;
    for (size_t i = a.size(); i-- > 0;) r = F->mul(r, x) ^ a[i];
    return r;
}

std::vector<std::pair<GFPoly, int>> GFPolyOps::squarefree(const GFPoly& fin) const {
    std::vector<std::pair<GFPoly, int>> out;
    GFPoly f = monic(fin);
    // recursive char-2 squarefree decomposition
    std::function<void(const GFPoly&, int)> rec = [&](const GFPoly& g, int mult) {
        if (deg(g) <= 0) return;
        GFPoly dg = derivative(g);
        if (is_zero(dg)) {
            // g = h(x^2) = (sqrt h)^2
            GFPoly h((deg(g)) / 2 + 1, 0);
            for (size_t i = 0; i < g.size(); i += 2) h[i / 2] = F->sqrt(g[i]);
            trim(h);
            rec(h, 2 * mult);
            return;
        }
        GFPoly c = gcd(g, dg);       // contains higher-multiplicity parts
        GFPoly w, rem;
        w = divmod(g, c, rem);       // squarefree-ish part (odd multiplicities)
        // peel factors of w out of c to get exact multiplicities
        int i = 1;
        while (deg(w) > 0) {
            GFPoly y = gcd(w, c);
            GFPoly fi = divmod(w, y, rem);
            if (deg(fi) > 0) out.emplace_back(monic(fi), i * mult);
            w = y;
            if (!is_zero(y) && deg(c) >= deg(y)) c = divmod(c, y, rem);
            ++i;
        }
        if (deg(c) > 0) rec(c, mult); // leftover: perfect square content
    };
    rec(f, 1);
    return out;
}

std::vector<GFPoly> GFPolyOps::factor_squarefree(const GFPoly& fin) const {
    std::vector<GFPoly> out;
    GFPoly f = monic(fin);
    if (deg(f) <= 0) return out;
    // distinct-degree
    std::vector<std::pair<GFPoly, int>> dd;
    GFPoly x{0, 1};
    GFPoly h = x;
    GFPoly rest = f;
    int d = 0;
    while (deg(rest) > 0) {
        ++d;
        if (2 * d > deg(rest)) {
            dd.emplace_back(rest, deg(rest));
            break;
        }
        for (int i = 0; i < F->degree(); ++i) h = sqr_mod(h, f); // h = x^(2^(m d)) mod f
        GFPoly g = gcd(add(h, x), rest);
        if (deg(g) > 0) {
            dd.emplace_back(g, d);
            GFPoly rem;
            rest = divmod(rest, g, rem);
        }
    }
    // equal-degree (char-2 trace splitting), deterministic LCG
    uint64_t seed = 0x9e3779b97f4a7c15ull;
    for (auto& c : f) seed = seed * 6364136223846793005ull + c + 1;
    std::function<void(const GFPoly&, int)> split = [&](const GFPoly& g, int d) {
        if (deg(g) == d) { out.push_back(monic(g)); return; }
        while (true) {
            // random polynomial of degree < deg(g)
            GFPoly u(deg(g), 0);
            for (auto& c : u) {
                seed = seed * 6364136223846793005ull + 1442695040888963407ull;
                c = (uint32_t)((seed >> 33) & ((1u << F->degree()) - 1));
            }
            trim(u);
            if (u.empty()) continue;
            // trace map sum_{i<m*d} u^(2^i) mod g
            GFPoly t = mod(u, g), p = t;
            for (int i = 1; i < F->degree() * d; ++i) {
                p = sqr_mod(p, g);
                t = add(t, p);
            }
            GFPoly w = gcd(t, g);
            if (deg(w) > 0 && deg(w) < deg(g)) {
                GFPoly rem, other = divmod(g, w, rem);
                split(w, d);
                split(other, d);
                return;
            }
        }
    };
    for (auto& [g, d] : dd) split(g, d);
    return out;
}

std::vector<std::pair<GFPoly, int>> GFPolyOps::factor(const GFPoly& f, uint32_t& lead) const {
    std::vector<std::pair<GFPoly, int>> out;
    if (is_zero(f)) throw std::domain_error("GFPoly: factor of zero");
    lead = f.back();
    // strip x^k
    GFPoly g = f;
    int k = 0;
    while (!g.empty() && g[0] == 0) { g.erase(g.begin()); ++k; }
    if (k > 0) out.emplace_back(GFPoly{0, 1}, k);
    for (auto& [sf, mult] : squarefree(g))
        for (auto& irr : factor_squarefree(sf))
            out.emplace_back(irr, mult);
    return out;
}

std::vector<std::pair<uint32_t, int>> GFPolyOps::roots(const GFPoly& f) const {
    std::vector<std::pair<uint32_t, int>> out;
    uint32_t lead;
    for (auto& [irr, mult] : factor(f, lead))
        if (deg(irr) == 1) out.emplace_back(irr[0], mult); // x + c -> root c (char 2)
    return out;
}

bool GFPolyOps::irreducible(const GFPoly& f) const {
    if (deg(f) <= 0) return false;
    if (deg(f) == 1) return true;
    uint32_t lead;
    auto fs = factor(f, lead);
    return fs.size() == 1 && fs[0].second == 1;
}

std::string gf_to_string(const GF2m& F, uint32_t a) {
    if (a == 0) return "0";
    std::ostringstream os;
    bool first = true;
    for (int j = F.degree() - 1; j >= 0; --j) {
        if (a & (1u << j)) {
            if (!first) os << "+";
            if (j == 0) os << "1";
            else if (j == 1) os << "t";
            else os << "t^" << j;
            first = false;
        }
    }
    return os.str();
}

} // namespace hyred

#include "hyred/field.hpp"

#include <atomic>
#include <map>
#include <mutex>
#include <sstream>
#include <algorithm>

namespace hyred {

namespace {
std::atomic<uint64_t> g_ctx_counter{1};

int ctz64(uint64_t x) { return x ? __builtin_ctzll(x) : 64; }
} // namespace

FieldContext::FieldContext(int N, int m, Rat prec, int budget)
    : N_(N), m_(m), budget_(budget), prec_(prec), gf_(m) {
    long long w = prec.ceil() + 12;
    if (w > 62) w = 62;
    if (w < 8) w = 8;
    W_ = (int)w;
    mask_ = (W_ >= 64) ? ~0ull : ((1ull << W_) - 1);
    id_ = g_ctx_counter.fetch_add(1);
}

Ctx FieldContext::make(int N, int m, Rat precision, int ext_budget) {
    if (N < 1 || m < 1) throw HyredError("FieldContext: invalid N or m");
    if ((long long)N * m > ext_budget)
        throw ExtensionBudgetExceeded("FieldContext::make", N, m, ext_budget);
    return std::shared_ptr<const FieldContext>(new FieldContext(N, m, precision, ext_budget));
}

Ctx FieldContext::enlarged(int newN, int newm, const char* op) const {
    if (newN % N_ != 0 || newm % m_ != 0)
        throw HyredError("FieldContext::enlarged: non-multiple growth");
    if ((long long)newN * newm > budget_)
        throw ExtensionBudgetExceeded(op, newN, newm, budget_);
    return make(newN, newm, prec_, budget_);
}

FieldElement FieldContext::zero() const {
    return FieldElement(shared_from_this(), 0,
                        std::vector<uint64_t>((size_t)N_ * m_, 0),
                        Rat((long long)W_));
}

FieldElement FieldContext::one() const { return from_integer(1); }

FieldElement FieldContext::from_integer(long long v) const {
    std::vector<uint64_t> c((size_t)N_ * m_, 0);
    c[0] = (uint64_t)v & mask_;
    return FieldElement(shared_from_this(), 0, std::move(c), Rat((long long)W_));
}

FieldElement FieldContext::from_rational(long long num, long long den) const {
    if (den == 0) throw HyredError("from_rational: zero denominator");
    if (den < 0) { num = -num; den = -den; }
    int k = 0;
    while (den % 2 == 0) { den /= 2; ++k; }
    FieldElement x = from_integer(num);
    if (den != 1) x = x * from_integer(den).inv();
    if (k != 0) x = x.scale_two_pow(Rat(-k));
    return x;
}

FieldElement FieldContext::two_pow(Rat lambda) const {
    Rat e = lambda * Rat(N_);
    if (!e.is_integer())
        throw DenominatorNotSupported("2^(" + lambda.str() + ") with N=" + std::to_string(N_));
    std::vector<uint64_t> c((size_t)N_ * m_, 0);
    c[0] = 1;
    return FieldElement(shared_from_this(), (int)e.n, std::move(c),
                        lambda + Rat((long long)W_));
}

FieldElement FieldContext::pi() const { return two_pow(Rat(1, N_)); }

FieldElement FieldContext::lift(uint32_t residue) const {
    std::vector<uint64_t> c((size_t)N_ * m_, 0);
    for (int j = 0; j < m_; ++j)
        if (residue & (1u << j)) c[(size_t)j * N_] = 1;
    return FieldElement(shared_from_this(), 0, std::move(c), Rat((long long)W_));
}

// ---------------------------------------------------------------------------

FieldElement::FieldElement(Ctx ctx, int off, std::vector<uint64_t> coeffs, Rat valid)
    : ctx_(std::move(ctx)), off_(off), c_(std::move(coeffs)), valid_(valid) {
    normalize();
}

void FieldElement::normalize() {
    const auto& K = *ctx_;
    for (auto& d : c_) d &= K.coeff_mask();
    // clamp valid to the representation window
    Rat cap = Rat(off_, K.N()) + Rat(K.bits());
    if (valid_ > cap) valid_ = cap;
    bool all_zero = true;
    for (auto d : c_)
        if (d) { all_zero = false; break; }
    if (all_zero) { off_ = 0; return; }
    // factor out 2 while every digit is even (keeps the window deep)
    while (true) {
        bool all_even = true;
        for (auto d : c_)
            if (d & 1) { all_even = false; break; }
        if (!all_even) break;
        bool any = false;
        for (auto& d : c_) { d >>= 1; if (d) any = true; }
        off_ += K.N();
        if (!any) { off_ = 0; break; }
    }
}

bool FieldElement::is_exact_zero() const {
    for (auto d : c_)
        if (d) return false;
    return true;
}

std::optional<Rat> FieldElement::valuation() const {
    const auto& K = *ctx_;
    std::optional<Rat> best;
    for (int j = 0; j < K.m(); ++j) {
        for (int i = 0; i < K.N(); ++i) {
            uint64_t d = c_[(size_t)j * K.N() + i];
            if (!d) continue;
            Rat v = Rat(off_ + i, K.N()) + Rat(ctz64(d));
            if (!best || v < *best) best = v;
        }
    }
    if (best && *best < valid_) return best;
    return std::nullopt;
}

void FieldElement::align(FieldElement& a, FieldElement& b) {
    if (a.off_ == b.off_) return;
    if (a.off_ > b.off_) { align(b, a); return; }
    // shift b down to a's offset: multiply digits by pi^(b.off - a.off)
    const auto& K = *a.ctx_;
    int delta = b.off_ - a.off_;
    int q = delta / K.N(), r = delta % K.N();
    std::vector<uint64_t> nc((size_t)K.N() * K.m(), 0);
    for (int j = 0; j < K.m(); ++j) {
        for (int i = 0; i < K.N(); ++i) {
            uint64_t d = b.c_[(size_t)j * K.N() + i];
            if (!d) continue;
            int ii = i + r;
            uint64_t mult = 1;
            if (ii >= K.N()) { ii -= K.N(); mult = 2; }
            nc[(size_t)j * K.N() + ii] += d * mult;
        }
    }
    if (q < 62) {
        for (auto& d : nc) d = (q >= K.bits()) ? 0 : (d << q);
    }
    b.c_ = std::move(nc);
    b.off_ = a.off_;
    for (auto& d : b.c_) d &= K.coeff_mask();
}

FieldElement FieldElement::operator+(const FieldElement& o) const {
    if (ctx_->id() != o.ctx_->id()) throw HyredError("FieldElement: context mismatch");
    FieldElement a = *this, b = o;
    align(a, b);
    for (size_t k = 0; k < a.c_.size(); ++k) a.c_[k] += b.c_[k];
    a.valid_ = min(valid_, o.valid_);
    a.normalize();
    return a;
}

FieldElement FieldElement::operator-() const {
    FieldElement r = *this;
    for (auto& d : r.c_) d = (~d + 1) & ctx_->coeff_mask();
    return r;
}

FieldElement FieldElement::operator-(const FieldElement& o) const { return *this + (-o); }

FieldElement FieldElement::operator*(const FieldElement& o) const {
    if (ctx_->id() != o.ctx_->id()) throw HyredError("FieldElement: context mismatch");
    const auto& K = *ctx_;
    const int N = K.N(), m = K.m();
    // full convolution in T and pi
    std::vector<uint64_t> acc((size_t)(2 * m - 1) * (2 * N - 1), 0);
    auto at = [&](int j, int i) -> uint64_t& { return acc[(size_t)j * (2 * N - 1) + i]; };
    for (int j1 = 0; j1 < m; ++j1)
        for (int i1 = 0; i1 < N; ++i1) {
            uint64_t d1 = c_[(size_t)j1 * N + i1];
            if (!d1) continue;
            for (int j2 = 0; j2 < m; ++j2)
                for (int i2 = 0; i2 < N; ++i2) {
                    uint64_t d2 = o.c_[(size_t)j2 * N + i2];
                    if (!d2) continue;
                    at(j1 + j2, i1 + i2) += d1 * d2;
                }
        }
    // pi^N = 2
    for (int j = 0; j <= 2 * m - 2; ++j)
        for (int i = 2 * N - 2; i >= N; --i) {
            uint64_t d = at(j, i);
            if (!d) continue;
            at(j, i) = 0;
            at(j, i - N) += 2 * d;
        }
    // T^m = -(low part of the modulus)
    uint64_t mod = K.gf().modulus();
    for (int j = 2 * m - 2; j >= m; --j) {
        for (int i = 0; i < N; ++i) {
            uint64_t d = at(j, i);
            if (!d) continue;
            at(j, i) = 0;
            for (int b = 0; b < m; ++b)
                if (mod & (1ull << b)) at(j - m + b, i) -= d;
        }
    }
    std::vector<uint64_t> nc((size_t)m * N, 0);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < N; ++i) nc[(size_t)j * N + i] = at(j, i) & K.coeff_mask();
    // precision: prec(xy) >= min(v(x)+prec(y), v(y)+prec(x))
    auto va = valuation(), vb = o.valuation();
    Rat la = va ? *va : valid_;
    Rat lb = vb ? *vb : o.valid_;
    Rat nv = min(la + o.valid_, lb + valid_);
    return FieldElement(ctx_, off_ + o.off_, std::move(nc), nv);
}

FieldElement FieldElement::clamped(Rat v) const {
    FieldElement r = *this;
    if (v < r.valid_) r.valid_ = v;
    return r;
}

FieldElement FieldElement::scale_two_pow(Rat lambda) const {
    Rat e = lambda * Rat(ctx_->N());
    if (!e.is_integer())
        throw DenominatorNotSupported("scale 2^(" + lambda.str() + ") with N=" +
                                      std::to_string(ctx_->N()));
    FieldElement r = *this;
    r.off_ += (int)e.n;
    r.valid_ = valid_ + lambda;
    return r;
}

uint32_t FieldElement::residue() const {
    const auto& K = *ctx_;
    auto v = valuation();
    if (v && *v < Rat(0)) throw NegativeValuation(str());
    if (!v) return 0;
    if (*v > Rat(0)) return 0;
    uint32_t r = 0;
    for (int j = 0; j < K.m(); ++j)
        for (int i = 0; i < K.N(); ++i) {
            long long need = -(long long)off_ - i; // need bit position need/N
            if (need < 0 || need % K.N() != 0) continue;
            long long k = need / K.N();
            if (k >= K.bits()) continue;
            r ^= (uint32_t)(((c_[(size_t)j * K.N() + i] >> k) & 1) << j);
        }
    return r;
}

FieldElement FieldElement::inv() const {
    auto v = valuation();
    if (!v) throw PrecisionExhausted("inverse of element ~ 0");
    const auto& K = *ctx_;
    FieldElement u = scale_two_pow(-*v);
    uint32_t r0 = u.residue();
    if (r0 == 0) throw PrecisionExhausted("inverse: unit part has zero residue");
    FieldElement w = K.lift(K.gf().inv(r0));
    FieldElement two = K.from_integer(2);
    int iters = 0;
    while (true) {
        FieldElement e = K.one() - u * w;
        auto ve = e.valuation();
        if (!ve) break;
        w = w * (two - u * w);
        if (++iters > 80) throw PrecisionExhausted("inverse: no convergence");
    }
    return w.scale_two_pow(-*v);
}

Cmp FieldElement::compare(const FieldElement& o) const {
    FieldElement d = *this - o;
    if (d.is_exact_zero()) return Cmp::equal_exact;
    if (d.valuation()) return Cmp::distinct;
    return Cmp::indistinguishable;
}

FieldElement FieldElement::sqrt() const {
    const auto& K = *ctx_;
    auto vopt = valuation();
    if (!vopt) throw PrecisionExhausted("sqrt of element ~ 0");
    Rat v = *vopt;
    long long e2 = (v * Rat(K.N())).n; // vN integral by representation
    if (e2 % 2 != 0) throw ExtensionRequired(2 * K.N(), K.m(), "sqrt (odd valuation)");
    FieldElement u = scale_two_pow(-v);
    FieldElement y = K.lift(K.gf().sqrt(u.residue()));
    Rat target = min(Rat(K.bits() - 2), K.precision() + Rat(2));
    int iters = 0;
    while (true) {
        FieldElement r = u - y * y;
        auto vr = r.valuation();
        if (!vr || *vr >= target) break;
        Rat e = *vr;
        if (e > Rat(2)) {
            y = y + r * (K.from_integer(2) * y).inv();
        } else if (e == Rat(2)) {
            uint32_t yr = y.residue();
            uint32_t c = (r.scale_two_pow(Rat(-2)) * (y * y).inv()).residue();
            auto t = K.gf().solve_artin_schreier(c);
            if (!t) throw ExtensionRequired(K.N(), 2 * K.m(), "sqrt (Artin-Schreier)");
            y = y + K.from_integer(2) * K.lift(K.gf().mul(*t, yr));
        } else {
            Rat half = e / Rat(2);
            if (!(half * Rat(K.N())).is_integer())
                throw ExtensionRequired(2 * K.N(), K.m(), "sqrt (digit parity)");
            uint32_t d0 = K.gf().sqrt(r.scale_two_pow(-e).residue());
            y = y + K.two_pow(half) * K.lift(d0);
        }
        if (++iters > 6 * K.bits() + 40) throw PrecisionExhausted("sqrt: no convergence");
    }
    return y.clamped(target).scale_two_pow(v / Rat(2));
}

// ---------------------------------------------------------------------------
// embeddings

namespace {
std::mutex g_embed_mutex;
std::map<std::pair<uint64_t, uint64_t>, std::vector<FieldElement>> g_embed_cache;

std::vector<FieldElement> timg_powers(const Ctx& from, const Ctx& to) {
    std::lock_guard<std::mutex> lock(g_embed_mutex);
    auto key = std::make_pair(from->id(), to->id());
    auto it = g_embed_cache.find(key);
    if (it != g_embed_cache.end()) return it->second;

    int mo = from->m();
    std::vector<FieldElement> pows;
    if (mo == to->m()) {
        // same residue field presentation: T -> T
        FieldElement t = to->lift(mo > 1 ? 2u : 1u);
        if (mo == 1) t = to->one();
        pows.resize(mo);
        pows[0] = to->one();
        for (int j = 1; j < mo; ++j) pows[j] = pows[j - 1] * t;
    } else {
        // root of the old modulus in the new residue field, Hensel-lifted
        uint64_t phi = from->gf().modulus();
        GFPolyOps ops(to->gf());
        GFPoly p(mo + 1, 0);
        for (int b = 0; b <= mo; ++b)
            if (phi & (1ull << b)) p[b] = 1;
        auto rts = ops.roots(p);
        if (rts.empty()) throw HyredError("embed: modulus has no root in target");
        uint32_t r = rts[0].first;
        for (auto& [rt, mult] : rts) r = std::min(r, rt);
        FieldElement y = to->lift(r);
        // Newton for the integer-coefficient modulus lift(phi)
        auto eval_phi = [&](const FieldElement& x, bool deriv) {
            FieldElement s = to->zero();
            for (int b = mo; b >= 0; --b) {
                if (!(phi & (1ull << b))) continue;
                FieldElement term = to->one();
                int e = deriv ? b - 1 : b;
                if (deriv && b == 0) continue;
                for (int k = 0; k < e; ++k) term = term * x;
                if (deriv) term = term * to->from_integer(b);
                s = s + term;
            }
            return s;
        };
        int guard = 0;
        while (true) {
            FieldElement fv = eval_phi(y, false);
            if (!fv.valuation()) break;
            y = y - fv * eval_phi(y, true).inv();
            if (++guard > 64) throw PrecisionExhausted("embed: root lift");
        }
        pows.resize(mo);
        pows[0] = to->one();
        for (int j = 1; j < mo; ++j) pows[j] = pows[j - 1] * y;
    }
    g_embed_cache[key] = pows;
    return pows;
}
} // namespace

FieldElement FieldElement::embed(const Ctx& target) const {
    if (ctx_->id() == target->id()) return *this;
    if (target->N() % ctx_->N() != 0 || target->m() % ctx_->m() != 0)
        throw HyredError("embed: incompatible contexts");
    auto pows = timg_powers(ctx_, target);
    long long k = target->N() / ctx_->N();
    const auto& K = *ctx_;
    FieldElement out = target->zero();
    for (int j = 0; j < K.m(); ++j)
        for (int i = 0; i < K.N(); ++i) {
            uint64_t d = c_[(size_t)j * K.N() + i];
            if (!d) continue;
            FieldElement term = pows[j] * target->from_integer((long long)d);
            term = term.scale_two_pow(Rat((off_ + i) * k, target->N()));
            out = out + term;
        }
    if (is_exact_zero()) out = target->zero();
    Rat nv = min(valid_, target->precision() + Rat(6));
    return FieldElement(out.ctx_, out.off_, out.c_, nv);
}

std::string FieldElement::str() const {
    const auto& K = *ctx_;
    std::ostringstream os;
    bool first = true;
    for (int j = 0; j < K.m(); ++j)
        for (int i = 0; i < K.N(); ++i) {
            uint64_t d = c_[(size_t)j * K.N() + i];
            if (!d) continue;
            if (!first) os << " + ";
            os << d;
            if (j) os << "*T^" << j;
            if (i + off_ != 0) os << "*pi^" << (i + off_);
            first = false;
        }
    if (first) os << "0";
    if (off_ != 0 && first) os << " (off " << off_ << ")";
    os << " [valid " << valid_.str() << "]";
    return os.str();
}

FieldElement sqrt_auto(FieldElement x, Ctx& io_ctx, const char* where) {
    int guard = 0;
    while (true) {
        try {
            return x.sqrt();
        } catch (const ExtensionRequired& er) {
            int wn = er.want_N, wm = er.want_m;
            if ((long long)wn * wm > io_ctx->budget())
                throw NoTowerElement(std::string(where) +
                                     ": square root needs extensions beyond the budget "
                                     "(possibly not in the tower family at all)");
            io_ctx = io_ctx->enlarged(wn, wm, where);
            x = x.embed(io_ctx);
            if (++guard > 16)
                throw NoTowerElement(std::string(where) + ": square root approximation creeps");
        }
    }
}

std::ostream& operator<<(std::ostream& os, const Rat& r) { return os << r.str(); }

} // namespace hyred

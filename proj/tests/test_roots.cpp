#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hyred/polyfact.hpp"

#include <random>
#include <algorithm>

using namespace hyred;

static Ctx Q2() { return FieldContext::make(1, 1, Rat(20)); }

TEST_CASE("find_roots on split quadratics") {
    auto K = Q2();
    // x^2 - 4 -> {2, -2}
    auto p = LaurentPoly::from_ints(K, {{2, 1}, {0, -4}});
    auto out = find_roots(K, p);
    REQUIRE(out.roots.size() == 2);
    CHECK(out.unresolved.empty());
    for (auto& r : out.roots) {
        CHECK(r.multiplicity == 1);
        CHECK(fp_eval(fp_from_laurent(p.embed(out.ctx)), r.root).is_zero_at_precision());
        CHECK(r.root.valuation().value() == Rat(1));
    }
}

TEST_CASE("find_roots ramifies for x^2 - 2") {
    auto K = Q2();
    auto p = LaurentPoly::from_ints(K, {{2, 1}, {0, -2}});
    auto out = find_roots(K, p);
    REQUIRE(out.roots.size() == 2);
    CHECK(out.ctx->N() == 2);
    for (auto& r : out.roots) {
        CHECK(r.root.valuation().value() == Rat(1, 2));
        CHECK(fp_eval(fp_from_laurent(p.embed(out.ctx)), r.root).is_zero_at_precision());
    }
}

// independent oracle: lower hull by brute force over all point pairs
static std::vector<std::pair<int, Rat>> hull_oracle(const std::vector<std::pair<int, Rat>>& pts) {
    std::vector<std::pair<int, Rat>> hull;
    for (auto& p : pts) {
        bool on_hull = true;
        for (auto& a : pts)
            for (auto& b : pts) {
                if (a.first >= p.first || b.first <= p.first) continue;
                // p strictly above segment a-b?
                Rat lhs = (p.second - a.second) * Rat(b.first - a.first);
                Rat rhs = (b.second - a.second) * Rat(p.first - a.first);
                if (lhs > rhs) { on_hull = false; }
            }
        if (on_hull) hull.push_back(p);
    }
    std::sort(hull.begin(), hull.end());
    return hull;
}

TEST_CASE("newton polygon of 3x^4 - 8x^3 + 12x^2 - 4 and its root valuations") {
    auto K = Q2();
    auto p = LaurentPoly::from_ints(K, {{4, 3}, {3, -8}, {2, 12}, {0, -4}});
    auto np = p.newton_polygon();
    std::vector<std::pair<int, Rat>> pts = {{0, Rat(2)}, {2, Rat(2)}, {3, Rat(3)}, {4, Rat(0)}};
    auto oracle = hull_oracle(pts);
    // the vertex set of the computed polygon must be the oracle hull minus
    // interior collinear points; here the hull is {(0,2),(4,0)}
    REQUIRE(np.vertices.size() == 2);
    CHECK(np.vertices.front().first == oracle.front().first);
    CHECK(np.vertices.back().first == oracle.back().first);
    CHECK(np.slopes()[0] == Rat(-1, 2));
    // all roots must come back with valuation 1/2
    auto out = find_roots(K, p);
    int total = 0;
    for (auto& r : out.roots) {
        total += r.multiplicity;
        CHECK(r.root.valuation().value() == Rat(1, 2));
    }
    for (auto& u : out.unresolved) {
        total += u.degree;
        CHECK(u.root_valuation == Rat(1, 2));
    }
    CHECK(total == 4);
}

TEST_CASE("x^5 - x: three rational roots and the wild quadratic reported") {
    auto K = Q2();
    auto p = LaurentPoly::from_ints(K, {{5, 1}, {1, -1}});
    auto out = find_roots(K, p);
    int resolved = 0;
    for (auto& r : out.roots) resolved += r.multiplicity;
    int unresolved = 0;
    for (auto& u : out.unresolved) unresolved += u.degree;
    CHECK(resolved == 3);
    CHECK(unresolved == 2); // the orbit of the fourth roots of unity
    for (auto& r : out.roots)
        CHECK(fp_eval(fp_from_laurent(p.embed(out.ctx)), r.root).is_zero_at_precision());
}

TEST_CASE("random split products round-trip through find_roots") {
    std::mt19937_64 rng(424242);
    for (int it = 0; it < 25; ++it) {
        auto K = Q2();
        // product of linear factors with small integer roots (some repeated)
        std::vector<long long> roots;
        int n = 2 + (int)(rng() % 3);
        for (int i = 0; i < n; ++i) roots.push_back((long long)(rng() % 9) - 4);
        LaurentPoly p = LaurentPoly::from_ints(K, {{0, 1}});
        for (auto r : roots)
            p = p * LaurentPoly::from_ints(K, {{1, 1}, {0, -r}});
        auto out = find_roots(K, p);
        CHECK(out.unresolved.empty());
        int total = 0;
        std::sort(roots.begin(), roots.end());
        for (auto& rr : out.roots) {
            total += rr.multiplicity;
            bool matched = false;
            for (auto r : roots)
                if ((rr.root - out.ctx->from_integer(r)).is_zero_at_precision()) matched = true;
            CHECK(matched);
        }
        CHECK(total == n);
    }
}

TEST_CASE("multiplicities of exact repeated roots") {
    auto K = Q2();
    // (x-3)^2 (x-1)
    auto p = LaurentPoly::from_ints(K, {{1, 1}, {0, -3}});
    p = p * p * LaurentPoly::from_ints(K, {{1, 1}, {0, -1}});
    auto out = find_roots(K, p);
    int found3 = 0, found1 = 0;
    for (auto& r : out.roots) {
        if ((r.root - out.ctx->from_integer(3)).is_zero_at_precision()) found3 += r.multiplicity;
        if ((r.root - out.ctx->from_integer(1)).is_zero_at_precision()) found1 += r.multiplicity;
    }
    CHECK(found3 == 2);
    CHECK(found1 == 1);
}

TEST_CASE("hensel split of a Laurent polynomial into unit and negative parts") {
    auto K = Q2();
    // f = 3 + x + 2x^{-1} = (1+x)(1+2x^{-1}) has residue split x * (1+x)
    LaurentPoly f = LaurentPoly::from_ints(K, {{0, 3}, {1, 1}, {-1, 2}});
    FPoly ff = fp_from_laurent(f.shift_exponents(1));
    GFPoly A0{0, 1}; // x
    GFPoly B0{1, 1}; // 1 + x
    auto [A, B] = hensel_lift_pair(K, ff, A0, B0);
    // A = x + 2 (monic, root of valuation 1), B = 1 + x
    CHECK(fp_deg(A) == 1);
    CHECK((A[0] - K->from_integer(2)).is_zero_at_precision());
    auto prod = fp_mul(A, B);
    auto diff = fp_sub(prod, ff);
    CHECK(!fp_content_val(diff).has_value());
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hyred/model.hpp"

using namespace hyred;

static LaurentPoly legendre(const Ctx& K, const FieldElement& a) {
    return LaurentPoly::from_ints(K, {{1, 1}}) *
           LaurentPoly::from_ints(K, {{1, 1}, {0, -1}}) *
           (LaurentPoly::from_ints(K, {{1, 1}}) - LaurentPoly::monomial(K, 0, a));
}

TEST_CASE("marked tree of the legendre configurations") {
    // v(a) = alpha > 0: two components, one even double point of thickness
    // alpha, marked pairs {0, a} | {1, inf}
    for (long long alpha : {1, 3, 5}) {
        Ctx K = FieldContext::make(1, 1, Rat(24));
        auto f = legendre(K, K->two_pow(Rat(alpha)));
        ModelTree T = build_marked_tree(K, f, 1);
        int live = 0;
        for (auto& c : T.comps)
            if (c.parent != -2) ++live;
        CHECK(live == 2);
        REQUIRE(T.dps.size() == 1);
        CHECK(T.dps[0].thickness == Rat(alpha));
        CHECK(T.dps[0].even);
        CHECK(T.dps[0].marked_below == 2);
    }
    // v(a) = 0 with distinct residues: smooth (one component)
    {
        Ctx K = FieldContext::make(1, 2, Rat(24), 48);
        auto f = legendre(K, K->lift(2u));
        ModelTree T = build_marked_tree(K, f, 1);
        int live = 0;
        for (auto& c : T.comps)
            if (c.parent != -2) ++live;
        CHECK(live == 1);
        CHECK(T.dps.empty());
    }
}

TEST_CASE("six points in three clusters give the middle-component shape") {
    Ctx K = FieldContext::make(1, 2, Rat(24));
    FieldElement w = K->lift(2u);
    // clusters {0, 2^2}, {1, 1+2^3}, {w, w+2^4}
    LaurentPoly f(K);
    f.set(0, K->one());
    std::vector<FieldElement> roots{
        K->zero(), K->two_pow(Rat(2)), K->one(), K->one() + K->two_pow(Rat(3)),
        w,          w + K->two_pow(Rat(4))};
    LaurentPoly acc = LaurentPoly::from_ints(K, {{0, 1}});
    for (auto& r : roots)
        acc = acc * (LaurentPoly::from_ints(K, {{1, 1}}) - LaurentPoly::monomial(K, 0, r));
    ModelTree T = build_marked_tree(K, acc, 2);
    // middle component without marked points, three leaves with two each
    int live = 0, leaves = 0, middle = -1;
    for (auto& c : T.comps) {
        if (c.parent == -2) continue;
        ++live;
        if (c.marked.size() == 2) ++leaves;
        if (c.marked.empty()) middle = c.id;
    }
    CHECK(live == 4);
    CHECK(leaves == 3);
    REQUIRE(middle >= 0);
    REQUIRE(T.dps.size() == 3);
    std::vector<Rat> th;
    for (auto& dp : T.dps) {
        CHECK(dp.even);
        th.push_back(dp.thickness);
    }
    std::sort(th.begin(), th.end(), [](const Rat& a, const Rat& b) { return a > b; });
    CHECK(th[0] == Rat(4));
    CHECK(th[1] == Rat(3));
    CHECK(th[2] == Rat(2));
}

TEST_CASE("odd double point configuration") {
    // triple cluster {0, 2^e, 2^e*3} against units: odd double point
    Ctx K = FieldContext::make(1, 2, Rat(24));
    FieldElement w = K->lift(2u);
    long long e = 2;
    std::vector<FieldElement> roots{K->zero(), K->two_pow(Rat(e)),
                                    K->two_pow(Rat(e)) * K->from_integer(3),
                                    K->one(), w, w + K->one()};
    LaurentPoly acc = LaurentPoly::from_ints(K, {{0, 1}});
    for (auto& r : roots)
        acc = acc * (LaurentPoly::from_ints(K, {{1, 1}}) - LaurentPoly::monomial(K, 0, r));
    ModelTree T = build_marked_tree(K, acc, 2);
    REQUIRE(T.dps.size() == 1);
    CHECK(!T.dps[0].even);
    CHECK(T.dps[0].thickness == Rat(e));
    CHECK(T.dps[0].marked_below == 3);
    // analysis: single upstairs point, both sides inseparable
    auto R = analyze_curve(T);
    CHECK(R.m2 == 0);
    CHECK(!R.tree.dps[0].split);
}

TEST_CASE("genus-1 pipeline across the alpha thresholds") {
    struct Row {
        long long alpha;
        bool good;           // betti == 0
        int expect_breaks;   // 1 below/at two, or 2 at two
    };
    for (Row row : {Row{1, true, 1}, Row{2, true, 1}, Row{3, true, 1},
                    Row{4, true, 1}, Row{5, false, 2}, Row{8, false, 2}}) {
        Ctx K = FieldContext::make(1, 1, Rat(24), 48);
        auto f = legendre(K, K->two_pow(Rat(row.alpha)));
        ModelTree T = build_marked_tree(K, f, 1);
        auto R = analyze_curve(T);
        INFO("alpha = ", row.alpha);
        CHECK(R.betti == (row.good ? 0 : 1));
        CHECK(R.toric_rank == (row.good ? 0 : 1));
        // count type-(b) components and check break structure
        int nb = 0, nd = 0, sep_genus1 = 0;
        for (auto& c : R.tree.comps) {
            if (c.parent == -2) continue;
            if (c.kind == CompKind::b) ++nb;
            if (c.kind == CompKind::d) ++nd;
            if (c.cover == CoverKind::separable && c.genus_known && c.genus_up == 1)
                ++sep_genus1;
        }
        CHECK(nb == row.expect_breaks);
        if (row.alpha < 4) {
            // one type-(d) of genus one above the break point
            CHECK(nd == 1);
        } else if (row.alpha == 4) {
            CHECK(nd == 0);
            CHECK(sep_genus1 == 1);
        } else {
            CHECK(nd == 0);
            // the loop: exactly one split double point
            CHECK(R.m2 == 1);
            CHECK(R.n2 == 0);
        }
        // genus bookkeeping: components + betti = 1
        int total = R.betti;
        for (auto& c : R.tree.comps)
            if (c.parent != -2 && c.genus_known) total += c.genus_up;
        CHECK(total == 1);
        // the dual graph agrees
        CHECK(R.graph.betti() == R.betti);
    }
}

TEST_CASE("genus-1 smooth base has one type-(d) component of genus 1") {
    Ctx K = FieldContext::make(1, 2, Rat(24), 48);
    auto f = legendre(K, K->lift(2u));
    ModelTree T = build_marked_tree(K, f, 1);
    auto R = analyze_curve(T);
    CHECK(R.betti == 0);
    int nd = 0;
    for (auto& c : R.tree.comps) {
        if (c.parent == -2) continue;
        if (c.kind == CompKind::d) {
            ++nd;
            CHECK(c.genus_known);
            CHECK(c.genus_up == 1);
        }
    }
    CHECK(nd == 1);
}

TEST_CASE("local equations carry unit constant terms and exact products") {
    Ctx K = FieldContext::make(1, 1, Rat(24));
    auto f = legendre(K, K->two_pow(Rat(3)));
    ModelTree T = build_marked_tree(K, f, 1);
    REQUIRE(T.dps.size() == 1);
    auto le = local_equation_at(T, 0);
    REQUIRE(le.ok);
    CHECK((le.f1.get(0) - T.ctx->one()).is_exact_zero());
    CHECK((le.f2.get(0) - T.ctx->one()).is_exact_zero());
    CHECK(le.alpha == Rat(3));
    CHECK(!le.odd);
    // f1 f2 matches the curve up to the expected normalization: both sides
    // have the same zero set; compare the combined w-bar with 5.1
    Ctx K2 = T.ctx;
    auto d1 = odd_decomposition(K2, le.f1);
    Ctx K3 = K2;
    auto d2 = odd_decomposition(K3, le.f2.embed(K2));
    LaurentPoly ff = le.f1.embed(K3) * le.f2.embed(K3).substitute_inverse_scale(le.alpha);
    auto dc = combine_decomps(ff, d1, d2, le.alpha, DecompKind::odd);
    auto w = wbar_from_g(dc.g, le.alpha);
    // w-bar = min{2, lambda, 3 - lambda}
    CHECK(w.value_at(Rat(1)) == Rat(1));
    CHECK(w.value_at(Rat(3, 2)) == Rat(3, 2));
    CHECK(w.value_at(Rat(2)) == Rat(1));
    auto bps = break_points(w);
    REQUIRE(bps.size() == 1);
    CHECK(bps[0].lambda == Rat(3, 2));
    CHECK(bps[0].value == Rat(3, 2));
}

TEST_CASE("chart records verify at precision") {
    for (long long alpha : {3, 5}) {
        Ctx K = FieldContext::make(1, 1, Rat(24), 48);
        auto f = legendre(K, K->two_pow(Rat(alpha)));
        ModelTree T = build_marked_tree(K, f, 1);
        auto R = analyze_curve(T);
        for (auto& cr : R.tree.charts) {
            auto worst = verify_chart(cr, R.tree.ctx);
            if (worst) CHECK(*worst >= R.tree.ctx->precision() - Rat(2));
        }
    }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hyred/wbar.hpp"

#include <random>

using namespace hyred;

static Ctx Q2() { return FieldContext::make(1, 1, Rat(20)); }

TEST_CASE("w-bar of the running example: 3l / l+1 / 3-l") {
    Ctx K = Q2();
    auto g = LaurentPoly::from_ints(K, {{3, 1}, {1, 2}, {-1, 8}});
    auto w = wbar_from_g(g, Rat(3));
    REQUIRE(w.vertices.size() == 4);
    CHECK(w.vertices[0] == std::make_pair(Rat(0), Rat(0)));
    CHECK(w.vertices[1] == std::make_pair(Rat(1, 2), Rat(3, 2)));
    CHECK(w.vertices[2] == std::make_pair(Rat(1), Rat(2)));
    CHECK(w.vertices[3] == std::make_pair(Rat(3), Rat(0)));
    CHECK(w.value_at(Rat(1, 4)) == Rat(3, 4));
    CHECK(w.value_at(Rat(3, 4)) == Rat(7, 4));
    CHECK(w.value_at(Rat(2)) == Rat(1));
    auto bps = break_points(w);
    REQUIRE(bps.size() == 2);
    CHECK(bps[0].lambda == Rat(1, 2));
    CHECK(bps[0].value == Rat(3, 2));
    CHECK(!bps[0].at_two);
    CHECK(bps[1].lambda == Rat(1));
    CHECK(bps[1].value == Rat(2));
    CHECK(bps[1].at_two);
}

TEST_CASE("single line capped") {
    Ctx K = Q2();
    auto g = LaurentPoly::from_ints(K, {{1, 3}});
    auto w = wbar_from_g(g, Rat(4));
    // min{2, lambda} on [0,4]
    CHECK(w.value_at(Rat(1)) == Rat(1));
    CHECK(w.value_at(Rat(3)) == Rat(2));
    auto bps = break_points(w);
    REQUIRE(bps.size() == 1);
    CHECK(bps[0].lambda == Rat(2));
    CHECK(bps[0].at_two);
}

TEST_CASE("zero g means constant two") {
    Ctx K = Q2();
    auto w = wbar_from_g(LaurentPoly(K), Rat(5));
    CHECK(w.constant_two());
    CHECK(break_points(w).empty());
}

TEST_CASE("legendre shape min{2, lambda, alpha-lambda}") {
    Ctx K = Q2();
    for (long long a : {1, 2, 3, 4}) {
        LaurentPoly g(K);
        g.set(1, K->from_integer(1));
        g.set(-1, K->two_pow(Rat(a)));
        auto w = wbar_from_g(g, Rat(a));
        auto bps = break_points(w);
        REQUIRE(bps.size() == 1);
        CHECK(bps[0].lambda == Rat(a, 2));
        CHECK(bps[0].value == hyred::min(Rat(a, 2), Rat(2)));
    }
    for (long long a : {5, 8}) {
        LaurentPoly g(K);
        g.set(1, K->from_integer(1));
        g.set(-1, K->two_pow(Rat(a)));
        auto w = wbar_from_g(g, Rat(a));
        auto bps = break_points(w);
        REQUIRE(bps.size() == 2);
        CHECK(bps[0].lambda == Rat(2));
        CHECK(bps[1].lambda == Rat(a - 2));
        CHECK(bps[0].at_two);
        CHECK(bps[1].at_two);
    }
}

TEST_CASE("concavity, criterion cross-check, Newton polygon duality") {
    std::mt19937_64 rng(2024);
    Ctx K = Q2();
    for (int it = 0; it < 120; ++it) {
        LaurentPoly g(K);
        for (int e = -3; e <= 4; ++e) {
            if (e == 0) continue; // odd decompositions have no constant term
            if (rng() % 2) continue;
            long long c = (long long)(rng() % 40) + 1;
            g.add_to(e, K->from_integer(c));
        }
        g = g.pruned();
        Rat alpha(1 + (long long)(rng() % 5));
        auto w = wbar_from_g(g, alpha);
        // concave: slopes weakly decrease
        for (size_t k = 0; k + 2 < w.vertices.size(); ++k)
            CHECK(w.slope_after(k) >= w.slope_after(k + 1));
        // values <= 2; horizontal segments have value exactly 2
        for (size_t k = 0; k + 1 < w.vertices.size(); ++k) {
            CHECK(w.vertices[k].second <= Rat(2));
            if (w.slope_after(k) == Rat(0)) {
                CHECK(w.vertices[k].second == Rat(2));
                CHECK(w.vertices[k + 1].second == Rat(2));
            }
        }
        if (g.empty()) continue;
        // break points match the direct criterion at the vertices and at
        // random interior rationals
        auto bps = break_points(w);
        for (auto& bp : bps) CHECK(break_point_criterion(g, bp.lambda));
        for (int t = 0; t < 5; ++t) {
            Rat lam((long long)(rng() % (8 * alpha.n)) + 1, 8);
            if (!(lam > Rat(0) && lam < alpha)) continue;
            bool is_bp = false;
            for (auto& bp : bps)
                if (bp.lambda == lam) is_bp = true;
            CHECK(break_point_criterion(g, lam) == is_bp);
        }
        // below-two break points are negated Newton-polygon slopes of g
        auto slopes = g.newton_polygon().slopes();
        for (auto& bp : bps) {
            if (bp.at_two) continue;
            bool found = false;
            for (auto& s : slopes)
                if (-s == bp.lambda) found = true;
            CHECK(found);
        }
    }
}

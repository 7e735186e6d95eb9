#include <doctest.h>

#include <cmath>
#include <random>

#include "dacert/errors.hpp"
#include "dacert/interval.hpp"
#include "support.hpp"

using namespace dacert;
using namespace dacert::ival;
using da::TaylorPoly;

TEST_CASE("elementary operators") {
    CHECK(iadd({1, 2}, {-1, 3}) == Interval(0, 5));
    CHECK(imul({1, 2}, {-1, 3}) == Interval(-2, 6));
    const double a = 0.25, b = 1.75;
    CHECK(isub({a, b}, {a, b}) == Interval(a - b, b - a));
    CHECK_THROWS_AS(Interval(2, 1), DomainError);
    CHECK_THROWS_AS(Interval(0, INFINITY), DomainError);
}

TEST_CASE("bound_poly examples") {
    const BoundOptions exact{0.0};
    auto d = TaylorPoly::variable(1, 2, 0);
    CHECK(bound_poly(1.0 + 2.0 * d - 3.0 * d * d, exact) == Interval(-4, 6));
    CHECK(bound_poly(TaylorPoly(2, 3, 7.0), exact) == Interval(7, 7));
    auto seven = bound_poly(TaylorPoly(2, 3, 7.0));
    CHECK(seven.lo == doctest::Approx(7.0));
    CHECK(seven.hi == doctest::Approx(7.0));
    auto xy = TaylorPoly::variable(2, 2, 0) * TaylorPoly::variable(2, 2, 1);
    CHECK(bound_poly(xy, exact) == Interval(-1, 1));
}

TEST_CASE("single monomial bound is tight") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-3, 3);
    const auto lay = da::MonomialLayout::get(3, 4);
    for (std::size_t k = 1; k < lay->size(); ++k) {
        TaylorPoly p(lay);
        const double a = u(rng);
        p[k] = a;
        CHECK(bound_poly(p, {0.0}).width() == 2.0 * std::abs(a));
    }
}

TEST_CASE("bound_map widening") {
    auto d = TaylorPoly::variable(1, 2, 0);
    da::TaylorMap m({1.0 + 2.0 * d - 3.0 * d * d, d});
    auto box = bound_map(m, {{0.1, 0.5}}, {0.0});
    CHECK(box[0].lo == doctest::Approx(-4.1));
    CHECK(box[0].hi == doctest::Approx(6.1));
    CHECK(box[1].lo == doctest::Approx(-1.5));
    CHECK(box[1].hi == doctest::Approx(1.5));
    auto same = bound_map(m, {{0.0, 0.0}}, {0.0});
    CHECK(same[0] == Interval(-4, 6));
    CHECK_THROWS_AS(bound_map(m, {{0.1}}), DimensionError);

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 100; ++t) {
        const double r0 = u(rng), r1 = r0 + u(rng);
        auto b0 = bound_map(m, {{r0, r0}});
        auto b1 = bound_map(m, {{r1, r1}});
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(b1[i].contains(b0[i]));
        }
    }
}

TEST_CASE("range oracle") {
    auto d = TaylorPoly::variable(1, 3, 0);
    auto r = range_oracle(d, 20000, 1);
    CHECK(r.lo == doctest::Approx(-1.0).epsilon(0.01));
    CHECK(r.hi == doctest::Approx(1.0).epsilon(0.01));
    CHECK(range_oracle(TaylorPoly(2, 2, 7.0), 10, 3) == Interval(7, 7));
    std::mt19937_64 rng(10);
    for (int t = 0; t < 20; ++t) {
        auto p = testing_support::random_poly(3, 4, rng);
        CHECK(bound_poly(p).contains(range_oracle(p, 500, t)));
    }
}

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "dacert/da/taylor_map.hpp"
#include "dacert/errors.hpp"
#include "support.hpp"

using namespace dacert;
using namespace dacert::da;

namespace {

TaylorPoly var(std::size_t m, unsigned n, std::size_t i, double c = 0.0) { return TaylorPoly::variable(m, n, i, c); }

} // namespace

TEST_CASE("variable") {
    auto p = var(2, 4, 0, 1.5);
    CHECK(p.constant_part() == 1.5);
    CHECK(p.coefficient({1, 0}) == 1.0);
    CHECK(p.coefficient({0, 1}) == 0.0);
    auto q = var(1, 2, 0);
    CHECK(q.constant_part() == 0.0);
    CHECK(q.coefficient({1}) == 1.0);
    CHECK_THROWS_AS(var(2, 4, 2), DimensionError);
    CHECK_THROWS_AS(var(2, 0, 0), DimensionError);
}

TEST_CASE("graded-lex layout") {
    const auto lay = MonomialLayout::get(2, 2);
    REQUIRE(lay->size() == 6);
    // 1, d1, d2, d1^2, d1 d2, d2^2
    CHECK(lay->exponents(3)[0] == 2);
    CHECK(lay->exponents(4)[0] == 1);
    CHECK(lay->exponents(4)[1] == 1);
    CHECK(lay->exponents(5)[1] == 2);
}

TEST_CASE("multiplication and truncation") {
    auto d = var(1, 2, 0);
    auto sq = (1.0 + d) * (1.0 + d);
    CHECK(sq.coefficient({0}) == 1.0);
    CHECK(sq.coefficient({1}) == 2.0);
    CHECK(sq.coefficient({2}) == 1.0);

    auto e = var(1, 1, 0);
    auto t = (1.0 + e) * (1.0 - e);
    CHECK(t.constant_part() == 1.0);
    CHECK(t.coefficient({1}) == 0.0);

    auto s = var(2, 2, 0) + var(2, 2, 1);
    auto s2 = s * s;
    CHECK(s2.coefficient({2, 0}) == 1.0);
    CHECK(s2.coefficient({1, 1}) == 2.0);
    CHECK(s2.coefficient({0, 2}) == 1.0);

    CHECK_THROWS_AS(var(2, 2, 0) * var(2, 3, 0), DimensionError);
    CHECK_THROWS_AS(var(2, 2, 0) * var(3, 2, 0), DimensionError);
}

TEST_CASE("intrinsic examples") {
    auto d3 = var(1, 3, 0);
    auto s = sin(d3);
    CHECK(s.coefficient({1}) == doctest::Approx(1.0));
    CHECK(s.coefficient({2}) == doctest::Approx(0.0));
    CHECK(s.coefficient({3}) == doctest::Approx(-1.0 / 6.0));

    auto d2 = var(1, 2, 0);
    auto e = exp(d2);
    CHECK(e.coefficient({0}) == doctest::Approx(1.0));
    CHECK(e.coefficient({1}) == doctest::Approx(1.0));
    CHECK(e.coefficient({2}) == doctest::Approx(0.5));

    auto r = reciprocal(1.0 + d2);
    CHECK(r.coefficient({0}) == doctest::Approx(1.0));
    CHECK(r.coefficient({1}) == doctest::Approx(-1.0));
    CHECK(r.coefficient({2}) == doctest::Approx(1.0));

    CHECK_THROWS_AS(reciprocal(d2), DomainError);
    CHECK_THROWS_AS(sqrt(d2), DomainError);
    CHECK_THROWS_AS(sqrt(d2 - 1.0), DomainError);
    CHECK_THROWS_AS(log(d2), DomainError);
}

TEST_CASE("integer and real powers") {
    auto d = var(2, 5, 0, 0.7) + 0.3 * var(2, 5, 1);
    auto p3 = pow(d, 3);
    auto ref = d * d * d;
    for (std::size_t k = 0; k < ref.coefficients().size(); ++k) {
        CHECK(p3[k] == doctest::Approx(ref[k]).epsilon(1e-13));
    }
    auto inv = pow(d, -2);
    auto ref2 = reciprocal(d * d);
    for (std::size_t k = 0; k < ref2.coefficients().size(); ++k) {
        CHECK(inv[k] == doctest::Approx(ref2[k]).epsilon(1e-12));
    }
    auto half = pow(d, 0.5);
    auto rs = sqrt(d);
    for (std::size_t k = 0; k < rs.coefficients().size(); ++k) {
        CHECK(half[k] == doctest::Approx(rs[k]).epsilon(1e-12));
    }
    CHECK(pow(d, 0)[0] == 1.0);
}

TEST_CASE("intrinsic order of accuracy") {
    // evaluate(f(p), dx) - f(evaluate(p, dx)) = O(|dx|^{n+1}): halving dx
    // should divide the defect by about 2^{n+1}.
    const unsigned n = 4;
    auto base = 0.6 + var(2, n, 0) + 0.5 * var(2, n, 1) + 0.2 * var(2, n, 0) * var(2, n, 1);
    struct Fn {
        const char* name;
        TaylorPoly (*da)(const TaylorPoly&);
        double (*fl)(double);
    };
    const Fn fns[] = {
        {"sin", [](const TaylorPoly& p) { return sin(p); }, [](double x) { return std::sin(x); }},
        {"cos", [](const TaylorPoly& p) { return cos(p); }, [](double x) { return std::cos(x); }},
        {"exp", [](const TaylorPoly& p) { return exp(p); }, [](double x) { return std::exp(x); }},
        {"log", [](const TaylorPoly& p) { return log(p); }, [](double x) { return std::log(x); }},
        {"sqrt", [](const TaylorPoly& p) { return sqrt(p); }, [](double x) { return std::sqrt(x); }},
        {"reciprocal", [](const TaylorPoly& p) { return reciprocal(p); }, [](double x) { return 1.0 / x; }},
        {"tanh", [](const TaylorPoly& p) { return tanh(p); }, [](double x) { return std::tanh(x); }},
    };
    for (const auto& f : fns) {
        CAPTURE(f.name);
        const auto fp = f.da(base);
        double prev = 0.0;
        for (int lvl = 0; lvl < 4; ++lvl) {
            const double h = 0.1 / std::pow(2.0, lvl);
            const double dx[2] = {h, -0.7 * h};
            const double defect = std::abs(fp.evaluate(dx) - f.fl(base.evaluate(dx)));
            if (lvl > 0 && prev > 1e-14) {
                const double ratio = prev / defect;
                CHECK(ratio > 0.5 * std::pow(2.0, n + 1));
            }
            prev = defect;
        }
    }
}

TEST_CASE("tanh is sign-safe for large arguments") {
    auto p = var(1, 3, 0, 40.0);
    auto t = tanh(p);
    CHECK(t.constant_part() == doctest::Approx(1.0));
    auto q = tanh(-1.0 * p);
    CHECK(q.constant_part() == doctest::Approx(-1.0));
    for (double c : t.coefficients()) {
        CHECK(std::isfinite(c));
    }
}

TEST_CASE("ring axioms under truncation") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        auto a = testing_support::random_poly(3, 5, rng);
        auto b = testing_support::random_poly(3, 5, rng);
        auto c = testing_support::random_poly(3, 5, rng);
        auto lhs = a * (b + c);
        auto rhs = a * b + a * c;
        for (std::size_t k = 0; k < lhs.coefficients().size(); ++k) {
            CHECK(std::abs(lhs[k] - rhs[k]) <= 1e-12 * (1.0 + std::abs(rhs[k])));
        }
        auto ab = a * b;
        auto ba = b * a;
        for (std::size_t k = 0; k < ab.coefficients().size(); ++k) {
            CHECK(ab[k] == doctest::Approx(ba[k]).epsilon(1e-13));
        }
    }
}

TEST_CASE("composition examples") {
    std::mt19937_64 rng(3);
    TaylorMap p({testing_support::random_poly(2, 3, rng), testing_support::random_poly(2, 3, rng)});
    auto id = TaylorMap::identity(2, 3);
    auto pi = compose(p, id);
    for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t k = 0; k < pi[c].coefficients().size(); ++k) {
            CHECK(pi[c][k] == doctest::Approx(p[c][k]));
        }
    }
    TaylorMap q({p[0].nonconstant_part(), p[1].nonconstant_part()});
    auto iq = compose(id, q);
    for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t k = 0; k < iq[c].coefficients().size(); ++k) {
            CHECK(iq[c][k] == doctest::Approx(q[c][k]));
        }
    }
    auto y = var(1, 3, 0);
    TaylorMap outer({y * y});
    TaylorMap inner({y + y * y});
    auto r = compose(outer, inner);
    CHECK(r[0].coefficient({1}) == 0.0);
    CHECK(r[0].coefficient({2}) == doctest::Approx(1.0));
    CHECK(r[0].coefficient({3}) == doctest::Approx(2.0));

    CHECK_THROWS_AS(compose(outer, TaylorMap({y + 1.0})), DimensionError);
    CHECK_THROWS_AS(compose(outer, TaylorMap::identity(2, 3)), DimensionError);
}

TEST_CASE("inversion examples") {
    auto id = TaylorMap::identity(3, 4);
    auto inv = invert(id);
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t k = 0; k < inv[c].coefficients().size(); ++k) {
            CHECK(inv[c][k] == id[c][k]);
        }
    }
    auto d = var(1, 2, 0);
    auto r = invert(TaylorMap({2.0 * d + d * d}));
    CHECK(r[0].coefficient({1}) == doctest::Approx(0.5));
    CHECK(r[0].coefficient({2}) == doctest::Approx(-1.0 / 8.0));

    auto lin = invert(TaylorMap({2.0 * var(2, 3, 0), 4.0 * var(2, 3, 1)}));
    CHECK(lin[0].coefficient({1, 0}) == doctest::Approx(0.5));
    CHECK(lin[1].coefficient({0, 1}) == doctest::Approx(0.25));
    CHECK(lin[0].coefficient({0, 1}) == 0.0);

    CHECK_THROWS_AS(invert(TaylorMap({var(2, 2, 0), var(2, 2, 0)})), SingularMapError);
    CHECK_THROWS_AS(invert(TaylorMap({d + 1.0})), DimensionError);
    CHECK_THROWS_AS(invert(TaylorMap({var(2, 2, 0)})), DimensionError);
}

TEST_CASE("invert and compose give the identity") {
    std::mt19937_64 rng(5);
    for (std::size_t m = 1; m <= 4; ++m) {
        for (unsigned n = 1; n <= 6; ++n) {
            std::vector<TaylorPoly> comps;
            for (std::size_t i = 0; i < m; ++i) {
                auto c = testing_support::random_poly(m, n, rng, 0.3);
                c[0] = 0.0;
                // diagonally dominant linear part
                c[1 + i] += 2.0;
                comps.push_back(c);
            }
            TaylorMap map(comps);
            auto inv = invert(map);
            for (const auto& prod : {compose(inv, map), compose(map, inv)}) {
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t k = 0; k < prod[i].coefficients().size(); ++k) {
                        const double expect = k == 1 + i ? 1.0 : 0.0;
                        CHECK(std::abs(prod[i][k] - expect) < 1e-10);
                    }
                }
            }
        }
    }
}

TEST_CASE("antiderivative") {
    auto d = var(1, 2, 0);
    auto a = (1.0 + 2.0 * d).antiderivative(0);
    CHECK(a.constant_part() == 0.0);
    CHECK(a.coefficient({1}) == 1.0);
    CHECK(a.coefficient({2}) == 1.0);

    auto c = TaylorPoly(1, 2, 3.5).antiderivative(0);
    CHECK(c.coefficient({1}) == 3.5);

    auto top = (d * d).antiderivative(0);
    CHECK(top.is_zero());
    CHECK_THROWS_AS(d.antiderivative(1), DimensionError);

    std::mt19937_64 rng(9);
    auto p = testing_support::random_poly(3, 4, rng);
    for (std::size_t v = 0; v < 3; ++v) {
        auto back = p.antiderivative(v).derivative(v);
        const auto& lay = p.layout();
        for (std::size_t k = 0; k < lay.size(); ++k) {
            if (lay.degree(k) < 4) {
                CHECK(back[k] == doctest::Approx(p[k]).epsilon(1e-14));
            }
        }
    }
}

TEST_CASE("evaluation") {
    auto d = var(1, 2, 0);
    auto p = 1.0 + 2.0 * d - 3.0 * d * d;
    const double zero[1] = {0.0};
    const double one[1] = {1.0};
    CHECK(p.evaluate(zero) == 1.0);
    CHECK(p.evaluate(one) == 0.0);
    auto id = TaylorMap::identity(3, 2);
    const double dx[3] = {0.1, -0.2, 0.3};
    auto v = id.evaluate(dx);
    CHECK(v[0] == 0.1);
    CHECK(v[1] == -0.2);
    CHECK(v[2] == 0.3);
    const double bad[2] = {0, 0};
    CHECK_THROWS_AS(p.evaluate(bad), DimensionError);
}

TEST_CASE("recenter examples") {
    auto d = var(1, 2, 0);
    const double om[1] = {-0.5}, op[1] = {0.5}, s[1] = {0.5};
    auto a = recenter(d, om, s);
    CHECK(a.constant_part() == -0.5);
    CHECK(a.coefficient({1}) == 0.5);
    auto b = recenter(d * d, op, s);
    CHECK(b.constant_part() == doctest::Approx(0.25));
    CHECK(b.coefficient({1}) == doctest::Approx(0.5));
    CHECK(b.coefficient({2}) == doctest::Approx(0.25));
    const double o0[1] = {0.0}, s1[1] = {1.0};
    auto p = 1.0 + 2.0 * d - 3.0 * d * d;
    auto same = recenter(p, o0, s1);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(same[k] == p[k]);
    }
    const double big[1] = {0.75};
    CHECK_THROWS_AS(recenter(p, big, s), DimensionError);
}

TEST_CASE("recenter exactness") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        auto p = testing_support::random_poly(3, 5, rng);
        std::vector<double> o(3), s(3);
        std::uniform_real_distribution<double> u(0.05, 0.5);
        for (std::size_t i = 0; i < 3; ++i) {
            s[i] = u(rng);
            o[i] = (trial % 2 ? 1.0 : -1.0) * (1.0 - s[i]) * u(rng);
        }
        auto q = recenter(p, o, s);
        for (int k = 0; k < 50; ++k) {
            auto dx = testing_support::random_point(3, rng);
            std::vector<double> y(3);
            for (std::size_t i = 0; i < 3; ++i) {
                y[i] = o[i] + s[i] * dx[i];
            }
            CHECK(std::abs(q.evaluate(dx) - p.evaluate(y)) < 1e-12);
        }
    }
}

TEST_CASE("translate keeps degree and shifts exactly") {
    auto p = 1.0 + var(2, 3, 0) * var(2, 3, 1) * var(2, 3, 1);
    const double off[2] = {0.5, -0.25};
    auto q = translate(p, off);
    const double dx[2] = {0.1, 0.2};
    const double y[2] = {0.6, -0.05};
    CHECK(q.evaluate(dx) == doctest::Approx(p.evaluate(y)).epsilon(1e-15));
}

TEST_CASE("variable projection and embedding") {
    auto p = var(3, 3, 0) + 2.0 * var(3, 3, 1) * var(3, 3, 0) + var(3, 3, 2);
    auto q = p.leading_variables(2);
    CHECK(q.nvars() == 2);
    CHECK(q.coefficient({1, 0}) == 1.0);
    CHECK(q.coefficient({1, 1}) == 2.0);
    auto r = q.with_variables(4);
    CHECK(r.coefficient({1, 1, 0, 0}) == 2.0);
}

TEST_CASE("text round trip and golden file") {
    std::mt19937_64 rng(1);
    auto p = testing_support::random_poly(2, 3, rng);
    auto q = from_text(to_text(p), 2, 3);
    for (std::size_t k = 0; k < p.coefficients().size(); ++k) {
        CHECK(q[k] == p[k]);
    }
    auto d1 = var(2, 3, 0), d2 = var(2, 3, 1);
    auto g = 1.0 + 2.0 * d1 - 0.5 * d2 + 0.25 * d1 * d2 + d2 * d2 * d2;
    std::ifstream in(DACERT_TEST_DATA "/poly_golden.txt");
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(to_text(g) == ss.str());
}

TEST_CASE("derivative of product follows Leibniz") {
    std::mt19937_64 rng(4);
    auto a = testing_support::random_poly(2, 4, rng);
    auto b = testing_support::random_poly(2, 4, rng);
    auto lhs = (a * b).derivative(1);
    auto rhs = a.derivative(1) * b + a * b.derivative(1);
    const auto& lay = a.layout();
    for (std::size_t k = 0; k < lay.size(); ++k) {
        if (lay.degree(k) < 3) {
            CHECK(lhs[k] == doctest::Approx(rhs[k]).epsilon(1e-12));
        }
    }
}

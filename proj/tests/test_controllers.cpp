#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "dacert/controllers.hpp"
#include "support.hpp"

using namespace dacert;
using namespace dacert::ctrl;
using da::TaylorPoly;

namespace {

SirenNetwork single_layer(double w, double omega) {
    SirenNetwork net;
    DenseLayer L{1, 1, {w}, {0.0}, omega, false};
    DenseLayer out{1, 1, {1.0}, {0.0}, 30.0, true};
    net.layers = {L, out};
    net.input = {{0.0}, {1.0}};
    net.output = {{0.0}, {1.0}};
    return net;
}

std::vector<TaylorPoly> expand_at(std::span<const double> c, unsigned n) {
    std::vector<TaylorPoly> x;
    for (std::size_t i = 0; i < c.size(); ++i) {
        x.push_back(TaylorPoly::variable(c.size(), n, i, c[i]));
    }
    return x;
}

// Defect of the DA expansion at dx and dx/2; the ratio should be near 2^{n+1}.
template <class F, class G>
void check_da_consistency(F&& poly_fn, G&& float_fn, std::span<const double> center, unsigned n,
                          std::mt19937_64& rng, double radius, std::span<const double> per_input = {}) {
    const auto xp = expand_at(center, n);
    const auto up = poly_fn(std::span<const TaylorPoly>(xp));
    const auto uc = float_fn(center);
    for (std::size_t k = 0; k < up.size(); ++k) {
        CHECK(std::abs(up[k].constant_part() - uc[k]) < 1e-12);
    }
    auto dir = testing_support::random_point(center.size(), rng);
    double prev = -1.0;
    for (int lvl = 0; lvl < 3; ++lvl) {
        const double h = radius / std::pow(2.0, lvl);
        std::vector<double> dx(center.size()), x(center.size());
        for (std::size_t i = 0; i < dx.size(); ++i) {
            dx[i] = h * dir[i] * (per_input.empty() ? 1.0 : per_input[i]);
            x[i] = center[i] + dx[i];
        }
        const auto uf = float_fn(x);
        double defect = 0.0;
        for (std::size_t k = 0; k < up.size(); ++k) {
            defect = std::max(defect, std::abs(up[k].evaluate(dx) - uf[k]));
        }
        if (prev > 1e-13) {
            CHECK(prev / std::max(defect, 1e-300) > 0.5 * std::pow(2.0, n + 1));
        }
        prev = defect;
    }
}

} // namespace

TEST_CASE("siren forward examples") {
    auto zero = single_layer(0.0, 30.0);
    const double x1[1] = {0.7};
    CHECK(zero.forward<double>(x1)[0] == 0.0);
    auto half_pi = single_layer(std::numbers::pi / 2, 1.0);
    const double one[1] = {1.0};
    CHECK(half_pi.forward<double>(one)[0] == doctest::Approx(1.0));
    const double two[2] = {1.0, 2.0};
    CHECK_THROWS_AS(half_pi.forward<double>(two), DimensionError);
}

TEST_CASE("siren init follows the uniform bounds") {
    const std::size_t dims[] = {4, 32, 32, 32, 2};
    const double omega = 30.0;
    auto net = init_siren(dims, omega, 7);
    REQUIRE(net.layers.size() == 4);
    for (double w : net.layers[0].W) {
        CHECK(std::abs(w) <= 1.0 / 4.0);
    }
    for (std::size_t l = 1; l < net.layers.size(); ++l) {
        const double bound = std::sqrt(6.0 / static_cast<double>(net.layers[l].cols)) / omega;
        double maxw = 0.0;
        for (double w : net.layers[l].W) {
            CHECK(std::abs(w) <= bound);
            maxw = std::max(maxw, std::abs(w));
        }
        CHECK(maxw > 0.8 * bound);
    }
    for (const auto& L : net.layers) {
        for (double b : L.b) {
            CHECK(b == 0.0);
        }
    }
    CHECK(net.layers.back().linear);
    auto again = init_siren(dims, omega, 7);
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        CHECK(net.layers[l].W == again.layers[l].W);
    }
    auto other = init_siren(dims, omega, 8);
    CHECK(other.layers[0].W != net.layers[0].W);
    const std::size_t bad[] = {4, 2};
    CHECK_THROWS_AS(init_siren(bad, omega, 1), DimensionError);
}

TEST_CASE("weights round trip and strict validation") {
    const std::size_t dims[] = {3, 8, 8, 2};
    auto net = init_siren(dims, 30.0, 3);
    net.input = {{0.1, 0.2, 0.3}, {2.0, 3.0, 4.0}};
    net.output = {{0.5, -0.5}, {0.25, 0.75}};
    const auto text = dump_siren(net);
    auto back = parse_siren(text);
    CHECK(dump_siren(back) == text);
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        CHECK(back.layers[l].W == net.layers[l].W);
        CHECK(back.layers[l].omega == net.layers[l].omega);
    }
    const auto tmp = std::filesystem::temp_directory_path() / "dacert_weights_roundtrip.json";
    save_siren(net, tmp);
    CHECK(dump_siren(load_siren(tmp)) == text);
    std::filesystem::remove(tmp);

    auto kind_of = [](const std::string& s) {
        try {
            parse_siren(s);
        } catch (const WeightsError& e) {
            return static_cast<int>(e.kind());
        }
        return -1;
    };
    const std::string scales = R"("input_scale":{"offset":[0],"scale":[1]},"output_scale":{"offset":[0],"scale":[1]})";
    const std::string ok = "{" + scales +
                           R"(,"layers":[{"type":"siren","W":[[1.0]],"b":[0]},{"type":"linear","W":[[1.0]],"b":[0]}]})";
    CHECK(kind_of(ok) == -1);
    CHECK(parse_siren(ok).layers[0].omega == 30.0);
    const std::string ragged =
        "{" + scales +
        R"(,"layers":[{"type":"siren","W":[[1.0]],"b":[0]},{"type":"linear","W":[[1.0, 2.0]],"b":[0]}]})";
    CHECK(kind_of(ragged) == static_cast<int>(WeightsError::Kind::dimension_mismatch));
    const std::string nan =
        "{" + scales + R"(,"layers":[{"type":"siren","W":[[NaN]],"b":[0]},{"type":"linear","W":[[1.0]],"b":[0]}]})";
    CHECK(kind_of(nan) == static_cast<int>(WeightsError::Kind::non_finite));
    const std::string null_entry =
        "{" + scales + R"(,"layers":[{"type":"siren","W":[[null]],"b":[0]},{"type":"linear","W":[[1.0]],"b":[0]}]})";
    CHECK(kind_of(null_entry) == static_cast<int>(WeightsError::Kind::non_finite));
    const std::string missing = "{" + scales + R"(,"layers":[{"type":"siren","W":[[1.0]]},{"type":"linear","W":[[1.0]],"b":[0]}]})";
    CHECK(kind_of(missing) == static_cast<int>(WeightsError::Kind::missing_field));
    const std::string no_layers = "{" + scales + "}";
    CHECK(kind_of(no_layers) == static_cast<int>(WeightsError::Kind::missing_field));
    const std::string not_last =
        "{" + scales + R"(,"layers":[{"type":"linear","W":[[1.0]],"b":[0]},{"type":"siren","W":[[1.0]],"b":[0]}]})";
    CHECK(kind_of(not_last) == static_cast<int>(WeightsError::Kind::wrong_type));
    const std::string extra = "{" + scales +
                              R"(,"layers":[{"type":"siren","W":[[1.0]],"b":[0]},{"type":"linear","W":[[1.0]],"b":[0]}],"lr":1})";
    CHECK(kind_of(extra) == static_cast<int>(WeightsError::Kind::wrong_type));
    const std::string linear_omega =
        "{" + scales +
        R"(,"layers":[{"type":"siren","W":[[1.0]],"b":[0]},{"type":"linear","omega":2,"W":[[1.0]],"b":[0]}]})";
    CHECK(kind_of(linear_omega) == static_cast<int>(WeightsError::Kind::wrong_type));
    CHECK_THROWS_AS(load_siren("/nonexistent/weights.json"), WeightsError);
}

TEST_CASE("siren DA consistency on random toy networks") {
    std::mt19937_64 rng(12);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const std::size_t dims[] = {3, 6, 6, 2};
        auto net = init_siren(dims, 2.0 + seed, seed);
        net.normalize_output = seed % 2 == 1;
        const double c[3] = {0.2, -0.1, 0.4};
        check_da_consistency(
            [&](std::span<const TaylorPoly> x) { return net.forward(x); },
            [&](std::span<const double> x) { return net.forward(x); }, c, 4, rng, 0.05);
    }
}

TEST_CASE("siren first-order coefficients match finite differences") {
    const std::size_t dims[] = {2, 8, 8, 2};
    auto net = init_siren(dims, 30.0, 4);
    const double c[2] = {0.3, -0.2};
    const auto up = net.forward(std::span<const TaylorPoly>(expand_at(c, 2)));
    const double h = 1e-6;
    for (std::size_t j = 0; j < 2; ++j) {
        double a[2] = {c[0], c[1]}, b[2] = {c[0], c[1]};
        a[j] += h;
        b[j] -= h;
        const auto ua = net.forward<double>(a);
        const auto ub = net.forward<double>(b);
        for (std::size_t k = 0; k < 2; ++k) {
            const double fd = (ua[k] - ub[k]) / (2 * h);
            CHECK(std::abs(fd - up[k][1 + j]) <= 1e-6 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST_CASE("hidden siren outputs stay in [-1, 1]") {
    const std::size_t dims[] = {2, 16, 3};
    auto net = init_siren(dims, 30.0, 5);
    net.layers.pop_back();
    net.layers.back().linear = false;
    std::mt19937_64 rng(6);
    for (int s = 0; s < 200; ++s) {
        auto x = testing_support::random_point(2, rng, 10.0);
        SirenNetwork hidden;
        hidden.layers = net.layers;
        for (double y : hidden.forward<double>(x)) {
            CHECK(std::abs(y) <= 1.0);
        }
    }
}

TEST_CASE("normalized output rejects tiny norms") {
    auto net = single_layer(0.0, 30.0);
    net.normalize_output = true;
    const double x[1] = {0.1};
    CHECK_THROWS_AS(net.forward<double>(x), DomainError);
}

TEST_CASE("analytic controller") {
    AnalyticController ctl(2, {1.0, -2.0, 0.5, 3.0}, {0.0, 0.0}, 1.0 / std::sqrt(2.0));
    const double zero[2] = {0.0, 0.0};
    double u[2];
    ctl.apply(zero, u);
    CHECK(u[0] == 0.0);
    CHECK(u[1] == 0.0);
    std::mt19937_64 rng(7);
    for (int s = 0; s < 1000; ++s) {
        auto x = testing_support::random_point(2, rng, 100.0);
        ctl.apply(x, u);
        CHECK(std::hypot(u[0], u[1]) <= 1.0);
    }
    const double c[2] = {0.2, 0.1};
    check_da_consistency(
        [&](std::span<const TaylorPoly> x) {
            std::vector<TaylorPoly> out(2, TaylorPoly(2, 5));
            ctl.apply(x, out);
            return out;
        },
        [&](std::span<const double> x) {
            std::vector<double> out(2);
            ctl.apply(x, out);
            return out;
        },
        c, 5, rng, 0.05);
    CHECK_THROWS_AS(AnalyticController(2, {1.0}, {0.0}, 1.0), DimensionError);
}

TEST_CASE("shipped example weights load and expand consistently") {
    const auto path = std::filesystem::path(DACERT_DATA_DIR) / "example_siren_cw.json";
    REQUIRE(std::filesystem::exists(path));
    auto net = load_siren(path);
    CHECK(net.input_dim() == 4);
    CHECK(net.output_dim() == 2);
    std::mt19937_64 rng(13);
    // inputs are physical: m and m/s; probe steps are 2e-3 in normalised input units
    const double c[4] = {500.0, -500.0, 0.0, 0.0};
    std::vector<double> per_input;
    for (double s : net.input.scale) {
        per_input.push_back(1.0 / s);
    }
    for (int k = 0; k < 4; ++k) {
        check_da_consistency([&](std::span<const TaylorPoly> x) { return net.forward(x); },
                             [&](std::span<const double> x) { return net.forward(x); }, c, 4, rng, 2e-3, per_input);
    }
}

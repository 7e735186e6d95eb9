#include "dacert/scenarios/two_body.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dacert/flow/ode_system.hpp"
#include "dacert/flow/picard.hpp"

namespace dacert::scen {

double solve_kepler(double M, double e) {
    if (!(e >= 0.0 && e < 1.0)) {
        throw DomainError("solve_kepler: eccentricity must lie in [0, 1)");
    }
    constexpr double pi = std::numbers::pi;
    const double turns = std::floor((M + pi) / (2.0 * pi));
    const double m = M - 2.0 * pi * turns; // in [-pi, pi)
    // f(E) = E - e sin E - m is increasing, f(-pi) <= 0 <= f(pi)
    double lo = -pi, hi = pi;
    double E = e < 0.8 ? m : (m < 0.0 ? -pi : pi);
    for (int it = 0; it < 50; ++it) {
        const double f = E - e * std::sin(E) - m;
        // residual at rounding level: further steps only chase noise
        if (std::abs(f) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(m))) {
            return E + 2.0 * pi * turns;
        }
        if (f < 0.0) {
            lo = E;
        } else {
            hi = E;
        }
        const double fp = 1.0 - e * std::cos(E);
        double next = E - f / fp;
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - E) < 1e-13 || hi - lo < 1e-13) {
            return next + 2.0 * pi * turns;
        }
        E = next;
    }
    throw PropagationError("solve_kepler: no convergence after 50 iterations (M = " + std::to_string(M) +
                           ", e = " + std::to_string(e) + ")");
}

std::array<double, 6> kepler_state(const KeplerElements& el, double mu, double t) {
    if (!(el.a > 0.0)) {
        throw DomainError("kepler_state: semi-major axis must be positive");
    }
    const double nm = std::sqrt(mu / (el.a * el.a * el.a));
    const double E = solve_kepler(el.M0 + nm * t, el.e);
    const double cE = std::cos(E), sE = std::sin(E);
    const double b = std::sqrt(1.0 - el.e * el.e);
    // perifocal frame
    const double xp = el.a * (cE - el.e);
    const double yp = el.a * b * sE;
    const double rdot = nm * el.a / (1.0 - el.e * cE);
    const double vxp = -rdot * sE;
    const double vyp = rdot * b * cE;

    const double cO = std::cos(el.raan), sO = std::sin(el.raan);
    const double cw = std::cos(el.argp), sw = std::sin(el.argp);
    const double ci = std::cos(el.i), si = std::sin(el.i);
    const double p11 = cO * cw - sO * sw * ci, p12 = -cO * sw - sO * cw * ci;
    const double p21 = sO * cw + cO * sw * ci, p22 = -sO * sw + cO * cw * ci;
    const double p31 = sw * si, p32 = cw * si;
    return {p11 * xp + p12 * yp,   p21 * xp + p22 * yp,   p31 * xp + p32 * yp,
            p11 * vxp + p12 * vyp, p21 * vxp + p22 * vyp, p31 * vxp + p32 * vyp};
}

namespace {

struct Ballistic : flow::GenericSystem<Ballistic> {
    double mu;
    explicit Ballistic(double m) : mu(m) {}
    std::size_t dimension() const override { return 6; }
    template <class T, class S>
    void eval(const T&, std::span<const S> x, std::span<S> dx) const {
        using da::sqrt;
        using std::sqrt;
        const S r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        const S rinv = 1.0 / sqrt(r2);
        const S g = -mu * (rinv * rinv * rinv);
        for (int i = 0; i < 3; ++i) {
            dx[i] = x[3 + i];
            dx[3 + i] = g * x[i];
        }
    }
};

} // namespace

PlanetEphemeris::PlanetEphemeris(KeplerElements el, double mu, double epoch_offset) : el_(el), mu_(mu) {
    if (!(el.a > 0.0) || !(mu > 0.0)) {
        throw DomainError("PlanetEphemeris: semi-major axis and mu must be positive");
    }
    // keeps the absolute epoch out of the per-call time argument
    const double nm = std::sqrt(mu / (el.a * el.a * el.a));
    el_.M0 = std::remainder(el.M0 + nm * epoch_offset, 2.0 * std::numbers::pi);
}

std::array<double, 6> PlanetEphemeris::state(double t) const { return kepler_state(el_, mu_, t); }

std::vector<da::TaylorPoly> PlanetEphemeris::state(const da::TaylorPoly& t) const {
    const double tc = t.constant_part();
    const auto s = state(tc);
    const unsigned n = t.order();
    Ballistic sys(mu_);
    const auto local = flow::picard_expand(sys, s, tc, n, n);
    const da::TaylorMap dt({t - tc});
    std::vector<da::TaylorPoly> out;
    out.reserve(6);
    for (const auto& c : local.components) {
        out.push_back(da::compose(c, dt));
    }
    return out;
}

} // namespace dacert::scen

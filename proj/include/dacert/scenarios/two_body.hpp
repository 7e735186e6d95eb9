#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "dacert/da/taylor_poly.hpp"
#include "dacert/errors.hpp"

namespace dacert::scen {

struct TwoBodyParams {
    double mu = 1.0;
    double thrust = 0.0;      // force, consistent units
    double v_ex = 1.0;        // exhaust velocity
    double dry_mass = 0.0;    // propagation fails below this
};

// State (r, v, m) in R^7.
template <class S, class U>
void two_body_rhs(std::span<const S> x, std::span<const U> u, const TwoBodyParams& p, std::span<S> dx) {
    using da::sqrt;
    using std::sqrt;
    const S r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    if (!(da::constant_part(r2) > 0.0)) {
        throw PropagationError("two_body_rhs: spacecraft at the central body");
    }
    if (!(da::constant_part(x[6]) > p.dry_mass)) {
        throw PropagationError("two_body_rhs: mass fell to the dry-mass floor");
    }
    const S rinv = 1.0 / sqrt(r2);
    const S g = -p.mu * (rinv * rinv * rinv);
    for (int i = 0; i < 3; ++i) {
        dx[i] = x[3 + i];
        dx[3 + i] = g * x[i];
    }
    if (p.thrust != 0.0) {
        const S acc = p.thrust / x[6];
        for (int i = 0; i < 3; ++i) {
            dx[3 + i] += acc * u[i];
        }
    }
    dx[6] = x[6] * 0.0;
    dx[6] -= p.thrust / p.v_ex;
}

// Classical elements at the element epoch; angles in radians.
struct KeplerElements {
    double a = 1.0;
    double e = 0.0;
    double i = 0.0;
    double raan = 0.0;
    double argp = 0.0;
    double M0 = 0.0;
};

// Eccentric anomaly for M = E - e sin E: safeguarded Newton to 1e-13.
double solve_kepler(double M, double e);

// Position and velocity at time t after the element epoch.
std::array<double, 6> kepler_state(const KeplerElements& el, double mu, double t);

// Keplerian planet whose state can be taken at a polynomial time: the orbit
// is Picard-expanded about the constant part of t.
class PlanetEphemeris {
public:
    PlanetEphemeris(KeplerElements el, double mu, double epoch_offset);

    // t counted from the scenario origin, which sits epoch_offset after
    // the element epoch.
    std::array<double, 6> state(double t) const;
    std::vector<da::TaylorPoly> state(const da::TaylorPoly& t) const;

private:
    KeplerElements el_; // mean anomaly moved to the scenario origin
    double mu_;
};

// (|r - r_p| - r_soi, |v - v_p|)
template <class S>
std::array<S, 2> soi_events(std::span<const S> x, std::span<const S> planet, double r_soi) {
    using da::sqrt;
    using std::sqrt;
    S dr = (x[0] - planet[0]) * (x[0] - planet[0]);
    S dv = (x[3] - planet[3]) * (x[3] - planet[3]);
    for (int i = 1; i < 3; ++i) {
        dr += (x[i] - planet[i]) * (x[i] - planet[i]);
        dv += (x[3 + i] - planet[3 + i]) * (x[3 + i] - planet[3 + i]);
    }
    return {sqrt(dr) - r_soi, sqrt(dv)};
}

} // namespace dacert::scen

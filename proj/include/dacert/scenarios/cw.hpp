#pragma once

#include <cmath>
#include <span>

#include "dacert/da/taylor_poly.hpp"
#include "dacert/errors.hpp"

namespace dacert::scen {

// Planar Clohessy-Wiltshire: x radial, y along-track, target at the origin.
struct CwParams {
    double n = 0.0;   // mean motion
    double a_T = 0.0; // thrust acceleration magnitude
};

// State (x, y, vx, vy), u the thrust direction with |u| <= 1.
template <class S, class U>
void cw_rhs(std::span<const S> x, std::span<const U> u, const CwParams& p, std::span<S> dx) {
    const double ux = da::constant_part(u[0]);
    const double uy = da::constant_part(u[1]);
    if (ux * ux + uy * uy > (1.0 + 1e-9) * (1.0 + 1e-9)) {
        throw DomainError("cw_rhs: control direction exceeds unit norm");
    }
    const double n = p.n;
    dx[0] = x[2];
    dx[1] = x[3];
    dx[2] = 3.0 * n * n * x[0] + 2.0 * n * x[3] + p.a_T * u[0];
    dx[3] = -2.0 * n * x[2] + p.a_T * u[1];
}

// dx^T M dx with M row-major d x d.
template <class S>
S squared_length(std::span<const S> dx, std::span<const double> M) {
    const std::size_t d = dx.size();
    if (M.size() != d * d) {
        throw DimensionError("squared_length: weight matrix does not match the residual");
    }
    S acc = dx[0] * 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double m = M[i * d + j];
            if (m != 0.0) {
                acc += m * (dx[i] * dx[j]);
            }
        }
    }
    return acc;
}

} // namespace dacert::scen

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dacert/da/taylor_poly.hpp"

namespace dacert::da {

// Ordered list of polynomials sharing one space, plus the expansion point
// they were computed about. Rectangular maps are allowed.
struct TaylorMap {
    std::vector<TaylorPoly> components;
    std::vector<double> reference_point;

    TaylorMap() = default;
    explicit TaylorMap(std::vector<TaylorPoly> comps, std::vector<double> ref = {});

    static TaylorMap identity(std::size_t nvars, unsigned order);

    std::size_t size() const noexcept { return components.size(); }
    std::size_t nvars() const;
    unsigned order() const;
    bool is_square() const { return !components.empty() && size() == nvars(); }

    const TaylorPoly& operator[](std::size_t i) const { return components[i]; }
    TaylorPoly& operator[](std::size_t i) { return components[i]; }

    std::vector<double> evaluate(std::span<const double> dx) const;
    std::vector<double> constant_parts() const;
};

// outer o inner. inner must have one component per outer variable, all with
// zero constant part.
TaylorMap compose(const TaylorMap& outer, const TaylorMap& inner);
TaylorPoly compose(const TaylorPoly& outer, const TaylorMap& inner);

struct Inversion {
    TaylorMap map;
    double condition = 0.0; // 1-norm condition estimate of the linear part
};

// Singularity is declared above this condition number.
inline constexpr double max_inversion_condition = 1e12;

// Inverse of a square map with zero constant parts: the linear part is
// inverted by partial-pivot LU and the nonlinear part by fixed-point
// iteration, one order gained per sweep.
Inversion invert_with_condition(const TaylorMap& map);
TaylorMap invert(const TaylorMap& map);

} // namespace dacert::da

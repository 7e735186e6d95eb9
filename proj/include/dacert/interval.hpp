#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dacert/da/taylor_map.hpp"

namespace dacert::ival {

// Closed interval [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    Interval(double lo_, double hi_);
    static Interval point(double x) { return {x, x}; }

    double width() const noexcept { return hi - lo; }
    double midpoint() const noexcept { return 0.5 * (lo + hi); }
    bool contains(double x) const noexcept { return lo <= x && x <= hi; }
    bool contains(const Interval& other) const noexcept { return lo <= other.lo && other.hi <= hi; }

    friend bool operator==(const Interval&, const Interval&) = default;
};

Interval operator+(const Interval& a, const Interval& b);
Interval operator-(const Interval& a, const Interval& b);
Interval operator*(const Interval& a, const Interval& b);

inline Interval iadd(const Interval& a, const Interval& b) { return a + b; }
inline Interval isub(const Interval& a, const Interval& b) { return a - b; }
inline Interval imul(const Interval& a, const Interval& b) { return a * b; }

// Vector of intervals, one per output component.
using IntervalBox = std::vector<Interval>;

// Per-component non-negative truncation remainder estimates.
struct RemainderEstimate {
    std::vector<double> per_component;
};

struct BoundOptions {
    // Each endpoint is pushed outwards by padding * (|c| + sum |a_beta|).
    double padding = 1e-12;
};

// Enclosure of p over the unit box [-1, 1]^m: the constant term plus the sum
// of the single-monomial bounds [-|a_beta|, |a_beta|].
Interval bound_poly(const da::TaylorPoly& p, const BoundOptions& opts = {});

// Component-wise bound_poly widened by [-R_i, R_i].
IntervalBox bound_map(const da::TaylorMap& map, const RemainderEstimate& rem, const BoundOptions& opts = {});
IntervalBox bound_map(std::span<const da::TaylorPoly> components, const RemainderEstimate& rem,
                      const BoundOptions& opts = {});

// Min/max of p over uniform draws from [-1, 1]^m; an inner approximation of
// the true range used to check enclosures.
Interval range_oracle(const da::TaylorPoly& p, std::size_t samples, std::uint64_t seed);

} // namespace dacert::ival

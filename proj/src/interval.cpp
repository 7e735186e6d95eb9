#include "dacert/interval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "dacert/errors.hpp"

namespace dacert::ival {

Interval::Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw DomainError("invalid interval [" + std::to_string(lo_) + ", " + std::to_string(hi_) + "]");
    }
}

Interval operator+(const Interval& a, const Interval& b) { return {a.lo + b.lo, a.hi + b.hi}; }

Interval operator-(const Interval& a, const Interval& b) { return {a.lo - b.hi, a.hi - b.lo}; }

Interval operator*(const Interval& a, const Interval& b) {
    const double p1 = a.lo * b.lo;
    const double p2 = a.lo * b.hi;
    const double p3 = a.hi * b.lo;
    const double p4 = a.hi * b.hi;
    return {std::min({p1, p2, p3, p4}), std::max({p1, p2, p3, p4})};
}

Interval bound_poly(const da::TaylorPoly& p, const BoundOptions& opts) {
    const auto coeffs = p.coefficients();
    const double c = coeffs[0];
    double radius = 0.0;
    for (std::size_t k = 1; k < coeffs.size(); ++k) {
        radius += std::abs(coeffs[k]);
    }
    const double pad = opts.padding * (std::abs(c) + radius);
    return {c - radius - pad, c + radius + pad};
}

IntervalBox bound_map(std::span<const da::TaylorPoly> components, const RemainderEstimate& rem,
                      const BoundOptions& opts) {
    if (rem.per_component.size() != components.size()) {
        throw DimensionError("bound_map: " + std::to_string(rem.per_component.size()) + " remainders for " +
                             std::to_string(components.size()) + " components");
    }
    IntervalBox box;
    box.reserve(components.size());
    for (std::size_t i = 0; i < components.size(); ++i) {
        const double r = rem.per_component[i];
        if (!(r >= 0.0)) {
            throw DomainError("bound_map: remainder estimates must be non-negative");
        }
        const Interval b = bound_poly(components[i], opts);
        box.emplace_back(b.lo - r, b.hi + r);
    }
    return box;
}

IntervalBox bound_map(const da::TaylorMap& map, const RemainderEstimate& rem, const BoundOptions& opts) {
    return bound_map(std::span<const da::TaylorPoly>(map.components), rem, opts);
}

Interval range_oracle(const da::TaylorPoly& p, std::size_t samples, std::uint64_t seed) {
    if (samples == 0) {
        throw DimensionError("range_oracle needs at least one sample");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<double> dx(p.nvars());
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t s = 0; s < samples; ++s) {
        for (auto& x : dx) {
            x = unit(rng);
        }
        const double v = p.evaluate(dx);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {lo, hi};
}

} // namespace dacert::ival

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "dacert/da/taylor_map.hpp"

namespace testing_support {

inline dacert::da::TaylorPoly random_poly(std::size_t m, unsigned n, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    dacert::da::TaylorPoly p(m, n);
    for (auto& c : p.coefficients()) {
        c = u(rng);
    }
    return p;
}

inline std::vector<double> random_point(std::size_t m, std::mt19937_64& rng, double r = 1.0) {
    std::uniform_real_distribution<double> u(-r, r);
    std::vector<double> x(m);
    for (auto& v : x) {
        v = u(rng);
    }
    return x;
}

} // namespace testing_support

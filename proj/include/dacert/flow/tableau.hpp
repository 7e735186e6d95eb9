#pragma once

#include <array>

namespace dacert::flow {

// Prince-Dormand RK8(7)13M embedded pair. Row i of `a` holds the
// coefficients of stage i (only the first i entries are used).
struct Dop87Tableau {
    static constexpr int stages = 13;
    std::array<double, stages> c;
    std::array<std::array<double, stages>, stages> a;
    std::array<double, stages> b8; // propagated solution
    std::array<double, stages> b7; // embedded solution, error estimate only
};

const Dop87Tableau& dop87_tableau();

} // namespace dacert::flow

#include "dacert/flow/ode_system.hpp"

namespace dacert::flow {

void ReversedSystem::rhs(double t, std::span<const double> x, std::span<double> dx) const {
    fwd_.rhs(-t, x, dx);
    for (auto& v : dx) {
        v = -v;
    }
}

void ReversedSystem::rhs(double t, std::span<const da::TaylorPoly> x, std::span<da::TaylorPoly> dx) const {
    fwd_.rhs(-t, x, dx);
    for (auto& v : dx) {
        v *= -1.0;
    }
}

void ReversedSystem::rhs(const da::TaylorPoly& t, std::span<const da::TaylorPoly> x,
                         std::span<da::TaylorPoly> dx) const {
    fwd_.rhs(-t, x, dx);
    for (auto& v : dx) {
        v *= -1.0;
    }
}

} // namespace dacert::flow

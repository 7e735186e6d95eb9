#pragma once

#include <cstddef>
#include <span>

#include "dacert/da/taylor_map.hpp"
#include "dacert/flow/ode_system.hpp"

namespace dacert::flow {

// k Picard sweeps x <- x_bar + int_0^dt f(x, t_bar + tau) dtau, seeded with
// x_bar. The result agrees with the flow to order k in delta t, which is the
// variable `time_var` of the space x_bar lives in. x_bar may itself depend on
// the other variables.
da::TaylorMap picard_expand(const OdeSystem& sys, std::span<const da::TaylorPoly> x_bar, double t_bar,
                            std::size_t time_var, unsigned k);

// Float reference state: expansion in the single variable delta t of the
// given order, k sweeps.
da::TaylorMap picard_expand(const OdeSystem& sys, std::span<const double> x_bar, double t_bar, unsigned order,
                            unsigned k);

} // namespace dacert::flow

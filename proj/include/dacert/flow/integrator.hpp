#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "dacert/da/taylor_poly.hpp"
#include "dacert/flow/ode_system.hpp"

namespace dacert::flow {

enum class ErrorNorm {
    constant_part,    // error of the zero-order coefficients only
    all_coefficients, // max over every coefficient of the error polynomial
};

struct StepControl {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    double h_min = 0.0; // 0: 1e-14 * (tf - t0)
    double h_max = 0.0; // 0: tf - t0
    double safety_factor = 0.9;
    double h_initial = 0.0; // 0: automatic
    ErrorNorm norm = ErrorNorm::constant_part;
    std::size_t max_steps = 1'000'000;
};

struct StepRecord {
    double t = 0.0; // time at the end of the step
    double h = 0.0;
    std::vector<double> state; // zero-order state at t
};

template <class S>
struct Propagation {
    std::vector<S> state;
    double t = 0.0;
    bool stopped = false; // monitor requested the stop before tf
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::vector<StepRecord> log;
};

// Called after each accepted step with (t, h, state); returning false stops
// the integration at that step.
template <class S>
using StepMonitor = std::function<bool(double t, double h, std::span<const S> x)>;

// Embedded 8(7) Dormand-Prince integration of x0 from t0 to tf. With
// polynomial states the result is the Taylor expansion of the flow map.
template <class S>
Propagation<S> propagate(const OdeSystem& sys, std::span<const S> x0, double t0, double tf,
                         const StepControl& ctrl = {}, const StepMonitor<S>& monitor = {},
                         bool keep_log = false);

extern template Propagation<double> propagate(const OdeSystem&, std::span<const double>, double, double,
                                              const StepControl&, const StepMonitor<double>&, bool);
extern template Propagation<da::TaylorPoly> propagate(const OdeSystem&, std::span<const da::TaylorPoly>, double,
                                                      double, const StepControl&,
                                                      const StepMonitor<da::TaylorPoly>&, bool);

// CSV with header t,h,x0,...
void write_step_log(std::ostream& out, std::span<const StepRecord> log);

} // namespace dacert::flow

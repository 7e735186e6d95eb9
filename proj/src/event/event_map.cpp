#include "dacert/event/event_map.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "dacert/errors.hpp"
#include "dacert/flow/picard.hpp"

namespace dacert::event {

double EventFunction::rate(double, std::span<const double>, std::span<const double>) const {
    throw EventError("event function does not provide a rate; minimum tracking is unavailable");
}

da::TaylorPoly EventFunction::rate(const da::TaylorPoly&, std::span<const da::TaylorPoly>,
                                   std::span<const da::TaylorPoly>) const {
    throw EventError("event function does not provide a rate; minimum tracking is unavailable");
}

namespace {

const EventFunction& function_of(const EventSpec& spec) {
    if (!spec.function) {
        throw EventError("event spec has no event function");
    }
    return *spec.function;
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

// Integrates the point state from t by dt, backwards when dt < 0.
std::vector<double> advance(const flow::OdeSystem& sys, std::span<const double> x, double t, double dt,
                            const flow::StepControl& ctrl) {
    if (dt > 0.0) {
        return flow::propagate<double>(sys, x, t, t + dt, ctrl).state;
    }
    const flow::ReversedSystem back(sys);
    return flow::propagate<double>(back, x, -t, -(t + dt), ctrl).state;
}

} // namespace

double condition(const flow::OdeSystem& sys, const EventSpec& spec, double t, std::span<const double> x) {
    const auto& fn = function_of(spec);
    if (spec.mode == Mode::crossing) {
        return fn.value(t, x) - spec.threshold;
    }
    std::vector<double> xdot(x.size());
    sys.rhs(t, x, xdot);
    return fn.rate(t, x, xdot);
}

da::TaylorPoly condition(const flow::OdeSystem& sys, const EventSpec& spec, const da::TaylorPoly& t,
                         std::span<const da::TaylorPoly> x) {
    const auto& fn = function_of(spec);
    if (spec.mode == Mode::crossing) {
        return fn.value(t, x) - spec.threshold;
    }
    std::vector<da::TaylorPoly> xdot(x.begin(), x.end());
    sys.rhs(t, x, xdot);
    return fn.rate(t, x, xdot);
}

std::optional<EventRecord> detect(const flow::OdeSystem& sys, std::span<const double> x0, double t0,
                                  const EventSpec& spec, double t_max, const flow::StepControl& ctrl) {
    const auto& fn = function_of(spec);
    EventRecord best;
    best.t = t0;
    best.x.assign(x0.begin(), x0.end());
    best.value = fn.value(t0, x0);
    bool found = false;
    std::size_t step = 0, best_step = 0;

    flow::StepMonitor<double> monitor;
    if (spec.mode == Mode::minimum) {
        monitor = [&](double t, double h, std::span<const double> x) {
            ++step;
            const double v = fn.value(t, x);
            if (v < best.value) {
                best.t = t;
                best.h = h;
                best.x.assign(x.begin(), x.end());
                best.value = v;
                best_step = step;
            }
            return true;
        };
    } else {
        const int s0 = sign_of(best.value - spec.threshold);
        monitor = [&, s0](double t, double h, std::span<const double> x) {
            if (found) {
                return true;
            }
            const double v = fn.value(t, x);
            const int s = sign_of(v - spec.threshold);
            if (s != 0 && s != s0) {
                best.t = t;
                best.h = h;
                best.x.assign(x.begin(), x.end());
                best.value = v;
                found = true;
                return !spec.terminal;
            }
            return true;
        };
    }
    const auto run = flow::propagate<double>(sys, x0, t0, t_max, ctrl, monitor);
    if (spec.mode == Mode::minimum) {
        const bool interior = best_step != 0 && best_step != step;
        if (!interior) {
            return std::nullopt;
        }
        return best;
    }
    (void)run;
    if (!found) {
        return std::nullopt;
    }
    return best;
}

EventRecord refine(const flow::OdeSystem& sys, EventRecord rec, const EventSpec& spec, const RefineOptions& opts,
                   const flow::StepControl& ctrl) {
    const unsigned n = opts.order;
    bool converged = false;
    double slope = 0.0;
    double last_dt = std::numeric_limits<double>::infinity();
    const double t_detected = rec.t;
    const double reach = 6.0 * std::abs(rec.h);
    for (unsigned it = 0; it < opts.max_iterations; ++it) {
        const auto p = flow::picard_expand(sys, rec.x, rec.t, n, n);
        const auto t = da::TaylorPoly::variable(1, n, 0, rec.t);
        auto c = condition(sys, spec, t, p.components);
        const double c0 = c[0];
        slope = c[1];
        double scale = 0.0;
        for (double a : c.coefficients()) {
            scale += std::abs(a);
        }
        if (!(std::abs(slope) >= 1e-12 * scale) || scale == 0.0) {
            throw EventError("event condition is not invertible in time at t = " + std::to_string(rec.t));
        }
        c[0] = 0.0;
        const auto inv = da::invert(da::TaylorMap({c}));
        const double w[1] = {-c0};
        const double dt[1] = {inv[0].evaluate(w)};
        if (!std::isfinite(dt[0])) {
            throw EventError("event refinement diverged");
        }
        // the truncated series drifts over long corrections; integrate those
        const double tscale = std::max(1.0, std::abs(rec.t));
        const double step = std::abs(dt[0]);
        if (step > opts.series_step * tscale) {
            rec.x = advance(sys, rec.x, rec.t, dt[0], ctrl);
        } else {
            rec.x = p.evaluate(dt);
        }
        rec.t += dt[0];
        if (reach > 0.0 && std::abs(rec.t - t_detected) > reach) {
            throw EventError("event refinement left the detection bracket");
        }
        rec.iterations = it + 1;
        // stagnation below the noise floor also ends the iteration
        if (step <= opts.time_tol * tscale || (step > 0.5 * last_dt && step <= opts.noise_tol * tscale)) {
            converged = true;
            break;
        }
        last_dt = step;
    }
    if (!converged) {
        throw EventError("event refinement did not converge in " + std::to_string(opts.max_iterations) +
                         " iterations");
    }
    rec.refined = true;
    rec.degenerate = spec.mode == Mode::minimum && !(slope > 0.0);
    rec.value = function_of(spec).value(rec.t, rec.x);
    return rec;
}

EventMap build_event_map(const flow::OdeSystem& sys, const InitialBox& box, double t0, const EventSpec& spec,
                         double t_event, unsigned order, const flow::StepControl& ctrl) {
    const std::size_t d = sys.dimension();
    const std::size_t m = box.components.size();
    const std::size_t nv = m + 1;
    if (box.center.size() != d || box.half_width.size() != m || m == 0) {
        throw DimensionError("build_event_map: box does not match the system");
    }
    if (order < 1) {
        throw DimensionError("build_event_map: order must be >= 1");
    }
    if (!(t_event > t0)) {
        throw EventError("build_event_map: event time precedes the initial time");
    }

    std::vector<da::TaylorPoly> x0;
    x0.reserve(d);
    for (std::size_t i = 0; i < d; ++i) {
        x0.emplace_back(nv, order, box.center[i]);
    }
    for (std::size_t j = 0; j < m; ++j) {
        if (box.components[j] >= d) {
            throw DimensionError("build_event_map: box component out of range");
        }
        x0[box.components[j]].add_scaled(box.half_width[j], da::TaylorPoly::variable(nv, order, j));
    }

    const auto prop = flow::propagate<da::TaylorPoly>(sys, x0, t0, t_event, ctrl);
    const auto xe = flow::picard_expand(sys, prop.state, t_event, m, order);

    auto cond = condition(sys, spec, da::TaylorPoly::variable(nv, order, m, t_event), xe.components);
    const double c0 = cond[0];
    cond[0] = 0.0;

    std::vector<da::TaylorPoly> fwd;
    fwd.reserve(nv);
    fwd.push_back(cond);
    for (std::size_t j = 0; j < m; ++j) {
        fwd.push_back(da::TaylorPoly::variable(nv, order, j));
    }
    const auto inv = da::invert_with_condition(da::TaylorMap(std::move(fwd)));

    // delta t as a function of (w, delta); pin w at the event, w = -c0.
    std::vector<double> shift(nv, 0.0);
    shift[0] = -c0;
    const auto dt_w = da::translate(inv.map[m], shift);
    std::vector<da::TaylorPoly> drop_w;
    drop_w.reserve(nv);
    drop_w.emplace_back(nv, order);
    for (std::size_t j = 0; j < m; ++j) {
        drop_w.push_back(da::TaylorPoly::variable(nv, order, j));
    }
    const auto dt = da::compose(dt_w, da::TaylorMap(std::move(drop_w)));

    const double tau0 = dt[0];
    std::vector<double> tshift(nv, 0.0);
    tshift[m] = tau0;
    std::vector<da::TaylorPoly> sub;
    sub.reserve(nv);
    for (std::size_t j = 0; j < m; ++j) {
        sub.push_back(da::TaylorPoly::variable(nv, order, j));
    }
    sub.push_back(dt - tau0);
    const da::TaylorMap onto(std::move(sub));

    std::vector<da::TaylorPoly> state;
    state.reserve(d);
    for (std::size_t i = 0; i < d; ++i) {
        state.push_back(da::compose(da::translate(xe[i], tshift), onto).leading_variables(m));
    }
    return EventMap{da::TaylorMap(std::move(state), std::vector<double>(m, 0.0)),
                    (dt + t_event).leading_variables(m), inv.condition};
}

} // namespace dacert::event

#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "dacert/da/taylor_map.hpp"
#include "dacert/flow/integrator.hpp"
#include "dacert/flow/ode_system.hpp"

namespace dacert::event {

// Scalar event value E(x, t). Minimum tracking additionally needs the rate
// dE/dt along the flow, given x' = xdot.
class EventFunction {
public:
    virtual ~EventFunction() = default;

    virtual double value(double t, std::span<const double> x) const = 0;
    virtual da::TaylorPoly value(const da::TaylorPoly& t, std::span<const da::TaylorPoly> x) const = 0;

    virtual double rate(double t, std::span<const double> x, std::span<const double> xdot) const;
    virtual da::TaylorPoly rate(const da::TaylorPoly& t, std::span<const da::TaylorPoly> x,
                                std::span<const da::TaylorPoly> xdot) const;
};

// Implements value/rate from
//   template <class T, class S> S eval(const T& t, std::span<const S> x) const;
//   template <class T, class S> S eval_rate(const T& t, std::span<const S> x, std::span<const S> xdot) const;
// (eval_rate is only instantiated if the derived class declares has_rate).
template <class Derived>
class GenericEvent : public EventFunction {
public:
    double value(double t, std::span<const double> x) const override { return self().eval(t, x); }
    da::TaylorPoly value(const da::TaylorPoly& t, std::span<const da::TaylorPoly> x) const override {
        return self().eval(t, x);
    }
    double rate(double t, std::span<const double> x, std::span<const double> xdot) const override {
        if constexpr (Derived::has_rate) {
            return self().eval_rate(t, x, xdot);
        } else {
            return EventFunction::rate(t, x, xdot);
        }
    }
    da::TaylorPoly rate(const da::TaylorPoly& t, std::span<const da::TaylorPoly> x,
                        std::span<const da::TaylorPoly> xdot) const override {
        if constexpr (Derived::has_rate) {
            return self().eval_rate(t, x, xdot);
        } else {
            return EventFunction::rate(t, x, xdot);
        }
    }

private:
    const Derived& self() const { return static_cast<const Derived&>(*this); }
};

enum class Mode {
    minimum,  // smallest E along the trajectory, refined on dE/dt = 0
    crossing, // first time E - threshold changes sign
};

struct EventSpec {
    std::shared_ptr<const EventFunction> function;
    Mode mode = Mode::crossing;
    double threshold = 0.0;
    bool terminal = true;
};

struct EventRecord {
    double t = 0.0;
    std::vector<double> x;
    double h = 0.0; // last accepted step before the record
    double value = 0.0;
    bool refined = false;
    bool degenerate = false; // minimum refinement landed on a non-minimum
    unsigned iterations = 0;
};

// Scans an accepted-step trajectory from (x0, t0) to t_max. Returns nothing
// when the event does not occur; a minimum found on the first or last
// sample does not count as an event.
std::optional<EventRecord> detect(const flow::OdeSystem& sys, std::span<const double> x0, double t0,
                                  const EventSpec& spec, double t_max, const flow::StepControl& ctrl = {});

// The scalar whose root defines the event: E - threshold (crossing) or dE/dt
// (minimum).
double condition(const flow::OdeSystem& sys, const EventSpec& spec, double t, std::span<const double> x);
da::TaylorPoly condition(const flow::OdeSystem& sys, const EventSpec& spec, const da::TaylorPoly& t,
                         std::span<const da::TaylorPoly> x);

struct RefineOptions {
    unsigned order = 8;
    unsigned max_iterations = 20;
    double time_tol = 1e-14; // relative to max(1, |t|)
    // a correction that stops shrinking is accepted below this level
    double noise_tol = 1e-10;
    // corrections above this (relative) move the state by integration
    double series_step = 1e-8;
};

// Picard-expands the record in delta t, inverts the 1-D condition
// polynomial and evaluates it at zero; repeats from the new point until the
// correction is below time_tol.
EventRecord refine(const flow::OdeSystem& sys, EventRecord rec, const EventSpec& spec,
                   const RefineOptions& opts = {}, const flow::StepControl& ctrl = {});

struct EventMap {
    da::TaylorMap state;   // x_e*(delta), one component per system state
    da::TaylorPoly time;   // t_e*(delta)
    double condition = 0.0; // of the inverted linear part
};

// Initial-state box: component `components[j]` of x0 is x0 + half_width[j] * delta_j.
struct InitialBox {
    std::vector<double> center; // full state
    std::vector<std::size_t> components;
    std::vector<double> half_width;
};

// DA-propagates the box to t_event, Picard-expands in delta t, inverts
// [condition, delta...] and substitutes condition = 0. The result lives in
// the box variables only.
EventMap build_event_map(const flow::OdeSystem& sys, const InitialBox& box, double t0, const EventSpec& spec,
                         double t_event, unsigned order, const flow::StepControl& ctrl = {});

} // namespace dacert::event

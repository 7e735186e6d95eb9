#pragma once

#include <cstddef>
#include <span>

#include "dacert/da/taylor_poly.hpp"

namespace dacert::flow {

// Closed-loop right-hand side x' = f(x, t) with the controller already
// substituted. Each overload must compute the same function; the polynomial
// forms let the flow be expanded in DA arithmetic.
class OdeSystem {
public:
    virtual ~OdeSystem() = default;

    virtual std::size_t dimension() const = 0;

    virtual void rhs(double t, std::span<const double> x, std::span<double> dx) const = 0;
    virtual void rhs(double t, std::span<const da::TaylorPoly> x, std::span<da::TaylorPoly> dx) const = 0;
    // Time itself is a polynomial during Picard expansion in delta t.
    virtual void rhs(const da::TaylorPoly& t, std::span<const da::TaylorPoly> x,
                     std::span<da::TaylorPoly> dx) const = 0;
};

// Implements every overload from one template
//   template <class T, class S> void eval(const T& t, std::span<const S> x, std::span<S> dx) const;
template <class Derived>
class GenericSystem : public OdeSystem {
public:
    void rhs(double t, std::span<const double> x, std::span<double> dx) const override {
        self().eval(t, x, dx);
    }
    void rhs(double t, std::span<const da::TaylorPoly> x, std::span<da::TaylorPoly> dx) const override {
        self().eval(t, x, dx);
    }
    void rhs(const da::TaylorPoly& t, std::span<const da::TaylorPoly> x,
             std::span<da::TaylorPoly> dx) const override {
        self().eval(t, x, dx);
    }

private:
    const Derived& self() const { return static_cast<const Derived&>(*this); }
};

// Runs the system backwards in time: g(x, s) = -f(x, -s).
class ReversedSystem final : public OdeSystem {
public:
    explicit ReversedSystem(const OdeSystem& fwd) : fwd_(fwd) {}

    std::size_t dimension() const override { return fwd_.dimension(); }
    void rhs(double t, std::span<const double> x, std::span<double> dx) const override;
    void rhs(double t, std::span<const da::TaylorPoly> x, std::span<da::TaylorPoly> dx) const override;
    void rhs(const da::TaylorPoly& t, std::span<const da::TaylorPoly> x,
             std::span<da::TaylorPoly> dx) const override;

private:
    const OdeSystem& fwd_;
};

} // namespace dacert::flow

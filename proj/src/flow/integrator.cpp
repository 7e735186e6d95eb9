#include "dacert/flow/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "dacert/errors.hpp"
#include "dacert/flow/tableau.hpp"

namespace dacert::flow {
namespace {

double max_abs(const da::TaylorPoly& p) {
    double m = 0.0;
    for (double c : p.coefficients()) {
        m = std::max(m, std::abs(c));
    }
    return m;
}

bool all_finite(double x) { return std::isfinite(x); }
bool all_finite(const da::TaylorPoly& p) {
    for (double c : p.coefficients()) {
        if (!std::isfinite(c)) {
            return false;
        }
    }
    return true;
}

double magnitude(double x, ErrorNorm) { return std::abs(x); }
double magnitude(const da::TaylorPoly& p, ErrorNorm norm) {
    return norm == ErrorNorm::constant_part ? std::abs(p.constant_part()) : max_abs(p);
}

// Hairer's starting-step heuristic, on the zero-order state.
double initial_step(const OdeSystem& sys, std::span<const double> x0, double t0, double span,
                    const StepControl& ctrl) {
    const std::size_t d = x0.size();
    std::vector<double> f0(d), f1(d), x1(d);
    sys.rhs(t0, x0, f0);
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double sc = ctrl.abs_tol + ctrl.rel_tol * std::abs(x0[i]);
        d0 += (x0[i] / sc) * (x0[i] / sc);
        d1 += (f0[i] / sc) * (f0[i] / sc);
    }
    d0 = std::sqrt(d0 / d);
    d1 = std::sqrt(d1 / d);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    for (std::size_t i = 0; i < d; ++i) {
        x1[i] = x0[i] + h0 * f0[i];
    }
    sys.rhs(t0 + h0, x1, f1);
    double d2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double sc = ctrl.abs_tol + ctrl.rel_tol * std::abs(x0[i]);
        d2 += ((f1[i] - f0[i]) / sc) * ((f1[i] - f0[i]) / sc);
    }
    d2 = std::sqrt(d2 / d) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6 * span, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / 8.0);
    return std::min({100.0 * h0, h1, span});
}

} // namespace

template <class S>
Propagation<S> propagate(const OdeSystem& sys, std::span<const S> x0, double t0, double tf,
                         const StepControl& ctrl, const StepMonitor<S>& monitor, bool keep_log) {
    const std::size_t d = sys.dimension();
    if (x0.size() != d) {
        throw DimensionError("initial state has " + std::to_string(x0.size()) + " entries, system has " +
                             std::to_string(d));
    }
    if (!(tf > t0)) {
        throw PropagationError("propagate needs tf > t0");
    }
    if (!(ctrl.abs_tol > 0.0) || !(ctrl.rel_tol > 0.0)) {
        throw PropagationError("tolerances must be positive");
    }
    const auto& tab = dop87_tableau();
    const double span = tf - t0;
    const double h_min = ctrl.h_min > 0.0 ? ctrl.h_min : 1e-14 * span;
    const double h_max = ctrl.h_max > 0.0 ? std::min(ctrl.h_max, span) : span;
    if (h_min > h_max) {
        throw PropagationError("h_min exceeds h_max");
    }

    Propagation<S> out;
    out.state.assign(x0.begin(), x0.end());
    out.t = t0;
    auto& x = out.state;

    std::vector<double> xc(d);
    for (std::size_t i = 0; i < d; ++i) {
        xc[i] = da::constant_part(x[i]);
    }
    double h = ctrl.h_initial > 0.0 ? ctrl.h_initial : initial_step(sys, xc, t0, span, ctrl);
    h = std::clamp(h, h_min, h_max);

    std::vector<std::vector<S>> k(Dop87Tableau::stages, std::vector<S>(x.begin(), x.end()));
    std::vector<S> y(x.begin(), x.end());
    std::vector<S> x_new(x.begin(), x.end());
    std::vector<S> err(x.begin(), x.end());

    if (keep_log) {
        out.log.push_back({t0, 0.0, xc});
    }

    double t = t0;
    bool last_rejected = false;
    std::size_t steps = 0;
    while (t < tf) {
        if (++steps > ctrl.max_steps) {
            throw PropagationError("step budget exhausted at t = " + std::to_string(t));
        }
        const bool final_step = t + h >= tf;
        const double hs = final_step ? tf - t : h;

        sys.rhs(t, std::span<const S>(x), std::span<S>(k[0]));
        for (int s = 1; s < Dop87Tableau::stages; ++s) {
            for (std::size_t i = 0; i < d; ++i) {
                y[i] = x[i];
                for (int j = 0; j < s; ++j) {
                    if (tab.a[s][j] != 0.0) {
                        da::add_scaled(y[i], hs * tab.a[s][j], k[j][i]);
                    }
                }
            }
            sys.rhs(t + tab.c[s] * hs, std::span<const S>(y), std::span<S>(k[s]));
        }

        double err_norm = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < d; ++i) {
            x_new[i] = x[i];
            err[i] = x[i];
            err[i] *= 0.0;
            for (int j = 0; j < Dop87Tableau::stages; ++j) {
                if (tab.b8[j] != 0.0) {
                    da::add_scaled(x_new[i], hs * tab.b8[j], k[j][i]);
                }
                const double db = tab.b8[j] - tab.b7[j];
                if (db != 0.0) {
                    da::add_scaled(err[i], hs * db, k[j][i]);
                }
            }
            finite = finite && all_finite(x_new[i]);
            const double sc =
                ctrl.abs_tol + ctrl.rel_tol * std::max(magnitude(x[i], ctrl.norm), magnitude(x_new[i], ctrl.norm));
            err_norm = std::max(err_norm, magnitude(err[i], ctrl.norm) / sc);
        }
        if (!finite || !std::isfinite(err_norm)) {
            if (hs <= h_min) {
                throw PropagationError("non-finite state at t = " + std::to_string(t));
            }
            h = std::max(h_min, 0.2 * hs);
            ++out.rejected;
            last_rejected = true;
            continue;
        }

        double factor = err_norm == 0.0 ? 5.0 : ctrl.safety_factor * std::pow(err_norm, -1.0 / 8.0);
        factor = std::clamp(factor, 0.2, 5.0);

        if (err_norm <= 1.0) {
            t = final_step ? tf : t + hs;
            std::swap(x, x_new);
            ++out.accepted;
            if (last_rejected) {
                factor = std::min(factor, 1.0);
            }
            last_rejected = false;
            if (!final_step) {
                h = std::min(hs * factor, h_max);
            }
            if (keep_log) {
                for (std::size_t i = 0; i < d; ++i) {
                    xc[i] = da::constant_part(x[i]);
                }
                out.log.push_back({t, hs, xc});
            }
            if (monitor && !monitor(t, hs, std::span<const S>(x))) {
                out.stopped = t < tf;
                break;
            }
        } else {
            ++out.rejected;
            last_rejected = true;
            h = hs * factor;
            if (h < h_min) {
                throw PropagationError("step size underflow (h = " + std::to_string(h) + ") at t = " +
                                       std::to_string(t));
            }
        }
    }
    out.t = t;
    return out;
}

template Propagation<double> propagate(const OdeSystem&, std::span<const double>, double, double,
                                       const StepControl&, const StepMonitor<double>&, bool);
template Propagation<da::TaylorPoly> propagate(const OdeSystem&, std::span<const da::TaylorPoly>, double, double,
                                               const StepControl&, const StepMonitor<da::TaylorPoly>&, bool);

void write_step_log(std::ostream& out, std::span<const StepRecord> log) {
    out << "t,h";
    const std::size_t d = log.empty() ? 0 : log.front().state.size();
    for (std::size_t i = 0; i < d; ++i) {
        out << ",x" << i;
    }
    out << '\n';
    const auto old = out.precision(17);
    for (const auto& r : log) {
        out << r.t << ',' << r.h;
        for (double v : r.state) {
            out << ',' << v;
        }
        out << '\n';
    }
    out.precision(old);
}

} // namespace dacert::flow

#include <cmath>
#include <vector>

#include "dacert/da/taylor_poly.hpp"
#include "dacert/errors.hpp"

namespace dacert::da {

namespace {

// sum_k series[k] * (p - c)^k, Horner form.
TaylorPoly compose_series(const TaylorPoly& p, const std::vector<double>& series) {
    const TaylorPoly h = p.nonconstant_part();
    TaylorPoly r(p.layout_ptr(), series.back());
    for (std::size_t k = series.size() - 1; k-- > 0;) {
        r = r * h;
        r += series[k];
    }
    return r;
}

} // namespace

TaylorPoly sin(const TaylorPoly& p) {
    const double c = p.constant_part();
    const double s0 = std::sin(c);
    const double c0 = std::cos(c);
    const double cycle[4] = {s0, c0, -s0, -c0};
    std::vector<double> series(p.order() + 1);
    double fact = 1.0;
    for (unsigned k = 0; k <= p.order(); ++k) {
        if (k > 0) {
            fact *= k;
        }
        series[k] = cycle[k % 4] / fact;
    }
    return compose_series(p, series);
}

TaylorPoly cos(const TaylorPoly& p) {
    const double c = p.constant_part();
    const double s0 = std::sin(c);
    const double c0 = std::cos(c);
    const double cycle[4] = {c0, -s0, -c0, s0};
    std::vector<double> series(p.order() + 1);
    double fact = 1.0;
    for (unsigned k = 0; k <= p.order(); ++k) {
        if (k > 0) {
            fact *= k;
        }
        series[k] = cycle[k % 4] / fact;
    }
    return compose_series(p, series);
}

TaylorPoly exp(const TaylorPoly& p) {
    std::vector<double> series(p.order() + 1);
    series[0] = std::exp(p.constant_part());
    for (unsigned k = 1; k <= p.order(); ++k) {
        series[k] = series[k - 1] / k;
    }
    return compose_series(p, series);
}

TaylorPoly log(const TaylorPoly& p) {
    const double c = p.constant_part();
    if (!(c > 0.0)) {
        throw DomainError("log: constant part must be positive");
    }
    std::vector<double> series(p.order() + 1);
    series[0] = std::log(c);
    double pw = 1.0;
    for (unsigned k = 1; k <= p.order(); ++k) {
        pw /= c;
        series[k] = ((k % 2 == 1) ? pw : -pw) / k;
    }
    return compose_series(p, series);
}

TaylorPoly sqrt(const TaylorPoly& p) {
    const double c = p.constant_part();
    if (!(c > 0.0)) {
        throw DomainError("sqrt: constant part must be positive");
    }
    std::vector<double> series(p.order() + 1);
    series[0] = std::sqrt(c);
    for (unsigned k = 1; k <= p.order(); ++k) {
        // binom(1/2, k) / c^k, built recursively
        series[k] = series[k - 1] * (0.5 - (k - 1.0)) / (k * c);
    }
    return compose_series(p, series);
}

TaylorPoly reciprocal(const TaylorPoly& p) {
    const double c = p.constant_part();
    if (c == 0.0) {
        throw DomainError("reciprocal: constant part is zero");
    }
    std::vector<double> series(p.order() + 1);
    series[0] = 1.0 / c;
    for (unsigned k = 1; k <= p.order(); ++k) {
        series[k] = -series[k - 1] / c;
    }
    return compose_series(p, series);
}

TaylorPoly tanh(const TaylorPoly& p) {
    // Evaluated through exp with the argument sign chosen so exp never
    // overflows.
    if (p.constant_part() >= 0.0) {
        const TaylorPoly t = exp(-2.0 * p);
        return 2.0 * reciprocal(1.0 + t) - 1.0;
    }
    const TaylorPoly t = exp(2.0 * p);
    return 1.0 - 2.0 * reciprocal(1.0 + t);
}

TaylorPoly pow(const TaylorPoly& p, int exponent) {
    if (exponent < 0) {
        return reciprocal(pow(p, -exponent));
    }
    TaylorPoly result(p.layout_ptr(), 1.0);
    TaylorPoly base = p;
    unsigned e = static_cast<unsigned>(exponent);
    while (e != 0) {
        if (e & 1u) {
            result = result * base;
        }
        e >>= 1;
        if (e != 0) {
            base = base * base;
        }
    }
    return result;
}

TaylorPoly pow(const TaylorPoly& p, double exponent) {
    if (std::trunc(exponent) == exponent && std::abs(exponent) < 1e9) {
        return pow(p, static_cast<int>(exponent));
    }
    if (!(p.constant_part() > 0.0)) {
        throw DomainError("pow: non-integer exponent needs a positive constant part");
    }
    return exp(exponent * log(p));
}

} // namespace dacert::da

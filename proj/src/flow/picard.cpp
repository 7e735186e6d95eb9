#include "dacert/flow/picard.hpp"

#include <cmath>
#include <vector>

#include "dacert/errors.hpp"

namespace dacert::flow {

da::TaylorMap picard_expand(const OdeSystem& sys, std::span<const da::TaylorPoly> x_bar, double t_bar,
                            std::size_t time_var, unsigned k) {
    const std::size_t d = sys.dimension();
    if (x_bar.size() != d) {
        throw DimensionError("picard_expand: state dimension mismatch");
    }
    if (d == 0) {
        return {};
    }
    const auto& proto = x_bar.front();
    if (time_var >= proto.nvars()) {
        throw DimensionError("picard_expand: time variable out of range");
    }
    const auto t = da::TaylorPoly::variable(proto.nvars(), proto.order(), time_var, t_bar);
    std::vector<da::TaylorPoly> x(x_bar.begin(), x_bar.end());
    std::vector<da::TaylorPoly> f(x_bar.begin(), x_bar.end());
    for (unsigned it = 0; it < k; ++it) {
        sys.rhs(t, std::span<const da::TaylorPoly>(x), std::span<da::TaylorPoly>(f));
        for (std::size_t i = 0; i < d; ++i) {
            x[i] = x_bar[i] + f[i].antiderivative(time_var);
            for (double c : x[i].coefficients()) {
                if (!std::isfinite(c)) {
                    throw PropagationError("picard_expand: non-finite coefficient");
                }
            }
        }
    }
    return da::TaylorMap(std::move(x), {t_bar});
}

da::TaylorMap picard_expand(const OdeSystem& sys, std::span<const double> x_bar, double t_bar, unsigned order,
                            unsigned k) {
    std::vector<da::TaylorPoly> xp;
    xp.reserve(x_bar.size());
    for (double v : x_bar) {
        xp.emplace_back(1, order, v);
    }
    return picard_expand(sys, xp, t_bar, 0, k);
}

} // namespace dacert::flow

#include "dacert/da/taylor_map.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>

#include "dacert/errors.hpp"
#include "substitute.hpp"

namespace dacert::da {

TaylorMap::TaylorMap(std::vector<TaylorPoly> comps, std::vector<double> ref)
    : components(std::move(comps)), reference_point(std::move(ref)) {
    for (const auto& c : components) {
        if (!c.same_space(components.front())) {
            throw DimensionError("map components must share variable count and order");
        }
    }
}

TaylorMap TaylorMap::identity(std::size_t nvars, unsigned order) {
    std::vector<TaylorPoly> comps;
    comps.reserve(nvars);
    for (std::size_t i = 0; i < nvars; ++i) {
        comps.push_back(TaylorPoly::variable(nvars, order, i));
    }
    return TaylorMap(std::move(comps), std::vector<double>(nvars, 0.0));
}

std::size_t TaylorMap::nvars() const {
    if (components.empty()) {
        throw DimensionError("empty map has no variable space");
    }
    return components.front().nvars();
}

unsigned TaylorMap::order() const {
    if (components.empty()) {
        throw DimensionError("empty map has no order");
    }
    return components.front().order();
}

std::vector<double> TaylorMap::evaluate(std::span<const double> dx) const {
    std::vector<double> out;
    out.reserve(size());
    for (const auto& c : components) {
        out.push_back(c.evaluate(dx));
    }
    return out;
}

std::vector<double> TaylorMap::constant_parts() const {
    std::vector<double> out;
    out.reserve(size());
    for (const auto& c : components) {
        out.push_back(c.constant_part());
    }
    return out;
}

namespace {

void require_zero_constants(const TaylorMap& inner, const char* what) {
    for (std::size_t i = 0; i < inner.size(); ++i) {
        if (inner[i].constant_part() != 0.0) {
            throw DimensionError(std::string(what) + ": component " + std::to_string(i) +
                                 " has a non-zero constant part");
        }
    }
}

} // namespace

TaylorPoly compose(const TaylorPoly& outer, const TaylorMap& inner) {
    require_zero_constants(inner, "compose");
    return detail::substitute(outer, inner.components);
}

TaylorMap compose(const TaylorMap& outer, const TaylorMap& inner) {
    if (inner.size() != outer.nvars()) {
        throw DimensionError("compose: inner map has " + std::to_string(inner.size()) +
                             " components but outer map has " + std::to_string(outer.nvars()) + " variables");
    }
    require_zero_constants(inner, "compose");
    std::vector<TaylorPoly> comps;
    comps.reserve(outer.size());
    for (const auto& c : outer.components) {
        comps.push_back(detail::substitute(c, inner.components));
    }
    return TaylorMap(std::move(comps), inner.reference_point);
}

Inversion invert_with_condition(const TaylorMap& map) {
    if (!map.is_square()) {
        throw DimensionError("invert: map must be square");
    }
    require_zero_constants(map, "invert");
    const std::size_t m = map.size();
    const unsigned n = map.order();

    Eigen::MatrixXd linear(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            linear(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = map[i][1 + j];
        }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(linear);
    const Eigen::MatrixXd inv = lu.inverse();
    const double norm = linear.cwiseAbs().colwise().sum().maxCoeff();
    const double inv_norm = inv.cwiseAbs().colwise().sum().maxCoeff();
    double condition = norm * inv_norm;
    if (!std::isfinite(condition) || norm == 0.0) {
        condition = std::numeric_limits<double>::infinity();
    }
    if (condition > max_inversion_condition) {
        throw SingularMapError("invert: linear part is singular (condition estimate " +
                                   std::to_string(condition) + ")",
                               condition);
    }

    // Nonlinear part of the forward map.
    TaylorMap nonlinear = map;
    for (auto& c : nonlinear.components) {
        for (std::size_t k = 1; k <= m; ++k) {
            c[k] = 0.0;
        }
    }
    const TaylorMap id = TaylorMap::identity(m, n);

    auto apply_inverse_linear = [&](const std::vector<TaylorPoly>& rhs) {
        std::vector<TaylorPoly> out;
        out.reserve(m);
        for (std::size_t i = 0; i < m; ++i) {
            TaylorPoly acc(rhs[0].layout_ptr());
            for (std::size_t j = 0; j < m; ++j) {
                const double a = inv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                if (a != 0.0) {
                    acc += rhs[j] * a;
                }
            }
            out.push_back(std::move(acc));
        }
        return out;
    };

    TaylorMap x(apply_inverse_linear(id.components));
    for (unsigned sweep = 1; sweep < n; ++sweep) {
        std::vector<TaylorPoly> rhs;
        rhs.reserve(m);
        const TaylorMap nx = compose(nonlinear, x);
        for (std::size_t i = 0; i < m; ++i) {
            rhs.push_back(id[i] - nx[i]);
        }
        x = TaylorMap(apply_inverse_linear(rhs));
    }
    x.reference_point = map.constant_parts();
    return {std::move(x), condition};
}

TaylorMap invert(const TaylorMap& map) { return invert_with_condition(map).map; }

} // namespace dacert::da

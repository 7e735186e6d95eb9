#include "dacert/da/taylor_poly.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "dacert/errors.hpp"
#include "substitute.hpp"

namespace dacert::da {

unsigned MultiIndex::total() const {
    unsigned t = 0;
    for (auto e : exps_) {
        t += e;
    }
    return t;
}

TaylorPoly::TaylorPoly(std::size_t nvars, unsigned order, double constant)
    : TaylorPoly(MonomialLayout::get(nvars, order), constant) {}

TaylorPoly::TaylorPoly(std::shared_ptr<const MonomialLayout> layout, double constant)
    : layout_(std::move(layout)), coeffs_(layout_->size(), 0.0) {
    coeffs_[0] = constant;
}

TaylorPoly TaylorPoly::variable(std::size_t nvars, unsigned order, std::size_t i, double center) {
    if (i >= nvars) {
        throw DimensionError("variable index " + std::to_string(i) + " out of range for " +
                             std::to_string(nvars) + " variables");
    }
    if (order == 0) {
        throw DimensionError("a DA variable needs truncation order >= 1");
    }
    TaylorPoly p(nvars, order, center);
    // Degree-one monomials are laid out as e_0, e_1, ... in graded-lex order.
    p.coeffs_[1 + i] = 1.0;
    return p;
}

void TaylorPoly::require_same_space(const TaylorPoly& other, const char* op) const {
    if (!same_space(other)) {
        throw DimensionError(std::string(op) + ": operands live in different spaces (" +
                             std::to_string(nvars()) + " vars/order " + std::to_string(order()) + " vs " +
                             std::to_string(other.nvars()) + " vars/order " + std::to_string(other.order()) +
                             ")");
    }
}

double TaylorPoly::coefficient(const MultiIndex& beta) const {
    const auto k = layout_->index_of(beta.exponents());
    return k == MonomialLayout::npos ? 0.0 : coeffs_[k];
}

void TaylorPoly::set_coefficient(const MultiIndex& beta, double value) {
    const auto k = layout_->index_of(beta.exponents());
    if (k == MonomialLayout::npos) {
        throw DimensionError("multi-index exceeds the truncation order");
    }
    coeffs_[k] = value;
}

TaylorPoly TaylorPoly::nonconstant_part() const {
    TaylorPoly r = *this;
    r.coeffs_[0] = 0.0;
    return r;
}

bool TaylorPoly::is_zero() const noexcept {
    for (double c : coeffs_) {
        if (c != 0.0) {
            return false;
        }
    }
    return true;
}

double TaylorPoly::evaluate(std::span<const double> dx) const {
    if (dx.size() != nvars()) {
        throw DimensionError("evaluation point has wrong dimension");
    }
    const auto& lay = *layout_;
    std::vector<double> mono(lay.size());
    mono[0] = 1.0;
    double sum = coeffs_[0];
    for (std::size_t k = 1; k < lay.size(); ++k) {
        mono[k] = mono[lay.parent(k)] * dx[lay.parent_var(k)];
        sum += coeffs_[k] * mono[k];
    }
    return sum;
}

TaylorPoly TaylorPoly::derivative(std::size_t var) const {
    if (var >= nvars()) {
        throw DimensionError("derivative variable out of range");
    }
    const auto& lay = *layout_;
    TaylorPoly r(layout_);
    r.coeffs_[0] = 0.0;
    for (std::size_t k = 0; k < lay.size(); ++k) {
        const auto up = lay.raise(k, var);
        if (up != MonomialLayout::npos) {
            r.coeffs_[k] = coeffs_[up] * static_cast<double>(lay.exponents(up)[var]);
        }
    }
    return r;
}

TaylorPoly TaylorPoly::antiderivative(std::size_t var) const {
    if (var >= nvars()) {
        throw DimensionError("antiderivative variable out of range");
    }
    const auto& lay = *layout_;
    TaylorPoly r(layout_);
    for (std::size_t k = 0; k < lay.size(); ++k) {
        const auto up = lay.raise(k, var);
        if (up != MonomialLayout::npos) {
            r.coeffs_[up] = coeffs_[k] / static_cast<double>(lay.exponents(up)[var]);
        }
    }
    return r;
}

TaylorPoly TaylorPoly::leading_variables(std::size_t nvars_kept) const {
    if (nvars_kept == 0 || nvars_kept > nvars()) {
        throw DimensionError("cannot keep " + std::to_string(nvars_kept) + " of " + std::to_string(nvars()) +
                             " variables");
    }
    TaylorPoly r(nvars_kept, order());
    const auto& lay = *layout_;
    std::vector<unsigned> e(nvars_kept);
    for (std::size_t k = 0; k < lay.size(); ++k) {
        if (coeffs_[k] == 0.0) {
            continue;
        }
        auto ek = lay.exponents(k);
        bool inside = true;
        for (std::size_t v = nvars_kept; v < ek.size(); ++v) {
            inside = inside && ek[v] == 0;
        }
        if (!inside) {
            continue;
        }
        for (std::size_t v = 0; v < nvars_kept; ++v) {
            e[v] = ek[v];
        }
        r.coeffs_[r.layout_->index_of(e)] = coeffs_[k];
    }
    return r;
}

TaylorPoly TaylorPoly::with_variables(std::size_t nvars_total) const {
    if (nvars_total < nvars()) {
        throw DimensionError("embedding space is smaller than the source space");
    }
    TaylorPoly r(nvars_total, order());
    const auto& lay = *layout_;
    std::vector<unsigned> e(nvars_total, 0);
    for (std::size_t k = 0; k < lay.size(); ++k) {
        auto ek = lay.exponents(k);
        for (std::size_t v = 0; v < ek.size(); ++v) {
            e[v] = ek[v];
        }
        r.coeffs_[r.layout_->index_of(e)] = coeffs_[k];
    }
    return r;
}

TaylorPoly& TaylorPoly::operator=(double c) {
    std::fill(coeffs_.begin(), coeffs_.end(), 0.0);
    coeffs_[0] = c;
    return *this;
}

TaylorPoly& TaylorPoly::add_scaled(double a, const TaylorPoly& x) {
    require_same_space(x, "add_scaled");
    for (std::size_t k = 0; k < coeffs_.size(); ++k) {
        coeffs_[k] += a * x.coeffs_[k];
    }
    return *this;
}

TaylorPoly& TaylorPoly::operator+=(const TaylorPoly& rhs) {
    require_same_space(rhs, "add");
    for (std::size_t k = 0; k < coeffs_.size(); ++k) {
        coeffs_[k] += rhs.coeffs_[k];
    }
    return *this;
}

TaylorPoly& TaylorPoly::operator-=(const TaylorPoly& rhs) {
    require_same_space(rhs, "subtract");
    for (std::size_t k = 0; k < coeffs_.size(); ++k) {
        coeffs_[k] -= rhs.coeffs_[k];
    }
    return *this;
}

TaylorPoly& TaylorPoly::operator*=(double rhs) {
    for (double& c : coeffs_) {
        c *= rhs;
    }
    return *this;
}

TaylorPoly& TaylorPoly::operator*=(const TaylorPoly& rhs) {
    *this = *this * rhs;
    return *this;
}

TaylorPoly& TaylorPoly::operator/=(const TaylorPoly& rhs) {
    *this = *this * reciprocal(rhs);
    return *this;
}

TaylorPoly TaylorPoly::operator-() const {
    TaylorPoly r = *this;
    for (double& c : r.coeffs_) {
        c = -c;
    }
    return r;
}

TaylorPoly operator*(const TaylorPoly& a, const TaylorPoly& b) {
    a.require_same_space(b, "multiply");
    const auto& table = a.layout_->products();
    TaylorPoly r(a.layout_);
    double* out = r.coeffs_.data();
    const double* bc = b.coeffs_.data();
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
        const double ai = a.coeffs_[i];
        if (ai == 0.0) {
            continue;
        }
        const auto end = table.row_begin[i + 1];
        for (auto p = table.row_begin[i]; p < end; ++p) {
            out[table.target[p]] += ai * bc[table.right[p]];
        }
    }
    for (double& c : r.coeffs_) {
        if (std::abs(c) < TaylorPoly::flush_threshold) {
            c = 0.0;
        }
    }
    return r;
}

TaylorPoly operator/(double a, const TaylorPoly& b) { return a * reciprocal(b); }

TaylorPoly translate(const TaylorPoly& p, std::span<const double> offset) {
    if (offset.size() != p.nvars()) {
        throw DimensionError("translate: offset has wrong dimension");
    }
    std::vector<TaylorPoly> inner;
    inner.reserve(p.nvars());
    for (std::size_t i = 0; i < p.nvars(); ++i) {
        inner.push_back(TaylorPoly::variable(p.nvars(), p.order(), i, offset[i]));
    }
    return detail::substitute(p, inner);
}

TaylorPoly recenter(const TaylorPoly& p, std::span<const double> offset, std::span<const double> scale) {
    if (offset.size() != p.nvars() || scale.size() != p.nvars()) {
        throw DimensionError("recenter: offset/scale have wrong dimension");
    }
    std::vector<TaylorPoly> inner;
    inner.reserve(p.nvars());
    for (std::size_t i = 0; i < p.nvars(); ++i) {
        if (std::abs(offset[i]) + std::abs(scale[i]) > 1.0 + 1e-15) {
            throw DimensionError("recenter: child box exceeds the parent box in variable " + std::to_string(i));
        }
        TaylorPoly v = TaylorPoly::variable(p.nvars(), p.order(), i, 0.0) * scale[i];
        v += offset[i];
        inner.push_back(std::move(v));
    }
    return detail::substitute(p, inner);
}

std::string to_text(const TaylorPoly& p) {
    std::string out;
    const auto& lay = p.layout();
    char buf[64];
    for (std::size_t k = 0; k < lay.size(); ++k) {
        if (p[k] == 0.0) {
            continue;
        }
        for (auto e : lay.exponents(k)) {
            out += std::to_string(e);
            out += ' ';
        }
        auto res = std::to_chars(buf, buf + sizeof(buf), p[k]);
        out.append(buf, res.ptr);
        out += '\n';
    }
    return out;
}

TaylorPoly from_text(std::string_view text, std::size_t nvars, unsigned order) {
    TaylorPoly p(nvars, order);
    std::istringstream in{std::string(text)};
    std::string line;
    std::vector<unsigned> e(nvars);
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::istringstream ls(line);
        for (auto& x : e) {
            if (!(ls >> x)) {
                throw DimensionError("malformed polynomial line: " + line);
            }
        }
        std::string coeff;
        ls >> coeff;
        double value = 0.0;
        auto res = std::from_chars(coeff.data(), coeff.data() + coeff.size(), value);
        if (res.ec != std::errc{}) {
            throw DimensionError("malformed coefficient: " + line);
        }
        p.set_coefficient(MultiIndex(e), value);
    }
    return p;
}

} // namespace dacert::da

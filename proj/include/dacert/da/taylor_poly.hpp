#pragma once

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dacert/da/layout.hpp"

namespace dacert::da {

// Exponent tuple beta = (beta_1, ..., beta_m).
class MultiIndex {
public:
    MultiIndex() = default;
    MultiIndex(std::initializer_list<unsigned> exps) : exps_(exps) {}
    explicit MultiIndex(std::vector<unsigned> exps) : exps_(std::move(exps)) {}

    std::size_t size() const noexcept { return exps_.size(); }
    unsigned operator[](std::size_t i) const { return exps_[i]; }
    unsigned total() const;
    std::span<const unsigned> exponents() const noexcept { return exps_; }

    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

private:
    std::vector<unsigned> exps_;
};

// Truncated multivariate Taylor polynomial in `nvars` variables up to total
// degree `order`. Coefficients are stored densely in the graded-lex order of
// MonomialLayout; the zero-order coefficient is the expansion-point value.
class TaylorPoly {
public:
    // Coefficients below this magnitude are flushed to zero after products.
    static constexpr double flush_threshold = 1e-300;

    TaylorPoly(std::size_t nvars, unsigned order, double constant = 0.0);
    explicit TaylorPoly(std::shared_ptr<const MonomialLayout> layout, double constant = 0.0);

    // center + delta_i
    static TaylorPoly variable(std::size_t nvars, unsigned order, std::size_t i, double center = 0.0);

    std::size_t nvars() const noexcept { return layout_->nvars(); }
    unsigned order() const noexcept { return layout_->order(); }
    const MonomialLayout& layout() const noexcept { return *layout_; }
    const std::shared_ptr<const MonomialLayout>& layout_ptr() const noexcept { return layout_; }
    bool same_space(const TaylorPoly& other) const noexcept { return layout_ == other.layout_; }

    std::span<const double> coefficients() const noexcept { return coeffs_; }
    std::span<double> coefficients() noexcept { return coeffs_; }
    double operator[](std::size_t flat) const { return coeffs_[flat]; }
    double& operator[](std::size_t flat) { return coeffs_[flat]; }

    double coefficient(const MultiIndex& beta) const;
    void set_coefficient(const MultiIndex& beta, double value);

    double constant_part() const noexcept { return coeffs_[0]; }
    TaylorPoly nonconstant_part() const;
    bool is_zero() const noexcept;

    // Pointwise value at displacement dx.
    double evaluate(std::span<const double> dx) const;

    TaylorPoly derivative(std::size_t var) const;
    // Term-wise integral in delta_var with zero constant of integration;
    // terms pushed above the order are dropped.
    TaylorPoly antiderivative(std::size_t var) const;

    // Keeps only the terms that do not involve variables >= nvars_kept and
    // re-expresses them in a space of nvars_kept variables.
    TaylorPoly leading_variables(std::size_t nvars_kept) const;
    // Embeds into a space with more trailing variables.
    TaylorPoly with_variables(std::size_t nvars_total) const;

    // Becomes the constant c in the same space.
    TaylorPoly& operator=(double c);

    // this += a * x
    TaylorPoly& add_scaled(double a, const TaylorPoly& x);

    TaylorPoly& operator+=(const TaylorPoly& rhs);
    TaylorPoly& operator-=(const TaylorPoly& rhs);
    TaylorPoly& operator*=(const TaylorPoly& rhs);
    TaylorPoly& operator/=(const TaylorPoly& rhs);
    TaylorPoly& operator+=(double rhs) { coeffs_[0] += rhs; return *this; }
    TaylorPoly& operator-=(double rhs) { coeffs_[0] -= rhs; return *this; }
    TaylorPoly& operator*=(double rhs);
    TaylorPoly& operator/=(double rhs) { return *this *= 1.0 / rhs; }

    TaylorPoly operator-() const;

    friend TaylorPoly operator+(TaylorPoly a, const TaylorPoly& b) { return a += b; }
    friend TaylorPoly operator-(TaylorPoly a, const TaylorPoly& b) { return a -= b; }
    friend TaylorPoly operator*(const TaylorPoly& a, const TaylorPoly& b);
    friend TaylorPoly operator/(TaylorPoly a, const TaylorPoly& b) { return a /= b; }
    friend TaylorPoly operator+(TaylorPoly a, double b) { return a += b; }
    friend TaylorPoly operator+(double a, TaylorPoly b) { return b += a; }
    friend TaylorPoly operator-(TaylorPoly a, double b) { return a -= b; }
    friend TaylorPoly operator-(double a, const TaylorPoly& b) { return -b + a; }
    friend TaylorPoly operator*(TaylorPoly a, double b) { return a *= b; }
    friend TaylorPoly operator*(double a, TaylorPoly b) { return b *= a; }
    friend TaylorPoly operator/(TaylorPoly a, double b) { return a /= b; }
    friend TaylorPoly operator/(double a, const TaylorPoly& b);

private:
    void require_same_space(const TaylorPoly& other, const char* op) const;

    std::shared_ptr<const MonomialLayout> layout_;
    std::vector<double> coeffs_;
};

inline double constant_part(double x) noexcept { return x; }
inline double constant_part(const TaylorPoly& p) noexcept { return p.constant_part(); }

// Intrinsics: compose the univariate Taylor series of the function about the
// constant part c with the non-constant part of the argument.
TaylorPoly sin(const TaylorPoly& p);
TaylorPoly cos(const TaylorPoly& p);
TaylorPoly exp(const TaylorPoly& p);
TaylorPoly log(const TaylorPoly& p);      // requires c > 0
TaylorPoly sqrt(const TaylorPoly& p);     // requires c > 0
TaylorPoly reciprocal(const TaylorPoly& p); // requires c != 0
TaylorPoly tanh(const TaylorPoly& p);
TaylorPoly pow(const TaylorPoly& p, int exponent);
TaylorPoly pow(const TaylorPoly& p, double exponent);

inline double reciprocal(double x) { return 1.0 / x; }

inline void add_scaled(double& y, double a, double x) { y += a * x; }
inline void add_scaled(TaylorPoly& y, double a, const TaylorPoly& x) { y.add_scaled(a, x); }

// p(delta + offset): exact affine shift, total degree is preserved.
TaylorPoly translate(const TaylorPoly& p, std::span<const double> offset);
// p(offset + scale * delta'): re-expresses p on a child box of the unit box.
// Requires |offset_i| + |scale_i| <= 1.
TaylorPoly recenter(const TaylorPoly& p, std::span<const double> offset, std::span<const double> scale);

// Debug text form: one line "beta_1 ... beta_m coefficient" per non-zero
// coefficient, graded-lex order, coefficients printed round-trip exact.
std::string to_text(const TaylorPoly& p);
TaylorPoly from_text(std::string_view text, std::size_t nvars, unsigned order);

} // namespace dacert::da

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

namespace dacert::da {

// Enumeration of all monomials in `nvars` variables with total degree
// <= `order`, in graded-lexicographic order: ascending total degree, and
// within one degree, descending exponent of the first variable, then the
// second, and so on. Layouts are immutable and shared between all
// polynomials of the same (nvars, order).
class MonomialLayout {
public:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
    static constexpr std::size_t max_vars = 8;
    static constexpr unsigned max_order = 40;

    static std::shared_ptr<const MonomialLayout> get(std::size_t nvars, unsigned order);

    std::size_t nvars() const noexcept { return nvars_; }
    unsigned order() const noexcept { return order_; }
    std::size_t size() const noexcept { return degree_.size(); }

    std::span<const std::uint8_t> exponents(std::size_t k) const {
        return {exponents_.data() + k * nvars_, nvars_};
    }
    unsigned degree(std::size_t k) const { return degree_[k]; }

    // First flat index of the monomials of total degree d (d may be order+1,
    // which yields size()).
    std::size_t degree_begin(unsigned d) const { return degree_begin_[d]; }

    std::size_t index_of(std::span<const unsigned> exps) const;

    // Index of x^{e_k + e_var}, or npos when that exceeds the order.
    std::size_t raise(std::size_t k, std::size_t var) const { return raise_[k * nvars_ + var]; }

    // For k > 0: x^{e_k} = x^{e_parent(k)} * x_{parent_var(k)}.
    std::size_t parent(std::size_t k) const { return parent_[k]; }
    std::size_t parent_var(std::size_t k) const { return parent_var_[k]; }

    // Truncated product table: for every left index i, the pairs (j, k)
    // with x^{e_i} x^{e_j} = x^{e_k} and degree(k) <= order.
    struct ProductTable {
        std::vector<std::size_t> row_begin;
        std::vector<std::uint32_t> right;
        std::vector<std::uint32_t> target;
    };
    const ProductTable& products() const;

    MonomialLayout(std::size_t nvars, unsigned order);

private:
    std::uint64_t key(std::span<const std::uint8_t> exps) const;

    std::size_t nvars_;
    unsigned order_;
    std::vector<std::uint8_t> exponents_;
    std::vector<unsigned> degree_;
    std::vector<std::size_t> degree_begin_;
    std::vector<std::size_t> raise_;
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> parent_var_;
    std::vector<std::pair<std::uint64_t, std::size_t>> sorted_keys_;

    mutable std::once_flag products_once_;
    mutable ProductTable products_;
};

} // namespace dacert::da

#include "dacert/da/layout.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "dacert/errors.hpp"

namespace dacert::da {

namespace {

// Appends all exponent vectors of `nvars` entries summing to `degree`, first
// variable descending.
void enumerate_degree(std::size_t nvars, unsigned degree, std::vector<std::uint8_t>& prefix,
                      std::vector<std::uint8_t>& out) {
    if (prefix.size() + 1 == nvars) {
        prefix.push_back(static_cast<std::uint8_t>(degree));
        out.insert(out.end(), prefix.begin(), prefix.end());
        prefix.pop_back();
        return;
    }
    for (int e = static_cast<int>(degree); e >= 0; --e) {
        prefix.push_back(static_cast<std::uint8_t>(e));
        enumerate_degree(nvars, degree - static_cast<unsigned>(e), prefix, out);
        prefix.pop_back();
    }
}

} // namespace

std::shared_ptr<const MonomialLayout> MonomialLayout::get(std::size_t nvars, unsigned order) {
    if (nvars == 0 || nvars > max_vars) {
        throw DimensionError("variable count must be in [1, " + std::to_string(max_vars) +
                             "], got " + std::to_string(nvars));
    }
    if (order > max_order) {
        throw DimensionError("truncation order above " + std::to_string(max_order));
    }
    static std::mutex mutex;
    static std::map<std::pair<std::size_t, unsigned>, std::shared_ptr<const MonomialLayout>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{nvars, order}];
    if (!slot) {
        slot = std::make_shared<const MonomialLayout>(nvars, order);
    }
    return slot;
}

MonomialLayout::MonomialLayout(std::size_t nvars, unsigned order) : nvars_(nvars), order_(order) {
    std::vector<std::uint8_t> prefix;
    degree_begin_.reserve(order + 2);
    for (unsigned d = 0; d <= order; ++d) {
        degree_begin_.push_back(exponents_.size() / nvars);
        enumerate_degree(nvars, d, prefix, exponents_);
    }
    const std::size_t count = exponents_.size() / nvars;
    degree_begin_.push_back(count);

    degree_.resize(count);
    for (unsigned d = 0; d <= order; ++d) {
        for (std::size_t k = degree_begin_[d]; k < degree_begin_[d + 1]; ++k) {
            degree_[k] = d;
        }
    }

    sorted_keys_.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        sorted_keys_.emplace_back(key(exponents(k)), k);
    }
    std::sort(sorted_keys_.begin(), sorted_keys_.end());

    raise_.assign(count * nvars, npos);
    parent_.assign(count, npos);
    parent_var_.assign(count, npos);
    std::vector<unsigned> work(nvars);
    for (std::size_t k = 0; k < count; ++k) {
        auto e = exponents(k);
        std::copy(e.begin(), e.end(), work.begin());
        if (degree_[k] < order) {
            for (std::size_t v = 0; v < nvars; ++v) {
                ++work[v];
                raise_[k * nvars + v] = index_of(work);
                --work[v];
            }
        }
        if (k > 0) {
            const auto v = static_cast<std::size_t>(
                std::find_if(e.begin(), e.end(), [](std::uint8_t x) { return x != 0; }) - e.begin());
            --work[v];
            parent_[k] = index_of(work);
            parent_var_[k] = v;
        }
    }
}

std::uint64_t MonomialLayout::key(std::span<const std::uint8_t> exps) const {
    std::uint64_t k = 0;
    for (std::size_t v = 0; v < exps.size(); ++v) {
        k |= static_cast<std::uint64_t>(exps[v]) << (8 * v);
    }
    return k;
}

std::size_t MonomialLayout::index_of(std::span<const unsigned> exps) const {
    if (exps.size() != nvars_) {
        throw DimensionError("multi-index length does not match variable count");
    }
    unsigned total = 0;
    std::uint64_t k = 0;
    for (std::size_t v = 0; v < nvars_; ++v) {
        total += exps[v];
        if (total > order_) {
            return npos;
        }
        k |= static_cast<std::uint64_t>(exps[v]) << (8 * v);
    }
    auto it = std::lower_bound(sorted_keys_.begin(), sorted_keys_.end(), std::make_pair(k, std::size_t{0}));
    return (it != sorted_keys_.end() && it->first == k) ? it->second : npos;
}

const MonomialLayout::ProductTable& MonomialLayout::products() const {
    std::call_once(products_once_, [this] {
        const std::size_t count = size();
        products_.row_begin.reserve(count + 1);
        std::vector<unsigned> work(nvars_);
        for (std::size_t i = 0; i < count; ++i) {
            products_.row_begin.push_back(products_.right.size());
            const std::size_t j_end = degree_begin_[order_ - degree_[i] + 1];
            auto ei = exponents(i);
            for (std::size_t j = 0; j < j_end; ++j) {
                auto ej = exponents(j);
                for (std::size_t v = 0; v < nvars_; ++v) {
                    work[v] = static_cast<unsigned>(ei[v]) + ej[v];
                }
                products_.right.push_back(static_cast<std::uint32_t>(j));
                products_.target.push_back(static_cast<std::uint32_t>(index_of(work)));
            }
        }
        products_.row_begin.push_back(products_.right.size());
    });
    return products_;
}

} // namespace dacert::da

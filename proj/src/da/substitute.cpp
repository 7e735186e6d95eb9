#include "substitute.hpp"

#include "dacert/errors.hpp"

namespace dacert::da::detail {

TaylorPoly substitute(const TaylorPoly& outer, std::span<const TaylorPoly> inner) {
    if (inner.size() != outer.nvars()) {
        throw DimensionError("composition: inner map has " + std::to_string(inner.size()) +
                             " components, outer has " + std::to_string(outer.nvars()) + " variables");
    }
    for (const auto& q : inner) {
        if (!q.same_space(inner[0])) {
            throw DimensionError("composition: inner components live in different spaces");
        }
        if (q.order() != outer.order()) {
            throw DimensionError("composition: inner and outer truncation orders differ");
        }
    }
    const auto& lay = outer.layout();
    TaylorPoly result(inner[0].layout_ptr(), outer[0]);
    std::vector<TaylorPoly> mono;
    mono.reserve(lay.size());
    mono.emplace_back(inner[0].layout_ptr(), 1.0);
    for (std::size_t k = 1; k < lay.size(); ++k) {
        mono.push_back(mono[lay.parent(k)] * inner[lay.parent_var(k)]);
        if (outer[k] != 0.0) {
            result += mono.back() * outer[k];
        }
    }
    return result;
}

} // namespace dacert::da::detail

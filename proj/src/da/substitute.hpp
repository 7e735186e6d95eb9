#pragma once

#include <span>

#include "dacert/da/taylor_poly.hpp"

namespace dacert::da::detail {

// outer(inner_0, ..., inner_{m-1}) evaluated monomial by monomial in the
// inner space. Exact to the truncation order when the inner polynomials
// have zero constant parts or are affine.
TaylorPoly substitute(const TaylorPoly& outer, std::span<const TaylorPoly> inner);

} // namespace dacert::da::detail

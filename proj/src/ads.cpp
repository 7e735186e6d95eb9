#include "dacert/ads.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

#include "dacert/errors.hpp"

#ifdef DACERT_HAVE_OPENMP
#include <omp.h>
#endif

namespace dacert::ads {

OrderSizes order_sizes(const da::TaylorPoly& p) {
    OrderSizes s;
    s.S.assign(p.order() + 1, 0.0);
    const auto& lay = p.layout();
    for (std::size_t k = 0; k < lay.size(); ++k) {
        s.S[lay.degree(k)] += std::abs(p[k]);
    }
    return s;
}

double fit_and_extrapolate(OrderSizes& sizes, unsigned n) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < sizes.S.size(); ++i) {
        if (sizes.S[i] > 0.0) {
            const double x = static_cast<double>(i);
            const double y = std::log(sizes.S[i]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++count;
        }
    }
    if (count < 2) {
        sizes.A = sizes.B = sizes.extrapolated = 0.0;
        sizes.degenerate = true;
        return 0.0;
    }
    const double c = static_cast<double>(count);
    const double b = (c * sxy - sx * sy) / (c * sxx - sx * sx);
    const double ln_a = (sy - b * sx) / c;
    sizes.A = std::exp(ln_a);
    sizes.B = b;
    sizes.degenerate = false;
    sizes.extrapolated = std::exp(ln_a + b * static_cast<double>(n + 1));
    return sizes.extrapolated;
}

double fit_and_extrapolate(std::vector<double> sizes, unsigned n) {
    OrderSizes s;
    s.S = std::move(sizes);
    return fit_and_extrapolate(s, n);
}

MapError map_error(const da::TaylorMap& map, unsigned n) {
    MapError e;
    for (const auto& c : map.components) {
        auto s = order_sizes(c);
        e.per_component.push_back(fit_and_extrapolate(s, n));
        e.max = std::max(e.max, e.per_component.back());
    }
    return e;
}

SplitChoice split_direction(const da::TaylorMap& map, unsigned n) {
    SplitChoice choice;
    if (map.components.empty()) {
        choice.degenerate = true;
        return choice;
    }
    const std::size_t m = map.nvars();
    const auto& lay = map.components.front().layout();
    choice.per_variable.assign(m, 0.0);
    std::vector<double> sizes(lay.order() + 1);
    for (const auto& c : map.components) {
        for (std::size_t j = 0; j < m; ++j) {
            std::fill(sizes.begin(), sizes.end(), 0.0);
            for (std::size_t k = 0; k < lay.size(); ++k) {
                sizes[lay.exponents(k)[j]] += std::abs(c[k]);
            }
            choice.per_variable[j] = std::max(choice.per_variable[j], fit_and_extrapolate(sizes, n));
        }
    }
    double best = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        if (choice.per_variable[j] > best) {
            best = choice.per_variable[j];
            choice.variable = j;
        }
    }
    choice.degenerate = best == 0.0;
    return choice;
}

double Domain::volume() const {
    double v = 1.0;
    for (double h : half_width) {
        v *= 2.0 * h;
    }
    return v;
}

std::pair<Domain, Domain> split(const Domain& dom, std::size_t j) {
    if (j >= dom.center.size() || dom.half_width.size() != dom.center.size()) {
        throw DimensionError("split: variable " + std::to_string(j) + " out of range");
    }
    Domain lo = dom, hi = dom;
    const double h = 0.5 * dom.half_width[j];
    lo.half_width[j] = hi.half_width[j] = h;
    lo.center[j] -= h;
    hi.center[j] += h;
    lo.lineage.push_back({j, -1});
    hi.lineage.push_back({j, +1});
    return {std::move(lo), std::move(hi)};
}

bool lineage_less(const Domain& a, const Domain& b) {
    const auto& x = a.lineage;
    const auto& y = b.lineage;
    return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end(),
                                        [](const SplitStep& p, const SplitStep& q) {
                                            if (p.side != q.side) {
                                                return p.side < q.side;
                                            }
                                            return p.variable < q.variable;
                                        });
}

const char* to_string(Status s) {
    switch (s) {
    case Status::ok:
        return "ok";
    case Status::no_event:
        return "no-event";
    case Status::failed:
        return "failed";
    }
    return "failed";
}

namespace {

Expansion guarded(const Expander& expand, const Domain& dom) {
    try {
        return expand(dom);
    } catch (const std::exception& e) {
        Expansion x;
        x.status = Status::failed;
        x.message = e.what();
        return x;
    }
}

struct Visit {
    Subdomain node;
    bool finalize = true;
    std::size_t direction = 0;
};

Visit assess(Domain dom, Expansion x, const AdsConfig& cfg) {
    Visit v{{std::move(dom), std::move(x), {}, false}};
    auto& node = v.node;
    if (node.expansion.status != Status::ok) {
        return v;
    }
    node.error = map_error(node.expansion.error_map, cfg.order);
    if (node.error.max <= cfg.e_tol) {
        return v;
    }
    if (node.domain.lineage.size() >= cfg.n_max) {
        node.at_split_limit = true;
        return v;
    }
    v.finalize = false;
    v.direction = split_direction(node.expansion.error_map, cfg.order).variable;
    return v;
}

void sort_leaves(std::vector<Subdomain>& leaves) {
    std::sort(leaves.begin(), leaves.end(),
              [](const Subdomain& a, const Subdomain& b) { return lineage_less(a.domain, b.domain); });
}

} // namespace

std::vector<Subdomain> run_serial(const Domain& root, const AdsConfig& cfg, const Expander& expand) {
    std::vector<Subdomain> leaves;
    std::vector<Domain> stack{root};
    while (!stack.empty()) {
        Domain dom = std::move(stack.back());
        stack.pop_back();
        auto x = guarded(expand, dom);
        auto v = assess(std::move(dom), std::move(x), cfg);
        if (v.finalize) {
            leaves.push_back(std::move(v.node));
            continue;
        }
        auto [lo, hi] = split(v.node.domain, v.direction);
        stack.push_back(std::move(hi));
        stack.push_back(std::move(lo));
    }
    sort_leaves(leaves);
    return leaves;
}

std::vector<Subdomain> run_parallel(const Domain& root, const AdsConfig& cfg, const Expander& expand,
                                    int workers) {
#ifdef DACERT_HAVE_OPENMP
    const int threads = workers > 0 ? workers : omp_get_max_threads();
#else
    (void)workers;
#endif
    std::vector<Subdomain> leaves;
    std::vector<Domain> frontier{root};
    while (!frontier.empty()) {
        const auto count = static_cast<std::ptrdiff_t>(frontier.size());
        std::vector<Visit> visits(frontier.size());
#ifdef DACERT_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
#endif
        for (std::ptrdiff_t i = 0; i < count; ++i) {
            auto x = guarded(expand, frontier[i]);
            visits[i] = assess(frontier[i], std::move(x), cfg);
        }
        std::vector<Domain> next;
        for (auto& v : visits) {
            if (v.finalize) {
                leaves.push_back(std::move(v.node));
            } else {
                auto [lo, hi] = split(v.node.domain, v.direction);
                next.push_back(std::move(lo));
                next.push_back(std::move(hi));
            }
        }
        frontier = std::move(next);
    }
    sort_leaves(leaves);
    return leaves;
}

std::vector<Subdomain> run(const Domain& root, const AdsConfig& cfg, const Expander& expand, int workers) {
    if (workers == 1) {
        return run_serial(root, cfg, expand);
    }
    return run_parallel(root, cfg, expand, workers);
}

} // namespace dacert::ads

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dacert/da/taylor_map.hpp"

namespace dacert::ads {

// L1 sizes of the coefficients of each order, S_0 ... S_n, and the
// exponential fit E(i) = A exp(B i) through the non-zero ones.
struct OrderSizes {
    std::vector<double> S;
    double A = 0.0;
    double B = 0.0;
    double extrapolated = 0.0; // E(n + 1)
    bool degenerate = false;   // fewer than two non-zero sizes
};

OrderSizes order_sizes(const da::TaylorPoly& p);
// Fits sizes.S and returns E(n + 1); fewer than two non-zero entries give 0.
double fit_and_extrapolate(OrderSizes& sizes, unsigned n);
double fit_and_extrapolate(std::vector<double> sizes, unsigned n);

struct MapError {
    std::vector<double> per_component;
    double max = 0.0;
};

MapError map_error(const da::TaylorMap& map, unsigned n);

struct SplitChoice {
    std::size_t variable = 0;
    bool degenerate = false;
    std::vector<double> per_variable; // max over components of the extrapolated size
};

// Sizes are grouped by the exponent of each variable in turn; the variable
// with the largest extrapolated contribution wins, ties to the lowest index.
SplitChoice split_direction(const da::TaylorMap& map, unsigned n);

struct SplitStep {
    std::size_t variable = 0;
    int side = -1; // -1 lower half, +1 upper half

    friend bool operator==(const SplitStep&, const SplitStep&) = default;
};

struct Domain {
    std::vector<double> center;
    std::vector<double> half_width;
    std::vector<SplitStep> lineage;

    double volume() const; // of the box, in physical units
};

std::pair<Domain, Domain> split(const Domain& dom, std::size_t j);

// Depth-first, lower child first.
bool lineage_less(const Domain& a, const Domain& b);

struct AdsConfig {
    unsigned order = 4;
    double e_tol = 1e-4;
    unsigned n_max = 15;
};

enum class Status { ok, no_event, failed };

const char* to_string(Status s);

// Scenario-specific results attached to an expansion.
struct ExpansionData {
    virtual ~ExpansionData() = default;
};

struct Expansion {
    Status status = Status::failed;
    std::string message;
    // Dimensionless components whose truncation error drives splitting.
    da::TaylorMap error_map;
    std::shared_ptr<const ExpansionData> data;
};

// Builds the event map of one box from its own center.
using Expander = std::function<Expansion(const Domain&)>;

struct Subdomain {
    Domain domain;
    Expansion expansion;
    MapError error;
    bool at_split_limit = false;
};

// Work-queue splitting of the root box. Leaves come back in lineage order,
// so the result does not depend on the traversal.
std::vector<Subdomain> run_serial(const Domain& root, const AdsConfig& cfg, const Expander& expand);
// Same tree, expanded level by level with OpenMP workers.
std::vector<Subdomain> run_parallel(const Domain& root, const AdsConfig& cfg, const Expander& expand,
                                    int workers = 0);
std::vector<Subdomain> run(const Domain& root, const AdsConfig& cfg, const Expander& expand, int workers = 1);

} // namespace dacert::ads

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "dacert/ads.hpp"
#include "dacert/event/event_map.hpp"
#include "dacert/interval.hpp"
#include "dacert/scenarios/scenario.hpp"

namespace dacert::pipeline {

inline constexpr int schema_version = 1;

// Attached to every successful expansion.
struct SubdomainData : ads::ExpansionData {
    event::EventMap map;
    std::vector<da::TaylorPoly> outputs; // physical, over the unit box
    da::TaylorPoly metric;
    double t_event = 0.0; // refined nominal event time, internal
    unsigned refine_iterations = 0;

    SubdomainData(event::EventMap m, std::vector<da::TaylorPoly> out, da::TaylorPoly met)
        : map(std::move(m)), outputs(std::move(out)), metric(std::move(met)) {}
};

// detect -> refine -> event map about the box centre. Failures come back as
// a status, never as an exception.
ads::Expansion expand(const scen::Scenario& sc, const ads::Domain& dom, unsigned order);

enum class Verdict { safe, unsafe, indeterminate };
const char* to_string(Verdict v);
Verdict parse_verdict(const std::string& s);

Verdict verdict_for(ads::Status status, const ival::Interval& metric_bound, double threshold);

struct SubdomainResult {
    ads::Domain domain;
    ads::Status status = ads::Status::failed;
    std::string message;
    std::vector<double> error_per_component; // scaled x_e*, extrapolated
    double error = 0.0;
    bool at_split_limit = false;
    // outputs
    ival::IntervalBox bounds; // polynomial bound widened by the remainder
    std::vector<double> remainder;
    ival::Interval metric_bound;
    double metric_remainder = 0.0;
    double condition = 0.0;
    double t_event = 0.0; // seconds, nominal
    unsigned refine_iterations = 0;
    Verdict verdict = Verdict::indeterminate;
};

struct VolumeFractions {
    double safe = 0.0;
    double unsafe = 0.0;
    double indeterminate = 0.0;
};

struct SafetyMap {
    nlohmann::json config;
    std::string fingerprint;
    std::uint64_t seed = 0;
    std::string scenario;
    std::vector<std::string> output_names;
    std::string metric_name;
    double threshold = 0.0;
    ads::Domain root;
    std::vector<SubdomainResult> subdomains;
    VolumeFractions fractions;
    double max_metric_bound = 0.0; // over ok subdomains
    std::size_t indeterminate_count = 0;
};

// 64-bit FNV-1a, as 16 hex digits.
std::string fingerprint(const std::string& text);

SubdomainResult assess(const scen::Scenario& sc, const ads::Subdomain& sub);
SafetyMap verify(const scen::Scenario& sc, int workers = 1, std::uint64_t seed = 0);

nlohmann::json to_json(const SafetyMap& map);
SafetyMap from_json(const nlohmann::json& doc);
std::string dump(const SafetyMap& map);
SafetyMap read_map(const std::filesystem::path& path);

// One pointwise evaluation of a domain point (physical coordinates).
struct PointResult {
    bool event = false;
    std::vector<double> outputs;
    double metric = 0.0;
    std::string message; // why no event was produced
};

PointResult evaluate_point(const scen::Scenario& sc, std::span<const double> point, unsigned refine_order);

struct McOptions {
    std::size_t samples = 1000; // per ok subdomain
    std::uint64_t seed = 0;
    bool zero_remainder = false; // check against the bare polynomial bounds
    int workers = 0;             // 0: OpenMP default
};

struct McSubdomainReport {
    std::size_t index = 0;
    std::size_t samples = 0;
    std::size_t output_violations = 0;
    std::size_t metric_violations = 0;
    std::size_t missed_events = 0;
    // min over samples and components of distance to the nearest bound,
    // relative to the bound width; negative means outside
    double worst_margin = 0.0;
};

struct McReport {
    std::size_t samples = 0;
    std::size_t violations = 0; // samples with any violation or missed event
    std::vector<McSubdomainReport> subdomains;
};

McReport mc_check(const scen::Scenario& sc, const SafetyMap& map, const McOptions& opts);
McReport mc_check_serial(const scen::Scenario& sc, const SafetyMap& map, const McOptions& opts);
nlohmann::json to_json(const McReport& report);

// Flattened per-subdomain rows for external plotting.
void write_plot_csv(std::ostream& out, const SafetyMap& map);

} // namespace dacert::pipeline

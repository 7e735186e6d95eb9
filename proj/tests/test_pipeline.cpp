#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dacert/errors.hpp"
#include "dacert/pipeline.hpp"

using namespace dacert;
using nlohmann::json;

namespace {

json load_config(const char* name) {
    std::ifstream in(std::string(DACERT_CONFIG_DIR) + "/" + name);
    REQUIRE(in);
    return json::parse(in);
}

// A small CW problem that still splits a few times.
json small_cw() {
    auto cfg = load_config("cw_analytic.json");
    cfg["root_domain"]["half_width"] = {15.0, 40.0};
    cfg["ads"]["order"] = 3;
    cfg["ads"]["e_tol"] = 1e-5;
    cfg["ads"]["n_max"] = 4;
    return cfg;
}

std::unique_ptr<scen::Scenario> make(const json& cfg) { return scen::make_scenario(cfg, DACERT_CONFIG_DIR); }

const pipeline::SafetyMap& small_map() {
    static const auto sc = make(small_cw());
    static const auto map = pipeline::verify(*sc, 1, 7);
    return map;
}

} // namespace

TEST_CASE("verdict rule") {
    using pipeline::Verdict;
    CHECK(pipeline::verdict_for(ads::Status::ok, {0.0, 1.0}, 1.0) == Verdict::safe);
    CHECK(pipeline::verdict_for(ads::Status::ok, {0.0, 1.0 + 1e-12}, 1.0) == Verdict::unsafe);
    CHECK(pipeline::verdict_for(ads::Status::no_event, {0.0, 0.5}, 1.0) == Verdict::indeterminate);
    CHECK(pipeline::verdict_for(ads::Status::failed, {0.0, 0.5}, 1.0) == Verdict::indeterminate);
    for (auto v : {Verdict::safe, Verdict::unsafe, Verdict::indeterminate}) {
        CHECK(pipeline::parse_verdict(pipeline::to_string(v)) == v);
    }
    CHECK_THROWS(pipeline::parse_verdict("maybe"));
}

TEST_CASE("fingerprint is FNV-1a 64") {
    CHECK(pipeline::fingerprint("") == "cbf29ce484222325");
    CHECK(pipeline::fingerprint("a") == "af63dc4c8601ec8c");
    CHECK(pipeline::fingerprint("foobar") == "85944171f73967e8");
}

TEST_CASE("infinite tolerance keeps the root as the only subdomain") {
    auto cfg = small_cw();
    cfg["ads"]["e_tol"] = "inf";
    const auto sc = make(cfg);
    const auto map = pipeline::verify(*sc);
    REQUIRE(map.subdomains.size() == 1);
    const auto& r = map.subdomains[0];
    CHECK(r.domain.lineage.empty());
    CHECK(r.status == ads::Status::ok);
    CHECK(r.domain.center == map.root.center);
    CHECK(r.t_event > 0.0);
    CHECK(r.t_event < 14400.0);
}

TEST_CASE("infinite threshold makes every expanded subdomain safe") {
    auto cfg = small_cw();
    cfg["threshold"] = "inf";
    const auto sc = make(cfg);
    const auto map = pipeline::verify(*sc);
    for (const auto& r : map.subdomains) {
        CHECK(r.status == ads::Status::ok);
        CHECK(r.verdict == pipeline::Verdict::safe);
    }
    CHECK(map.fractions.safe == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("safety map partitions the root and meets the tolerance") {
    const auto& map = small_map();
    const auto sc = make(small_cw());
    REQUIRE(map.subdomains.size() > 1);
    double vol = 0.0;
    for (const auto& r : map.subdomains) {
        vol += r.domain.volume();
        if (r.status == ads::Status::ok) {
            CHECK((r.error <= sc->ads().e_tol || r.at_split_limit));
        }
        CHECK(r.domain.lineage.size() <= sc->ads().n_max);
    }
    CHECK(vol == doctest::Approx(map.root.volume()).epsilon(1e-12));
    // interiors are disjoint
    for (std::size_t a = 0; a < map.subdomains.size(); ++a) {
        for (std::size_t b = a + 1; b < map.subdomains.size(); ++b) {
            const auto& A = map.subdomains[a].domain;
            const auto& B = map.subdomains[b].domain;
            bool apart = false;
            for (std::size_t j = 0; j < A.center.size(); ++j) {
                const double gap = std::abs(A.center[j] - B.center[j]) - A.half_width[j] - B.half_width[j];
                apart = apart || gap > -1e-9;
            }
            CHECK(apart);
        }
    }
    // leaves are in lineage order
    for (std::size_t i = 1; i < map.subdomains.size(); ++i) {
        CHECK(ads::lineage_less(map.subdomains[i - 1].domain, map.subdomains[i].domain));
    }
}

TEST_CASE("aggregates and verdicts can be recomputed from the subdomains") {
    const auto& map = small_map();
    double safe = 0.0, unsafe = 0.0, indet = 0.0, worst = -INFINITY;
    std::size_t n_indet = 0;
    for (const auto& r : map.subdomains) {
        CHECK(r.verdict == pipeline::verdict_for(r.status, r.metric_bound, map.threshold));
        const double f = r.domain.volume() / map.root.volume();
        if (r.verdict == pipeline::Verdict::safe) {
            safe += f;
        } else if (r.verdict == pipeline::Verdict::unsafe) {
            unsafe += f;
        } else {
            indet += f;
            ++n_indet;
        }
        if (r.status == ads::Status::ok) {
            worst = std::max(worst, r.metric_bound.hi);
            // bounds include the remainder
            for (std::size_t i = 0; i < r.bounds.size(); ++i) {
                CHECK(r.remainder[i] >= 0.0);
                CHECK(r.bounds[i].hi - r.bounds[i].lo >= 2.0 * r.remainder[i]);
            }
        }
    }
    CHECK(map.fractions.safe == doctest::Approx(safe));
    CHECK(map.fractions.unsafe == doctest::Approx(unsafe));
    CHECK(map.fractions.indeterminate == doctest::Approx(indet));
    CHECK(safe + unsafe + indet == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(map.indeterminate_count == n_indet);
    CHECK(map.max_metric_bound == worst);
}

TEST_CASE("the centre evaluation sits inside the subdomain bounds") {
    const auto& map = small_map();
    const auto sc = make(small_cw());
    for (const auto& r : map.subdomains) {
        if (r.status != ads::Status::ok) {
            continue;
        }
        const auto p = pipeline::evaluate_point(*sc, r.domain.center, 8);
        REQUIRE(p.event);
        for (std::size_t i = 0; i < r.bounds.size(); ++i) {
            CHECK(r.bounds[i].contains(p.outputs[i]));
        }
        CHECK(r.metric_bound.contains(p.metric));
        CHECK(p.outputs.back() == doctest::Approx(r.t_event).epsilon(1e-9));
    }
}

TEST_CASE("point evaluation does not depend on the refinement order") {
    const auto sc = make(load_config("cw_analytic.json"));
    const std::vector<double> p{492.5, -480.0};
    const auto ref = pipeline::evaluate_point(*sc, p, 12);
    REQUIRE(ref.event);
    for (unsigned order : {2u, 3u, 5u, 8u}) {
        const auto q = pipeline::evaluate_point(*sc, p, order);
        REQUIRE(q.event);
        CHECK(q.outputs.back() == doctest::Approx(ref.outputs.back()).epsilon(1e-12));
        CHECK(q.metric == doctest::Approx(ref.metric).epsilon(1e-10));
    }
}

TEST_CASE("safety maps are deterministic and round-trip through JSON") {
    const auto sc = make(small_cw());
    const auto text = pipeline::dump(small_map());
    CHECK(pipeline::dump(pipeline::verify(*sc, 0, 7)) == text);
    CHECK(pipeline::dump(pipeline::verify(*sc, 2, 7)) == text);
    CHECK(pipeline::dump(pipeline::from_json(json::parse(text))) == text);

    const auto doc = json::parse(text);
    CHECK(doc["schema_version"] == 1);
    CHECK(doc["seed"] == 7);
    CHECK(doc["aggregate"]["subdomains"] == small_map().subdomains.size());
    CHECK(doc["error_scaling"]["scales"].size() == 4);

    auto bad = doc;
    bad["schema_version"] = 99;
    CHECK_THROWS_AS(pipeline::from_json(bad), ConfigError);
}

TEST_CASE("Monte-Carlo containment: parallel equals serial, seeds are reproducible") {
    const auto sc = make(small_cw());
    const auto& map = small_map();
    pipeline::McOptions opts;
    opts.samples = 12;
    opts.seed = 99;
    const auto ser = pipeline::to_json(pipeline::mc_check_serial(*sc, map, opts));
    opts.workers = 0;
    const auto par = pipeline::to_json(pipeline::mc_check(*sc, map, opts));
    CHECK(ser == par);
    CHECK(ser["violations"] == 0);
    CHECK(pipeline::to_json(pipeline::mc_check(*sc, map, opts)) == par);

    std::size_t ok = 0;
    for (const auto& r : map.subdomains) {
        ok += r.status == ads::Status::ok;
    }
    CHECK(ser["samples"] == ok * 12);

    opts.seed = 100;
    const auto other = pipeline::to_json(pipeline::mc_check(*sc, map, opts));
    CHECK(other["worst_margin"] != par["worst_margin"]);

    // without the remainder the bounds are tighter, so margins shrink
    opts.seed = 99;
    opts.zero_remainder = true;
    const auto bare = pipeline::mc_check(*sc, map, opts);
    CHECK(pipeline::to_json(bare)["worst_margin"].get<double>() <= par["worst_margin"].get<double>());
}

TEST_CASE("Monte-Carlo check refuses a map from another config") {
    const auto& map = small_map();
    auto cfg = small_cw();
    cfg["threshold"] = 2.0;
    const auto other = make(cfg);
    pipeline::McOptions opts;
    opts.samples = 1;
    CHECK_THROWS_AS(pipeline::mc_check(*other, map, opts), ConfigError);
}

TEST_CASE("plot CSV has one row per subdomain") {
    const auto& map = small_map();
    std::ostringstream out;
    pipeline::write_plot_csv(out, map);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "index,lo0,hi0,lo1,hi1,status,verdict,metric_lo,metric_hi,error");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        REQUIRE(cells.size() >= 7);
        CHECK(cells[6] == pipeline::to_string(map.subdomains[rows].verdict));
        CHECK(std::stod(cells[1]) == doctest::Approx(map.subdomains[rows].domain.center[0] -
                                                     map.subdomains[rows].domain.half_width[0]));
        ++rows;
    }
    CHECK(rows == map.subdomains.size());
}

TEST_CASE("reduced Earth-Mars run") {
    auto cfg = load_config("earth_mars.json");
    cfg["ads"]["order"] = 3;
    cfg["ads"]["e_tol"] = "inf";
    const auto sc = make(cfg);
    const auto map = pipeline::verify(*sc);
    REQUIRE(map.subdomains.size() == 1);
    const auto& r = map.subdomains[0];
    REQUIRE(r.status == ads::Status::ok);
    CHECK(map.output_names.size() == 4);
    const double days = r.t_event / 86400.0;
    CHECK(days > 1000.0);
    CHECK(days < 1336.6);
    const auto p = pipeline::evaluate_point(*sc, r.domain.center, 8);
    REQUIRE(p.event);
    CHECK(r.metric_bound.contains(p.metric));
    CHECK(p.metric == doctest::Approx(std::sqrt(p.outputs[0] * p.outputs[0] + p.outputs[1] * p.outputs[1] +
                                                p.outputs[2] * p.outputs[2])));
}

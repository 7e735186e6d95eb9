#include "dacert/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "dacert/errors.hpp"

namespace dacert::pipeline {

using nlohmann::json;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

json num(double x) {
    if (std::isfinite(x)) {
        return x;
    }
    if (std::isnan(x)) {
        return "nan";
    }
    return x > 0 ? "inf" : "-inf";
}

double real(const json& v) {
    if (v.is_number()) {
        return v.get<double>();
    }
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf") {
            return inf;
        }
        if (s == "-inf") {
            return -inf;
        }
        if (s == "nan") {
            return std::numeric_limits<double>::quiet_NaN();
        }
    }
    throw ConfigError("safety map: expected a number, got " + v.dump());
}

json to_array(std::span<const double> xs) {
    json a = json::array();
    for (double x : xs) {
        a.push_back(num(x));
    }
    return a;
}

std::vector<double> reals(const json& a) {
    std::vector<double> out;
    for (const auto& v : a) {
        out.push_back(real(v));
    }
    return out;
}

json interval(const ival::Interval& iv) { return json::array({num(iv.lo), num(iv.hi)}); }

ival::Interval interval(const json& a) {
    ival::Interval iv;
    iv.lo = real(a.at(0));
    iv.hi = real(a.at(1));
    return iv;
}

ads::Status parse_status(const std::string& s) {
    if (s == "ok") {
        return ads::Status::ok;
    }
    if (s == "no-event") {
        return ads::Status::no_event;
    }
    if (s == "failed") {
        return ads::Status::failed;
    }
    throw ConfigError("safety map: unknown status '" + s + "'");
}

std::string config_fingerprint(const json& cfg) { return fingerprint(cfg.dump()); }

} // namespace

ads::Expansion expand(const scen::Scenario& sc, const ads::Domain& dom, unsigned order) {
    ads::Expansion out;
    try {
        const auto box = sc.initial_box(dom);
        const auto& sys = sc.system();
        auto rec = event::detect(sys, box.center, sc.t0(), sc.event(), sc.t_max(), sc.step_control());
        if (!rec) {
            out.status = ads::Status::no_event;
            out.message = "no event before the maximum time of flight";
            return out;
        }
        event::RefineOptions ropts;
        ropts.order = std::max(order, 2u);
        const auto ref = event::refine(sys, *rec, sc.event(), ropts, sc.step_control());
        if (ref.degenerate) {
            out.status = ads::Status::failed;
            out.message = "refined point is not a minimum";
            return out;
        }
        auto em = event::build_event_map(sys, box, sc.t0(), sc.event(), ref.t, order, sc.step_control());

        const auto weights = sc.error_weights();
        std::vector<da::TaylorPoly> scaled;
        for (std::size_t i = 0; i < em.state.size(); ++i) {
            scaled.push_back(em.state[i] * weights[i]);
        }
        out.error_map = da::TaylorMap(std::move(scaled));

        auto outputs = sc.outputs(em.time, em.state.components);
        auto metric = sc.metric(outputs);
        auto data = std::make_shared<SubdomainData>(std::move(em), std::move(outputs), std::move(metric));
        data->t_event = ref.t;
        data->refine_iterations = ref.iterations;
        out.data = std::move(data);
        out.status = ads::Status::ok;
    } catch (const std::exception& e) {
        out.status = ads::Status::failed;
        out.message = e.what();
        out.error_map = {};
        out.data.reset();
    }
    return out;
}

const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::safe:
        return "safe";
    case Verdict::unsafe:
        return "unsafe";
    case Verdict::indeterminate:
        return "indeterminate";
    }
    return "indeterminate";
}

Verdict parse_verdict(const std::string& s) {
    if (s == "safe") {
        return Verdict::safe;
    }
    if (s == "unsafe") {
        return Verdict::unsafe;
    }
    if (s == "indeterminate") {
        return Verdict::indeterminate;
    }
    throw ConfigError("safety map: unknown verdict '" + s + "'");
}

Verdict verdict_for(ads::Status status, const ival::Interval& metric_bound, double threshold) {
    if (status != ads::Status::ok) {
        return Verdict::indeterminate;
    }
    return metric_bound.hi <= threshold ? Verdict::safe : Verdict::unsafe;
}

std::string fingerprint(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

SubdomainResult assess(const scen::Scenario& sc, const ads::Subdomain& sub) {
    SubdomainResult r;
    r.domain = sub.domain;
    r.status = sub.expansion.status;
    r.message = sub.expansion.message;
    r.error_per_component = sub.error.per_component;
    r.error = sub.error.max;
    r.at_split_limit = sub.at_split_limit;
    const auto* data = dynamic_cast<const SubdomainData*>(sub.expansion.data.get());
    if (r.status == ads::Status::ok && data != nullptr) {
        const unsigned n = sc.ads().order;
        const da::TaylorMap out_map(data->outputs);
        const auto rem = ads::map_error(out_map, n);
        r.remainder = rem.per_component;
        r.bounds = ival::bound_map(out_map, {rem.per_component}, sc.bound_options());
        auto sizes = ads::order_sizes(data->metric);
        r.metric_remainder = ads::fit_and_extrapolate(sizes, n);
        const auto mb = ival::bound_poly(data->metric, sc.bound_options());
        r.metric_bound = ival::Interval(mb.lo - r.metric_remainder, mb.hi + r.metric_remainder);
        r.condition = data->map.condition;
        r.t_event = data->t_event * sc.time_unit();
        r.refine_iterations = data->refine_iterations;
    } else if (r.status == ads::Status::ok) {
        r.status = ads::Status::failed;
        r.message = "expansion carried no event map";
    }
    r.verdict = verdict_for(r.status, r.metric_bound, sc.threshold());
    return r;
}

SafetyMap verify(const scen::Scenario& sc, int workers, std::uint64_t seed) {
    SafetyMap m;
    m.config = sc.config();
    m.fingerprint = config_fingerprint(m.config);
    m.seed = seed;
    m.scenario = sc.kind();
    m.output_names = sc.output_names();
    m.metric_name = sc.metric_name();
    m.threshold = sc.threshold();
    m.root = sc.root_domain();

    const unsigned order = sc.ads().order;
    const ads::Expander expander = [&sc, order](const ads::Domain& d) { return expand(sc, d, order); };
    const auto leaves = ads::run(m.root, sc.ads(), expander, workers);

    const double root_volume = m.root.volume();
    double max_metric = -inf;
    for (const auto& leaf : leaves) {
        auto r = assess(sc, leaf);
        const double frac = r.domain.volume() / root_volume;
        switch (r.verdict) {
        case Verdict::safe:
            m.fractions.safe += frac;
            break;
        case Verdict::unsafe:
            m.fractions.unsafe += frac;
            break;
        case Verdict::indeterminate:
            m.fractions.indeterminate += frac;
            ++m.indeterminate_count;
            break;
        }
        if (r.status == ads::Status::ok) {
            max_metric = std::max(max_metric, r.metric_bound.hi);
        }
        m.subdomains.push_back(std::move(r));
    }
    m.max_metric_bound = max_metric;
    return m;
}

json to_json(const SafetyMap& map) {
    json doc;
    doc["schema_version"] = schema_version;
    doc["scenario"] = map.scenario;
    doc["config"] = map.config;
    doc["fingerprint"] = map.fingerprint;
    doc["seed"] = map.seed;
    doc["output_names"] = map.output_names;
    doc["metric"] = {{"name", map.metric_name}, {"threshold", num(map.threshold)}};
    doc["root"] = {{"center", to_array(map.root.center)},
                   {"half_width", to_array(map.root.half_width)},
                   {"volume", num(map.root.volume())}};
    doc["error_scaling"] = {
        {"kind", "x_e* in physical units divided by per-component reference scales; absolute"},
        {"scales", map.config.contains("ads") ? map.config["ads"].value("error_scales", json::array()) : json()}};

    std::size_t n_safe = 0, n_unsafe = 0;
    json subs = json::array();
    for (std::size_t i = 0; i < map.subdomains.size(); ++i) {
        const auto& r = map.subdomains[i];
        json s;
        s["index"] = i;
        json lin = json::array();
        for (const auto& st : r.domain.lineage) {
            lin.push_back(json::array({st.variable, st.side}));
        }
        s["lineage"] = lin;
        s["center"] = to_array(r.domain.center);
        s["half_width"] = to_array(r.domain.half_width);
        s["status"] = ads::to_string(r.status);
        if (!r.message.empty()) {
            s["message"] = r.message;
        }
        s["verdict"] = to_string(r.verdict);
        s["error"] = {{"per_component", to_array(r.error_per_component)},
                      {"max", num(r.error)},
                      {"at_split_limit", r.at_split_limit}};
        if (r.status == ads::Status::ok) {
            json b = json::array();
            for (const auto& iv : r.bounds) {
                b.push_back(interval(iv));
            }
            s["outputs"] = {{"bounds", b}, {"remainder", to_array(r.remainder)}};
            s["metric"] = {{"bound", interval(r.metric_bound)}, {"remainder", num(r.metric_remainder)}};
            s["diagnostics"] = {{"condition", num(r.condition)},
                                {"t_event_s", num(r.t_event)},
                                {"refine_iterations", r.refine_iterations}};
        }
        n_safe += r.verdict == Verdict::safe;
        n_unsafe += r.verdict == Verdict::unsafe;
        subs.push_back(std::move(s));
    }
    doc["subdomains"] = std::move(subs);
    doc["aggregate"] = {
        {"subdomains", map.subdomains.size()},
        {"safe", n_safe},
        {"unsafe", n_unsafe},
        {"indeterminate", map.indeterminate_count},
        {"volume_fraction",
         {{"definition", "Lebesgue volume of the boxes over the root-box volume"},
          {"safe", num(map.fractions.safe)},
          {"unsafe", num(map.fractions.unsafe)},
          {"indeterminate", num(map.fractions.indeterminate)}}},
        {"max_metric_bound", num(map.max_metric_bound)}};
    return doc;
}

std::string dump(const SafetyMap& map) { return to_json(map).dump(1) + "\n"; }

SafetyMap from_json(const json& doc) {
    try {
        if (doc.at("schema_version").get<int>() != schema_version) {
            throw ConfigError("safety map: unsupported schema_version " + doc.at("schema_version").dump());
        }
        SafetyMap m;
        m.config = doc.at("config");
        m.fingerprint = doc.at("fingerprint").get<std::string>();
        m.seed = doc.at("seed").get<std::uint64_t>();
        m.scenario = doc.at("scenario").get<std::string>();
        m.output_names = doc.at("output_names").get<std::vector<std::string>>();
        m.metric_name = doc.at("metric").at("name").get<std::string>();
        m.threshold = real(doc.at("metric").at("threshold"));
        m.root.center = reals(doc.at("root").at("center"));
        m.root.half_width = reals(doc.at("root").at("half_width"));
        const auto& agg = doc.at("aggregate");
        m.fractions.safe = real(agg.at("volume_fraction").at("safe"));
        m.fractions.unsafe = real(agg.at("volume_fraction").at("unsafe"));
        m.fractions.indeterminate = real(agg.at("volume_fraction").at("indeterminate"));
        m.max_metric_bound = real(agg.at("max_metric_bound"));
        m.indeterminate_count = agg.at("indeterminate").get<std::size_t>();
        for (const auto& s : doc.at("subdomains")) {
            SubdomainResult r;
            r.domain.center = reals(s.at("center"));
            r.domain.half_width = reals(s.at("half_width"));
            for (const auto& st : s.at("lineage")) {
                r.domain.lineage.push_back({st.at(0).get<std::size_t>(), st.at(1).get<int>()});
            }
            r.status = parse_status(s.at("status").get<std::string>());
            r.message = s.value("message", "");
            r.verdict = parse_verdict(s.at("verdict").get<std::string>());
            r.error_per_component = reals(s.at("error").at("per_component"));
            r.error = real(s.at("error").at("max"));
            r.at_split_limit = s.at("error").at("at_split_limit").get<bool>();
            if (r.status == ads::Status::ok) {
                for (const auto& b : s.at("outputs").at("bounds")) {
                    r.bounds.push_back(interval(b));
                }
                r.remainder = reals(s.at("outputs").at("remainder"));
                r.metric_bound = interval(s.at("metric").at("bound"));
                r.metric_remainder = real(s.at("metric").at("remainder"));
                r.condition = real(s.at("diagnostics").at("condition"));
                r.t_event = real(s.at("diagnostics").at("t_event_s"));
                r.refine_iterations = s.at("diagnostics").at("refine_iterations").get<unsigned>();
            }
            m.subdomains.push_back(std::move(r));
        }
        return m;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("safety map: ") + e.what());
    }
}

SafetyMap read_map(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open safety map " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("safety map " + path.string() + " is not valid JSON: " + e.what());
    }
    return from_json(doc);
}

PointResult evaluate_point(const scen::Scenario& sc, std::span<const double> point, unsigned refine_order) {
    PointResult r;
    try {
        const auto x0 = sc.initial_state(point);
        auto rec = event::detect(sc.system(), x0, sc.t0(), sc.event(), sc.t_max(), sc.step_control());
        if (!rec) {
            r.message = "no event";
            return r;
        }
        event::RefineOptions ropts;
        ropts.order = std::max(refine_order, 2u);
        const auto ref = event::refine(sc.system(), *rec, sc.event(), ropts, sc.step_control());
        if (ref.degenerate) {
            r.message = "degenerate minimum";
            return r;
        }
        r.outputs = sc.outputs(ref.t, ref.x);
        r.metric = sc.metric(r.outputs);
        r.event = true;
    } catch (const std::exception& e) {
        r.message = e.what();
    }
    return r;
}

namespace {

struct Task {
    std::size_t sub;
    std::size_t sample;
};

struct SampleOutcome {
    bool missed = false;
    bool output_violation = false;
    bool metric_violation = false;
    double margin = inf;
};

double margin_of(const ival::Interval& iv, double v) {
    const double w = iv.hi - iv.lo;
    const double d = std::min(v - iv.lo, iv.hi - v);
    return w > 0.0 ? d / w : (d >= 0.0 ? 0.0 : -inf);
}

ival::Interval shrink(const ival::Interval& iv, double r) {
    ival::Interval out;
    out.lo = iv.lo + r;
    out.hi = iv.hi - r;
    return out;
}

SampleOutcome run_sample(const scen::Scenario& sc, const SafetyMap& map, const McOptions& opts, const Task& t) {
    const auto& r = map.subdomains[t.sub];
    std::seed_seq seq{static_cast<std::uint32_t>(opts.seed), static_cast<std::uint32_t>(opts.seed >> 32),
                      static_cast<std::uint32_t>(t.sub), static_cast<std::uint32_t>(t.sample)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> point(r.domain.center.size());
    for (std::size_t j = 0; j < point.size(); ++j) {
        point[j] = r.domain.center[j] + r.domain.half_width[j] * u(rng);
    }
    SampleOutcome o;
    const auto p = evaluate_point(sc, point, sc.ads().order);
    if (!p.event) {
        o.missed = true;
        o.margin = -inf;
        return o;
    }
    for (std::size_t i = 0; i < r.bounds.size(); ++i) {
        const auto iv = opts.zero_remainder ? shrink(r.bounds[i], r.remainder[i]) : r.bounds[i];
        if (!iv.contains(p.outputs[i])) {
            o.output_violation = true;
        }
        o.margin = std::min(o.margin, margin_of(iv, p.outputs[i]));
    }
    const auto mb = opts.zero_remainder ? shrink(r.metric_bound, r.metric_remainder) : r.metric_bound;
    if (!mb.contains(p.metric)) {
        o.metric_violation = true;
    }
    o.margin = std::min(o.margin, margin_of(mb, p.metric));
    return o;
}

std::vector<Task> tasks_for(const scen::Scenario& sc, const SafetyMap& map, const McOptions& opts) {
    if (fingerprint(sc.config().dump()) != map.fingerprint || sc.kind() != map.scenario) {
        throw ConfigError("mc-check: the scenario does not match the one the safety map was built from");
    }
    std::vector<Task> tasks;
    for (std::size_t i = 0; i < map.subdomains.size(); ++i) {
        if (map.subdomains[i].status != ads::Status::ok) {
            continue;
        }
        if (map.subdomains[i].bounds.size() != sc.output_names().size()) {
            throw ConfigError("mc-check: subdomain " + std::to_string(i) + " has the wrong number of bounds");
        }
        for (std::size_t k = 0; k < opts.samples; ++k) {
            tasks.push_back({i, k});
        }
    }
    return tasks;
}

McReport collect(const SafetyMap& map, const std::vector<Task>& tasks, const std::vector<SampleOutcome>& out) {
    McReport rep;
    std::vector<std::ptrdiff_t> slot(map.subdomains.size(), -1);
    for (std::size_t k = 0; k < tasks.size(); ++k) {
        const auto& t = tasks[k];
        if (slot[t.sub] < 0) {
            slot[t.sub] = static_cast<std::ptrdiff_t>(rep.subdomains.size());
            McSubdomainReport s;
            s.index = t.sub;
            s.worst_margin = inf;
            rep.subdomains.push_back(s);
        }
        auto& s = rep.subdomains[static_cast<std::size_t>(slot[t.sub])];
        const auto& o = out[k];
        ++s.samples;
        ++rep.samples;
        s.missed_events += o.missed;
        s.output_violations += o.output_violation;
        s.metric_violations += o.metric_violation;
        s.worst_margin = std::min(s.worst_margin, o.margin);
        rep.violations += (o.missed || o.output_violation || o.metric_violation);
    }
    return rep;
}

} // namespace

McReport mc_check_serial(const scen::Scenario& sc, const SafetyMap& map, const McOptions& opts) {
    const auto tasks = tasks_for(sc, map, opts);
    std::vector<SampleOutcome> out(tasks.size());
    for (std::size_t k = 0; k < tasks.size(); ++k) {
        out[k] = run_sample(sc, map, opts, tasks[k]);
    }
    return collect(map, tasks, out);
}

McReport mc_check(const scen::Scenario& sc, const SafetyMap& map, const McOptions& opts) {
#ifdef DACERT_HAVE_OPENMP
    if (opts.workers == 1) {
        return mc_check_serial(sc, map, opts);
    }
    const auto tasks = tasks_for(sc, map, opts);
    std::vector<SampleOutcome> out(tasks.size());
    const auto n = static_cast<std::ptrdiff_t>(tasks.size());
    const int threads = opts.workers > 0 ? opts.workers : 0;
    if (threads > 0) {
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
        for (std::ptrdiff_t k = 0; k < n; ++k) {
            out[static_cast<std::size_t>(k)] = run_sample(sc, map, opts, tasks[static_cast<std::size_t>(k)]);
        }
    } else {
#pragma omp parallel for schedule(dynamic, 4)
        for (std::ptrdiff_t k = 0; k < n; ++k) {
            out[static_cast<std::size_t>(k)] = run_sample(sc, map, opts, tasks[static_cast<std::size_t>(k)]);
        }
    }
    return collect(map, tasks, out);
#else
    return mc_check_serial(sc, map, opts);
#endif
}

json to_json(const McReport& report) {
    json doc;
    doc["samples"] = report.samples;
    doc["violations"] = report.violations;
    json subs = json::array();
    double worst = inf;
    for (const auto& s : report.subdomains) {
        subs.push_back({{"index", s.index},
                        {"samples", s.samples},
                        {"output_violations", s.output_violations},
                        {"metric_violations", s.metric_violations},
                        {"missed_events", s.missed_events},
                        {"worst_margin", num(s.worst_margin)}});
        worst = std::min(worst, s.worst_margin);
    }
    doc["worst_margin"] = num(worst);
    doc["subdomains"] = std::move(subs);
    return doc;
}

void write_plot_csv(std::ostream& out, const SafetyMap& map) {
    const std::size_t m = map.root.center.size();
    out << "index";
    for (std::size_t j = 0; j < m; ++j) {
        out << ",lo" << j << ",hi" << j;
    }
    out << ",status,verdict,metric_lo,metric_hi,error\n";
    std::ostringstream line;
    line << std::setprecision(17);
    for (std::size_t i = 0; i < map.subdomains.size(); ++i) {
        const auto& r = map.subdomains[i];
        line.str("");
        line << i;
        for (std::size_t j = 0; j < m; ++j) {
            line << ',' << r.domain.center[j] - r.domain.half_width[j] << ',' << r.domain.center[j] + r.domain.half_width[j];
        }
        line << ',' << ads::to_string(r.status) << ',' << to_string(r.verdict);
        if (r.status == ads::Status::ok) {
            line << ',' << r.metric_bound.lo << ',' << r.metric_bound.hi;
        } else {
            line << ",,";
        }
        line << ',' << r.error << '\n';
        out << line.str();
    }
}

} // namespace dacert::pipeline

#include "dacert/scenarios/scenario.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "dacert/errors.hpp"
#include "dacert/scenarios/cw.hpp"
#include "dacert/scenarios/two_body.hpp"

namespace dacert::scen {

using nlohmann::json;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double deg = std::numbers::pi / 180.0;
constexpr double day = 86400.0;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
}

const json& field(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) {
        fail(where, "expected an object");
    }
    auto it = obj.find(key);
    if (it == obj.end()) {
        fail(where, std::string("missing field '") + key + "'");
    }
    return *it;
}

// Numbers, or the strings "inf" / "-inf".
double as_real(const json& v, const std::string& where) {
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
    }
    fail(where, "expected a number");
}

double real(const json& obj, const char* key, const std::string& where) {
    return as_real(field(obj, key, where), where + "." + key);
}

double real_or(const json& obj, const char* key, double fallback, const std::string& where) {
    return obj.contains(key) ? real(obj, key, where) : fallback;
}

double positive(const json& obj, const char* key, const std::string& where) {
    const double v = real(obj, key, where);
    if (!(v > 0.0) || !std::isfinite(v)) {
        fail(where + "." + key, "must be positive and finite");
    }
    return v;
}

std::vector<double> reals(const json& v, const std::string& where, std::size_t expect = 0) {
    if (!v.is_array()) {
        fail(where, "expected an array");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(as_real(v[i], where + "[" + std::to_string(i) + "]"));
        if (!std::isfinite(out.back())) {
            fail(where, "entries must be finite");
        }
    }
    if (expect != 0 && out.size() != expect) {
        fail(where, "expected " + std::to_string(expect) + " entries, got " + std::to_string(out.size()));
    }
    return out;
}

// Row-major rows x cols from a nested array.
std::vector<double> matrix(const json& v, const std::string& where, std::size_t rows, std::size_t cols) {
    if (!v.is_array() || v.size() != rows) {
        fail(where, "expected " + std::to_string(rows) + " rows");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < rows; ++i) {
        auto row = reals(v[i], where + "[" + std::to_string(i) + "]", cols);
        out.insert(out.end(), row.begin(), row.end());
    }
    return out;
}

unsigned count(const json& obj, const char* key, unsigned fallback, const std::string& where) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const auto& v = obj[key];
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        fail(where + "." + key, "expected a non-negative integer");
    }
    return static_cast<unsigned>(v.get<long long>());
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (!known.count(key)) {
            fail(where, "unknown field '" + key + "'");
        }
    }
}

// Scalar zero in the space of x[0].
template <class S>
S zero_like(const S& x) {
    return x * 0.0;
}

template <class S>
std::vector<S> run_controller(const ctrl::Controller* c, std::span<const S> phys, std::size_t out_dim) {
    std::vector<S> u(out_dim, zero_like(phys[0]));
    if (c != nullptr) {
        c->apply(phys.first(c->input_dim()), u);
    }
    return u;
}

// ---------------------------------------------------------------- CW

class CwSystem final : public flow::GenericSystem<CwSystem> {
public:
    CwSystem(CwParams p, std::vector<double> units, std::shared_ptr<const ctrl::Controller> c)
        : p_(p), units_(std::move(units)), ctrl_(std::move(c)) {}

    std::size_t dimension() const override { return 4; }

    template <class T, class S>
    void eval(const T&, std::span<const S> x, std::span<S> dx) const {
        std::vector<S> phys;
        phys.reserve(4);
        for (std::size_t i = 0; i < 4; ++i) {
            phys.push_back(x[i] * units_[i]);
        }
        const auto u = run_controller<S>(ctrl_.get(), phys, 2);
        cw_rhs<S, S>(x, u, p_, dx);
    }

private:
    CwParams p_;
    std::vector<double> units_;
    std::shared_ptr<const ctrl::Controller> ctrl_;
};

// L = (x - target)^T M (x - target) in physical units.
class LengthEvent final : public event::GenericEvent<LengthEvent> {
public:
    static constexpr bool has_rate = true;

    LengthEvent(std::vector<double> M, std::vector<double> target, std::vector<double> units)
        : M_(std::move(M)), target_(std::move(target)), units_(std::move(units)) {}

    template <class T, class S>
    S eval(const T&, std::span<const S> x) const {
        const auto r = residual(x);
        return squared_length<S>(r, M_);
    }

    // d/dt of the quadratic form along x' = xdot (internal time).
    template <class T, class S>
    S eval_rate(const T&, std::span<const S> x, std::span<const S> xdot) const {
        const auto r = residual(x);
        S acc = zero_like(x[0]);
        for (std::size_t i = 0; i < 4; ++i) {
            for (std::size_t j = 0; j < 4; ++j) {
                const double m = M_[i * 4 + j];
                if (m != 0.0) {
                    acc += m * (r[i] * (xdot[j] * units_[j]) + (xdot[i] * units_[i]) * r[j]);
                }
            }
        }
        return acc;
    }

private:
    template <class S>
    std::vector<S> residual(std::span<const S> x) const {
        std::vector<S> r;
        r.reserve(4);
        for (std::size_t i = 0; i < 4; ++i) {
            r.push_back(x[i] * units_[i] - target_[i]);
        }
        return r;
    }

    std::vector<double> M_;
    std::vector<double> target_;
    std::vector<double> units_;
};

class CwScenario final : public Scenario {
public:
    CwScenario(const json& cfg, const std::filesystem::path& base_dir) {
        const std::string w = "cw";
        const auto& p = field(cfg, "cw", "config");
        reject_unknown(p, {"mean_motion_rad_s", "thrust_accel_m_s2", "max_tof_s", "length_unit_m"}, w);
        const double n = positive(p, "mean_motion_rad_s", w);
        const double a_T = real(p, "thrust_accel_m_s2", w);
        if (!(a_T >= 0.0) || !std::isfinite(a_T)) {
            fail(w + ".thrust_accel_m_s2", "must be non-negative");
        }
        const double L = p.contains("length_unit_m") ? positive(p, "length_unit_m", w) : 1000.0;
        time_unit_ = 1.0 / n;
        units_ = {L, L, L * n, L * n};
        params_ = CwParams{1.0, a_T / (L * n * n)};
        t_max_ = positive(p, "max_tof_s", w) / time_unit_;

        load_common(cfg, base_dir, 4);
        if (controller_ && (controller_->input_dim() > 4 || controller_->output_dim() != 2)) {
            fail("controller", "CW needs at most 4 inputs and exactly 2 outputs");
        }

        const auto& ev = field(cfg, "event", "config");
        reject_unknown(ev, {"M", "target"}, "event");
        M_ = matrix(field(ev, "M", "event"), "event.M", 4, 4);
        target_ = ev.contains("target") ? reals(ev["target"], "event.target", 4) : std::vector<double>(4, 0.0);
        for (std::size_t i = 0; i < 4; ++i) {
            for (std::size_t j = 0; j < 4; ++j) {
                if (M_[i * 4 + j] != M_[j * 4 + i]) {
                    fail("event.M", "must be symmetric");
                }
            }
            if (!(M_[i * 4 + i] > 0.0)) {
                fail("event.M", "diagonal must be positive");
            }
        }

        system_ = std::make_unique<CwSystem>(params_, units_, controller_);
        event_.function = std::make_shared<LengthEvent>(M_, target_, units_);
        event_.mode = event::Mode::minimum;
        event_.terminal = false;
    }

    std::string kind() const override { return "cw"; }
    const flow::OdeSystem& system() const override { return *system_; }

    std::vector<std::string> output_names() const override { return {"x_m", "y_m", "vx_m_s", "vy_m_s", "t_e_s"}; }
    std::vector<double> outputs(double t, std::span<const double> x) const override { return outputs_of(t, x); }
    std::vector<da::TaylorPoly> outputs(const da::TaylorPoly& t, std::span<const da::TaylorPoly> x) const override {
        return outputs_of(t, x);
    }
    std::string metric_name() const override { return "squared_length"; }
    double metric(std::span<const double> out) const override { return metric_of(out); }
    da::TaylorPoly metric(std::span<const da::TaylorPoly> out) const override { return metric_of(out); }

private:
    template <class S>
    std::vector<S> outputs_of(const S& t, std::span<const S> x) const {
        std::vector<S> out;
        for (std::size_t i = 0; i < 4; ++i) {
            out.push_back(x[i] * units_[i]);
        }
        out.push_back(t * time_unit_);
        return out;
    }

    template <class S>
    S metric_of(std::span<const S> out) const {
        std::vector<S> r;
        for (std::size_t i = 0; i < 4; ++i) {
            r.push_back(out[i] - target_[i]);
        }
        return squared_length<S>(r, M_);
    }

    CwParams params_;
    std::vector<double> M_;
    std::vector<double> target_;
    std::unique_ptr<CwSystem> system_;
};

// ---------------------------------------------------------------- Earth-Mars

class HelioSystem final : public flow::GenericSystem<HelioSystem> {
public:
    HelioSystem(TwoBodyParams p, std::vector<double> units, std::shared_ptr<const ctrl::Controller> c)
        : p_(p), units_(std::move(units)), ctrl_(std::move(c)) {}

    std::size_t dimension() const override { return 7; }

    template <class T, class S>
    void eval(const T&, std::span<const S> x, std::span<S> dx) const {
        std::vector<S> phys;
        phys.reserve(7);
        for (std::size_t i = 0; i < 7; ++i) {
            phys.push_back(x[i] * units_[i]);
        }
        const auto u = run_controller<S>(ctrl_.get(), phys, 3);
        two_body_rhs<S, S>(x, u, p_, dx);
    }

private:
    TwoBodyParams p_;
    std::vector<double> units_;
    std::shared_ptr<const ctrl::Controller> ctrl_;
};

class SoiEvent final : public event::GenericEvent<SoiEvent> {
public:
    static constexpr bool has_rate = false;

    SoiEvent(PlanetEphemeris eph, double r_soi) : eph_(eph), r_soi_(r_soi) {}

    template <class T, class S>
    S eval(const T& t, std::span<const S> x) const {
        const auto planet = eph_.state(t);
        return soi_events<S>(x, planet, r_soi_)[0];
    }

private:
    PlanetEphemeris eph_;
    double r_soi_;
};

class EarthMarsScenario final : public Scenario {
public:
    EarthMarsScenario(const json& cfg, const std::filesystem::path& base_dir) {
        const std::string w = "earth_mars";
        const auto& p = field(cfg, "earth_mars", "config");
        reject_unknown(p,
                       {"mu_sun_km3_s2", "au_km", "departure_epoch_mjd2000", "max_tof_days", "r_soi_km", "thrust_n",
                        "exhaust_velocity_km_s", "dry_mass_kg", "mars"},
                       w);
        const double mu = positive(p, "mu_sun_km3_s2", w);
        const double au = positive(p, "au_km", w);
        const double tu = std::sqrt(au * au * au / mu);
        const double vu = au / tu;

        // mass unit: nominal initial mass
        const auto nominal = reals(field(cfg, "nominal_state", "config"), "nominal_state", 7);
        const double mu_mass = nominal[6];
        if (!(mu_mass > 0.0)) {
            fail("nominal_state", "mass must be positive");
        }
        time_unit_ = tu;
        units_ = {au, au, au, vu, vu, vu, mu_mass};

        const double thrust = real_or(p, "thrust_n", 0.0, w);
        const double v_ex = p.contains("exhaust_velocity_km_s") ? positive(p, "exhaust_velocity_km_s", w) : 30.0;
        const double dry = real_or(p, "dry_mass_kg", 0.0, w);
        if (!(thrust >= 0.0) || !(dry >= 0.0)) {
            fail(w, "thrust and dry mass must be non-negative");
        }
        // N -> kg km / s^2 -> internal
        const double force_unit = mu_mass * au / (tu * tu);
        params_ = TwoBodyParams{1.0, thrust * 1e-3 / force_unit, v_ex / vu, dry / mu_mass};
        t_max_ = positive(p, "max_tof_days", w) * day / tu;
        r_soi_ = positive(p, "r_soi_km", w);

        const auto& m = field(p, "mars", w);
        const std::string wm = w + ".mars";
        reject_unknown(m, {"epoch_mjd2000", "a_au", "e", "i_deg", "raan_deg", "argp_deg", "M0_deg"}, wm);
        KeplerElements el;
        el.a = positive(m, "a_au", wm);
        el.e = real(m, "e", wm);
        if (!(el.e >= 0.0 && el.e < 1.0)) {
            fail(wm + ".e", "eccentricity must lie in [0, 1)");
        }
        el.i = real(m, "i_deg", wm) * deg;
        el.raan = real(m, "raan_deg", wm) * deg;
        el.argp = real(m, "argp_deg", wm) * deg;
        el.M0 = real(m, "M0_deg", wm) * deg;
        const double offset = (real(p, "departure_epoch_mjd2000", w) - real(m, "epoch_mjd2000", wm)) * day / tu;

        load_common(cfg, base_dir, 7);
        if (controller_ && (controller_->input_dim() > 7 || controller_->output_dim() != 3)) {
            fail("controller", "Earth-Mars needs at most 7 inputs and exactly 3 outputs");
        }
        if (controller_ == nullptr && thrust != 0.0) {
            fail("controller", "a thrusting scenario needs a controller");
        }
        if (cfg.contains("event")) {
            reject_unknown(cfg["event"], {}, "event");
        }

        eph_ = std::make_unique<PlanetEphemeris>(el, 1.0, offset);
        system_ = std::make_unique<HelioSystem>(params_, units_, controller_);
        event_.function = std::make_shared<SoiEvent>(*eph_, r_soi_ / au);
        event_.mode = event::Mode::crossing;
        event_.threshold = 0.0;
        event_.terminal = true;
    }

    std::string kind() const override { return "earth_mars"; }
    const flow::OdeSystem& system() const override { return *system_; }

    std::vector<std::string> output_names() const override {
        return {"dvx_m_s", "dvy_m_s", "dvz_m_s", "t_e_days"};
    }
    std::vector<double> outputs(double t, std::span<const double> x) const override {
        const auto planet = eph_->state(t);
        return outputs_of<double>(t, x, planet);
    }
    std::vector<da::TaylorPoly> outputs(const da::TaylorPoly& t, std::span<const da::TaylorPoly> x) const override {
        const auto planet = eph_->state(t);
        return outputs_of<da::TaylorPoly>(t, x, planet);
    }
    std::string metric_name() const override { return "relative_speed"; }
    double metric(std::span<const double> out) const override { return metric_of(out); }
    da::TaylorPoly metric(std::span<const da::TaylorPoly> out) const override { return metric_of(out); }

private:
    template <class S>
    std::vector<S> outputs_of(const S& t, std::span<const S> x, std::span<const S> planet) const {
        std::vector<S> out;
        const double to_m_s = units_[3] * 1e3;
        for (std::size_t i = 0; i < 3; ++i) {
            out.push_back((x[3 + i] - planet[3 + i]) * to_m_s);
        }
        out.push_back(t * (time_unit_ / day));
        return out;
    }

    template <class S>
    S metric_of(std::span<const S> out) const {
        using da::sqrt;
        using std::sqrt;
        return sqrt(out[0] * out[0] + out[1] * out[1] + out[2] * out[2]);
    }

    TwoBodyParams params_;
    double r_soi_ = 0.0;
    std::unique_ptr<PlanetEphemeris> eph_;
    std::unique_ptr<HelioSystem> system_;
};

std::shared_ptr<const ctrl::Controller> make_controller(json& c, const std::filesystem::path& base_dir) {
    const std::string w = "controller";
    const auto& kind_v = field(c, "kind", w);
    if (!kind_v.is_string()) {
        fail(w + ".kind", "expected a string");
    }
    const auto kind = kind_v.get<std::string>();
    if (kind == "none") {
        reject_unknown(c, {"kind"}, w);
        return nullptr;
    }
    if (kind == "analytic") {
        reject_unknown(c, {"kind", "K", "c", "saturation"}, w);
        const auto& K = field(c, "K", w);
        if (!K.is_array() || K.empty() || !K[0].is_array()) {
            fail(w + ".K", "expected a non-empty matrix");
        }
        const std::size_t rows = K.size(), cols = K[0].size();
        auto k = matrix(K, w + ".K", rows, cols);
        auto off = reals(field(c, "c", w), w + ".c", rows);
        return std::make_shared<ctrl::AnalyticController>(cols, std::move(k), std::move(off),
                                                          positive(c, "saturation", w));
    }
    if (kind == "siren") {
        reject_unknown(c, {"kind", "weights"}, w);
        const auto& path_v = field(c, "weights", w);
        if (!path_v.is_string()) {
            fail(w + ".weights", "expected a path");
        }
        std::filesystem::path p = path_v.get<std::string>();
        if (p.is_relative()) {
            p = std::filesystem::absolute(base_dir / p).lexically_normal();
        }
        c["weights"] = p.string();
        return std::make_shared<ctrl::SirenController>(ctrl::load_siren(p));
    }
    fail(w + ".kind", "unknown controller kind '" + kind + "'");
}

} // namespace

ads::Domain Scenario::root_domain() const { return ads::Domain{root_.center, root_.half_width, {}}; }

event::InitialBox Scenario::initial_box(const ads::Domain& dom) const {
    if (dom.center.size() != root_.components.size() || dom.half_width.size() != root_.components.size()) {
        throw DimensionError("domain does not match the root-domain components");
    }
    event::InitialBox box;
    box.center = initial_state(dom.center);
    box.components = root_.components;
    for (std::size_t j = 0; j < root_.components.size(); ++j) {
        box.half_width.push_back(dom.half_width[j] / units_[root_.components[j]]);
    }
    return box;
}

std::vector<double> Scenario::initial_state(std::span<const double> point) const {
    if (point.size() != root_.components.size()) {
        throw DimensionError("initial_state: point does not match the root-domain components");
    }
    std::vector<double> x = nominal_;
    for (std::size_t j = 0; j < point.size(); ++j) {
        x[root_.components[j]] = point[j];
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] /= units_[i];
    }
    return x;
}

std::vector<double> Scenario::error_weights() const {
    std::vector<double> w(units_.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = units_[i] / error_scales_[i];
    }
    return w;
}

void Scenario::load_common(const json& cfg, const std::filesystem::path& base_dir, std::size_t state_dim) {
    config_ = cfg;

    nominal_ = reals(field(cfg, "nominal_state", "config"), "nominal_state", state_dim);

    const auto& rd = field(cfg, "root_domain", "config");
    reject_unknown(rd, {"components", "center", "half_width"}, "root_domain");
    const auto& comps = field(rd, "components", "root_domain");
    if (!comps.is_array() || comps.empty()) {
        fail("root_domain.components", "expected a non-empty array");
    }
    std::set<std::size_t> seen;
    for (const auto& c : comps) {
        if (!c.is_number_integer() || c.get<long long>() < 0 || c.get<std::size_t>() >= state_dim) {
            fail("root_domain.components", "entries must be state indices below " + std::to_string(state_dim));
        }
        if (!seen.insert(c.get<std::size_t>()).second) {
            fail("root_domain.components", "duplicate component");
        }
        root_.components.push_back(c.get<std::size_t>());
    }
    const std::size_t m = root_.components.size();
    if (m > 8) {
        fail("root_domain.components", "at most 8 uncertain components are supported");
    }
    root_.half_width = reals(field(rd, "half_width", "root_domain"), "root_domain.half_width", m);
    for (double h : root_.half_width) {
        if (!(h > 0.0)) {
            fail("root_domain.half_width", "entries must be positive");
        }
    }
    if (rd.contains("center")) {
        root_.center = reals(rd["center"], "root_domain.center", m);
    } else {
        for (auto c : root_.components) {
            root_.center.push_back(nominal_[c]);
        }
    }

    threshold_ = real(cfg, "threshold", "config");
    if (std::isnan(threshold_)) {
        fail("threshold", "must be a number");
    }

    const auto& a = field(cfg, "ads", "config");
    reject_unknown(a, {"order", "e_tol", "n_max", "error_scales"}, "ads");
    ads_.order = count(a, "order", 4, "ads");
    if (ads_.order < 1 || ads_.order > 12) {
        fail("ads.order", "must lie in [1, 12]");
    }
    ads_.e_tol = real_or(a, "e_tol", 1e-4, "ads");
    if (!(ads_.e_tol > 0.0)) {
        fail("ads.e_tol", "must be positive");
    }
    ads_.n_max = count(a, "n_max", 15, "ads");
    error_scales_ = reals(field(a, "error_scales", "ads"), "ads.error_scales", state_dim);
    for (double s : error_scales_) {
        if (!(s > 0.0)) {
            fail("ads.error_scales", "entries must be positive");
        }
    }

    if (cfg.contains("integrator")) {
        const auto& in = cfg["integrator"];
        reject_unknown(in, {"abs_tol", "rel_tol", "error_norm", "max_steps"}, "integrator");
        step_.abs_tol = real_or(in, "abs_tol", step_.abs_tol, "integrator");
        step_.rel_tol = real_or(in, "rel_tol", step_.rel_tol, "integrator");
        if (!(step_.abs_tol > 0.0) || !(step_.rel_tol >= 0.0)) {
            fail("integrator", "tolerances must be positive");
        }
        step_.max_steps = count(in, "max_steps", static_cast<unsigned>(step_.max_steps), "integrator");
        if (in.contains("error_norm")) {
            const auto& v = in["error_norm"];
            if (v == "constant_part") {
                step_.norm = flow::ErrorNorm::constant_part;
            } else if (v == "all_coefficients") {
                step_.norm = flow::ErrorNorm::all_coefficients;
            } else {
                fail("integrator.error_norm", "expected constant_part or all_coefficients");
            }
        }
    }

    if (cfg.contains("bounds")) {
        reject_unknown(cfg["bounds"], {"padding"}, "bounds");
        bounds_.padding = real_or(cfg["bounds"], "padding", bounds_.padding, "bounds");
        if (!(bounds_.padding >= 0.0)) {
            fail("bounds.padding", "must be non-negative");
        }
    }

    try {
        controller_ = make_controller(config_["controller"], base_dir);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("controller: ") + e.what());
    }
}

std::unique_ptr<Scenario> make_scenario(const json& cfg, const std::filesystem::path& base_dir) {
    if (!cfg.is_object()) {
        fail("config", "expected a JSON object");
    }
    const auto& kind = field(cfg, "scenario", "config");
    if (!kind.is_string()) {
        fail("scenario", "expected a string");
    }
    std::set<std::string> known = {"schema_version", "scenario", "description", "nominal_state", "root_domain",
                                   "threshold",      "event",    "ads",         "integrator",    "bounds",
                                   "controller"};
    if (!cfg.contains("controller")) {
        fail("config", "missing field 'controller'");
    }
    if (kind == "cw") {
        known.insert("cw");
        reject_unknown(cfg, known, "config");
        return std::make_unique<CwScenario>(cfg, base_dir);
    }
    if (kind == "earth_mars") {
        known.insert("earth_mars");
        reject_unknown(cfg, known, "config");
        return std::make_unique<EarthMarsScenario>(cfg, base_dir);
    }
    fail("scenario", "unknown scenario kind '" + kind.get<std::string>() + "'");
}

std::unique_ptr<Scenario> load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config " + path.string());
    }
    json cfg;
    try {
        cfg = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return make_scenario(cfg, path.parent_path());
}

} // namespace dacert::scen

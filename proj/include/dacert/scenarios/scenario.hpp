#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dacert/ads.hpp"
#include "dacert/controllers.hpp"
#include "dacert/event/event_map.hpp"
#include "dacert/flow/integrator.hpp"
#include "dacert/flow/ode_system.hpp"
#include "dacert/interval.hpp"

namespace dacert::scen {

// Which state components span the uncertainty box, in physical units.
struct RootDomain {
    std::vector<std::size_t> components;
    std::vector<double> center;
    std::vector<double> half_width;
};

// A configured verification problem. Integration runs in internal
// (nondimensional) units; everything crossing this interface is physical
// unless stated otherwise.
class Scenario {
public:
    virtual ~Scenario() = default;

    virtual std::string kind() const = 0;
    virtual const flow::OdeSystem& system() const = 0;

    const event::EventSpec& event() const { return event_; }
    double t0() const { return 0.0; }
    double t_max() const { return t_max_; } // internal
    const flow::StepControl& step_control() const { return step_; }

    // physical units per internal unit, one per state component
    std::span<const double> state_units() const { return units_; }
    double time_unit() const { return time_unit_; } // seconds

    const std::vector<double>& nominal_state() const { return nominal_; }
    const RootDomain& root() const { return root_; }
    ads::Domain root_domain() const;

    // Box around the domain centre, in internal units.
    event::InitialBox initial_box(const ads::Domain& dom) const;
    // Internal full state for a physical point of the root-domain components.
    std::vector<double> initial_state(std::span<const double> point) const;

    // x_e* (internal) converted to physical units and divided by the error
    // scales: the quantity the split trigger looks at.
    std::vector<double> error_weights() const;
    std::span<const double> error_scales() const { return error_scales_; }

    virtual std::vector<std::string> output_names() const = 0;
    virtual std::vector<double> outputs(double t, std::span<const double> x) const = 0;
    virtual std::vector<da::TaylorPoly> outputs(const da::TaylorPoly& t, std::span<const da::TaylorPoly> x) const = 0;
    virtual std::string metric_name() const = 0;
    virtual double metric(std::span<const double> outputs) const = 0;
    virtual da::TaylorPoly metric(std::span<const da::TaylorPoly> outputs) const = 0;

    double threshold() const { return threshold_; }
    const ads::AdsConfig& ads() const { return ads_; }
    const ival::BoundOptions& bound_options() const { return bounds_; }
    const ctrl::Controller* controller() const { return controller_.get(); }

    // Config as parsed, relative paths resolved.
    const nlohmann::json& config() const { return config_; }

protected:
    Scenario() = default;
    void load_common(const nlohmann::json& cfg, const std::filesystem::path& base_dir, std::size_t state_dim);

    event::EventSpec event_;
    double t_max_ = 0.0;
    flow::StepControl step_;
    std::vector<double> units_;
    double time_unit_ = 1.0;
    std::vector<double> nominal_;
    RootDomain root_;
    std::vector<double> error_scales_;
    double threshold_ = 0.0;
    ads::AdsConfig ads_;
    ival::BoundOptions bounds_;
    std::shared_ptr<const ctrl::Controller> controller_;
    nlohmann::json config_;
};

// Throws ConfigError on schema violations.
std::unique_ptr<Scenario> make_scenario(const nlohmann::json& cfg, const std::filesystem::path& base_dir);
std::unique_ptr<Scenario> load_scenario(const std::filesystem::path& path);

} // namespace dacert::scen

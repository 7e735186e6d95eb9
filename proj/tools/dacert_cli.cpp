// dacert: verify / mc-check / plot-data / siren-init

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dacert/controllers.hpp"
#include "dacert/errors.hpp"
#include "dacert/pipeline.hpp"
#include "dacert/scenarios/scenario.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_internal = 3;

using namespace dacert;

void write_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

int cmd_verify(const std::string& config, const std::string& out_path, int workers, std::uint64_t seed) {
    const auto sc = scen::load_scenario(config);
    const auto map = pipeline::verify(*sc, workers, seed);
    write_file(out_path, pipeline::dump(map));
    std::size_t safe = 0, unsafe = 0;
    for (const auto& r : map.subdomains) {
        safe += r.verdict == pipeline::Verdict::safe;
        unsafe += r.verdict == pipeline::Verdict::unsafe;
    }
    std::cout << "subdomains " << map.subdomains.size() << " safe " << safe << " unsafe " << unsafe
              << " indeterminate " << map.indeterminate_count << " safe_volume_fraction " << map.fractions.safe
              << " max_metric_bound " << map.max_metric_bound << "\n";
    if (map.indeterminate_count > 0) {
        std::cerr << "warning: " << map.indeterminate_count << " subdomain(s) are indeterminate\n";
    }
    return exit_ok;
}

int cmd_mc_check(const std::string& map_path, std::size_t samples, std::uint64_t seed, bool zero_remainder,
                 int workers, const std::string& out_path) {
    const auto map = pipeline::read_map(map_path);
    const auto sc = scen::make_scenario(map.config, std::filesystem::path(map_path).parent_path());
    pipeline::McOptions opts;
    opts.samples = samples;
    opts.seed = seed;
    opts.zero_remainder = zero_remainder;
    opts.workers = workers;
    const auto rep = pipeline::mc_check(*sc, map, opts);
    auto doc = pipeline::to_json(rep);
    doc["seed"] = seed;
    doc["zero_remainder"] = zero_remainder;
    const auto text = doc.dump(1) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        write_file(out_path, text);
        std::cout << "samples " << rep.samples << " violations " << rep.violations << "\n";
    }
    return exit_ok;
}

int cmd_plot_data(const std::string& map_path, const std::string& out_path) {
    const auto map = pipeline::read_map(map_path);
    std::ostringstream csv;
    pipeline::write_plot_csv(csv, map);
    write_file(out_path, csv.str());
    return exit_ok;
}

struct SirenInitArgs {
    std::vector<std::size_t> dims;
    double omega = 30.0;
    std::uint64_t seed = 0;
    std::vector<double> input_offset;
    std::vector<double> input_scale;
    std::vector<double> output_scale;
    bool normalize = false;
    std::string out;
};

int cmd_siren_init(const SirenInitArgs& a) {
    ctrl::SirenNetwork net;
    try {
        net = ctrl::init_siren(a.dims, a.omega, a.seed);
    } catch (const DimensionError& e) {
        throw ConfigError(e.what());
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    if (!a.input_offset.empty()) {
        net.input.offset = a.input_offset;
    }
    if (!a.input_scale.empty()) {
        net.input.scale = a.input_scale;
    }
    if (!a.output_scale.empty()) {
        net.output.scale = a.output_scale;
        net.output.offset.assign(a.output_scale.size(), 0.0);
    }
    if (net.input.offset.size() != net.input.scale.size()) {
        throw ConfigError("siren-init: input offset and scale need the same length");
    }
    net.normalize_output = a.normalize;
    net.validate();
    ctrl::save_siren(net, a.out);
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Polynomial event-map verification of closed-loop trajectories"};
    app.require_subcommand(1);

    std::string config, out, map_path;
    int workers = 1;
    std::uint64_t seed = 0;
    std::size_t samples = 1000;
    bool zero_remainder = false;

    auto* verify = app.add_subcommand("verify", "Build the safety map of a scenario config");
    verify->add_option("--config", config, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
    verify->add_option("--out", out, "Safety map output path")->required();
    verify->add_option("--workers", workers, "ADS workers; 0 = all cores, 1 = serial")->check(CLI::NonNegativeNumber);
    verify->add_option("--seed", seed, "Seed recorded in the map");

    auto* mc = app.add_subcommand("mc-check", "Monte-Carlo containment check of a safety map");
    mc->add_option("--map", map_path, "Safety map (JSON)")->required()->check(CLI::ExistingFile);
    mc->add_option("--samples", samples, "Samples per ok subdomain")->required();
    mc->add_option("--seed", seed, "Sampling seed")->required();
    mc->add_flag("--zero-remainder", zero_remainder, "Check against the bounds without the remainder");
    mc->add_option("--workers", workers, "Sampling workers; 0 = all cores, 1 = serial")->check(CLI::NonNegativeNumber);
    mc->add_option("--out", out, "Report path (default: stdout)");

    auto* plot = app.add_subcommand("plot-data", "Flatten a safety map to CSV");
    plot->add_option("--map", map_path, "Safety map (JSON)")->required()->check(CLI::ExistingFile);
    plot->add_option("--out", out, "CSV output path")->required();

    SirenInitArgs sa;
    auto* init = app.add_subcommand("siren-init", "Write a freshly initialised SIREN weights file");
    init->add_option("--dims", sa.dims, "Layer sizes: inputs, hidden..., outputs")->required()->delimiter(',');
    init->add_option("--omega", sa.omega, "Sine frequency of the hidden layers");
    init->add_option("--seed", sa.seed, "Initialisation seed");
    init->add_option("--input-offset", sa.input_offset, "Input offset, physical units")->delimiter(',');
    init->add_option("--input-scale", sa.input_scale, "Input scale")->delimiter(',');
    init->add_option("--output-scale", sa.output_scale, "Output scale")->delimiter(',');
    init->add_flag("--normalize-output", sa.normalize, "Normalise the output to a unit vector");
    init->add_option("--out", sa.out, "Weights output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_config;
    }

    try {
        if (*verify) {
            return cmd_verify(config, out, workers, seed);
        }
        if (*mc) {
            return cmd_mc_check(map_path, samples, seed, zero_remainder, workers, out);
        }
        if (*plot) {
            return cmd_plot_data(map_path, out);
        }
        if (*init) {
            return cmd_siren_init(sa);
        }
    } catch (const dacert::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return exit_internal;
    }
    return exit_internal;
}

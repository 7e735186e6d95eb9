// Serial reference vs OpenMP kernels: ADS frontier expansion and MC sampling.

#include <chrono>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dacert/pipeline.hpp"

using namespace dacert;

namespace {

template <class F>
double seconds(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool same_leaves(const std::vector<ads::Subdomain>& a, const std::vector<ads::Subdomain>& b) {
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].domain.center != b[i].domain.center || a[i].domain.half_width != b[i].domain.half_width ||
            a[i].error.max != b[i].error.max) {
            return false;
        }
    }
    return true;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Serial vs parallel timing of the ADS frontier and Monte-Carlo sampling"};
    std::string config = std::string(DACERT_CONFIG_DIR) + "/earth_mars.json";
    std::size_t samples = 50;
    int workers = 0;
    app.add_option("--config", config, "Scenario config")->check(CLI::ExistingFile);
    app.add_option("--samples", samples, "MC samples per subdomain");
    app.add_option("--workers", workers, "OpenMP workers; 0 = all");
    CLI11_PARSE(app, argc, argv);

    int threads = 1;
#ifdef _OPENMP
    threads = workers > 0 ? workers : omp_get_max_threads();
#endif
    const auto sc = scen::load_scenario(config);
    const unsigned order = sc->ads().order;
    const ads::Expander expander = [&](const ads::Domain& d) { return pipeline::expand(*sc, d, order); };
    const auto root = sc->root_domain();

    std::vector<ads::Subdomain> serial, parallel;
    const double t_ser = seconds([&] { serial = ads::run_serial(root, sc->ads(), expander); });
    const double t_par = seconds([&] { parallel = ads::run_parallel(root, sc->ads(), expander, workers); });
    std::printf("threads %d\n", threads);
    std::printf("ads    leaves %zu  serial %.3f s  parallel %.3f s  speedup %.2f  identical %s\n", serial.size(), t_ser,
                t_par, t_ser / t_par, same_leaves(serial, parallel) ? "yes" : "NO");

    const auto map = pipeline::verify(*sc, workers);
    pipeline::McOptions opts;
    opts.samples = samples;
    opts.workers = workers;
    pipeline::McReport a, b;
    const double m_ser = seconds([&] { a = pipeline::mc_check_serial(*sc, map, opts); });
    const double m_par = seconds([&] { b = pipeline::mc_check(*sc, map, opts); });
    std::printf("mc     samples %zu  serial %.3f s  parallel %.3f s  speedup %.2f  identical %s\n", a.samples, m_ser,
                m_par, m_ser / m_par, pipeline::to_json(a) == pipeline::to_json(b) ? "yes" : "NO");
    return 0;
}

// Compares the serial reference trial loop against the OpenMP one on a
// medium-sized experiment and confirms the aggregates match bit for bit.

#include <chrono>
#include <cstdio>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pubpriv/harness.hpp"

using namespace pubpriv;

namespace {

double time_run(const harness::ExperimentConfig& config, harness::Execution exec,
                harness::ExperimentResult& out) {
    const auto t0 = std::chrono::steady_clock::now();
    out = harness::run_experiment(config, exec);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

int main(int argc, char** argv) {
    harness::ExperimentConfig config;
    config.problem = harness::Problem::mean;
    config.mean = {.d = 40, .n = 1500, .m = 1500, .tau = 0.3};
    config.mechanism.kind = mechanisms::MechanismKind::BayesPosterior;
    config.trials = 1500;
    config.seed = RngSeed{2024, 0};
    config.outputs = {harness::Aggregate::err_l2, harness::Aggregate::err_l2_sq,
                      harness::Aggregate::sum_total, harness::Aggregate::sum_priv};
    for (int i = 1; i + 1 < argc; i += 2) {
        if (!std::strcmp(argv[i], "--trials")) config.trials = std::atoi(argv[i + 1]);
        if (!std::strcmp(argv[i], "--d")) config.mean.d = std::atoi(argv[i + 1]);
        if (!std::strcmp(argv[i], "--n")) config.mean.n = std::atoi(argv[i + 1]);
        if (!std::strcmp(argv[i], "--m")) config.mean.m = std::atoi(argv[i + 1]);
    }

#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; both runs are serial\n");
#endif
    std::printf("config: d=%d n=%d m=%d trials=%d\n", config.mean.d, config.mean.n, config.mean.m,
                config.trials);

    harness::ExperimentResult serial, parallel;
    const double t_serial = time_run(config, harness::Execution::serial, serial);
    const double t_parallel = time_run(config, harness::Execution::parallel, parallel);

    bool identical = serial.stats.size() == parallel.stats.size();
    for (std::size_t i = 0; identical && i < serial.stats.size(); ++i) {
        identical = serial.stats[i].mean == parallel.stats[i].mean &&
                    serial.stats[i].stderr_ == parallel.stats[i].stderr_ &&
                    serial.stats[i].count == parallel.stats[i].count;
    }

    std::printf("serial reference : %8.3f s\n", t_serial);
    std::printf("openmp trial loop: %8.3f s\n", t_parallel);
    std::printf("speedup          : %8.2fx\n", t_serial / t_parallel);
    std::printf("aggregates bit-identical: %s\n", identical ? "yes" : "NO");
    return identical ? 0 : 1;
}

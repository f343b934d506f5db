// Times the study harness with the serial driver and the OpenMP driver on the
// same grid and checks that both produce identical rows.

#include <chrono>
#include <cstdio>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "swhawkes/io.hpp"
#include "swhawkes/study.hpp"

using namespace swhawkes;

namespace {

double time_run(const StudyConfig& cfg, int jobs, std::string& csv) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<StudyRow> rows = run_study(cfg, jobs);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    csv = study_csv(rows);
    return elapsed;
}

}  // namespace

int main(int argc, char** argv) {
    StudyConfig cfg;
    cfg.q_stars = {1, 2};
    cfg.intensities = {1.0};
    cfg.coefs = {1.0, 2.0};
    cfg.replicates = argc > 1 ? std::atoi(argv[1]) : 4;
    cfg.q_max = 3;
    cfg.seed = 42;

    int jobs = 4;
#ifdef _OPENMP
    jobs = argc > 2 ? std::atoi(argv[2]) : omp_get_max_threads();
#endif

    std::string serial_csv, parallel_csv;
    const double serial_s = time_run(cfg, 1, serial_csv);
    const double parallel_s = time_run(cfg, jobs, parallel_csv);

    std::printf("cells: %zu  rows/cell: %zu\n",
                cfg.q_stars.size() * cfg.intensities.size() * cfg.replicates,
                cfg.coefs.size() * static_cast<size_t>(cfg.q_max));
    std::printf("serial:   %8.3f s\n", serial_s);
    std::printf("parallel: %8.3f s  (%d jobs)\n", parallel_s, jobs);
    std::printf("speedup:  %8.2fx\n", serial_s / parallel_s);
    const bool identical = serial_csv == parallel_csv;
    std::printf("identical output: %s\n", identical ? "yes" : "NO");
    return identical ? 0 : 1;
}

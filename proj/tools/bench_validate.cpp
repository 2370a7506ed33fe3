// Benchmark of the Monte Carlo validator: serial reference loop against the
// OpenMP pool, on the bundled oscillator tube. Prints one line per pool
// size plus the speedup over serial; results must agree bit-for-bit.
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "reach/model.hpp"
#include "reach/parallel.hpp"
#include "reach/tube.hpp"

namespace {

double time_once(const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    const std::size_t samples = argc > 1 ? std::stoul(argv[1]) : 2000;
    const std::uint64_t seed = 42;

    const reach::Model model = reach::load_model(MODELS_DIR "/harmonic_oscillator.json");
    const reach::ReachTube tube =
        reach::reach_tube(model, {1.0, 0.0, 1.0}, {0.1, 0.02}, 4.0 * 3.14159265358979323846, 200);

    reach::ValidationReport serial_report;
    const double t_serial = time_once(
        [&] { serial_report = reach::validate_tube_serial(model, tube, samples, seed); });
    std::printf("serial           %8.3f s   max_ratio=%.12f violations=%zu\n", t_serial,
                serial_report.max_ratio, serial_report.violations);

    const int max_threads = omp_get_max_threads();
    for (int threads = 1; threads <= max_threads; threads *= 2) {
        reach::ValidationReport report;
        const double t = time_once(
            [&] { report = reach::validate_tube(model, tube, samples, seed, threads); });
        const bool identical = report.max_ratio == serial_report.max_ratio &&
                               report.violations == serial_report.violations &&
                               report.per_block_max_ratio == serial_report.per_block_max_ratio;
        std::printf("openmp %2d thread %8.3f s   speedup=%.2fx   identical=%s\n", threads, t,
                    t_serial / t, identical ? "yes" : "NO");
        if (!identical) return 1;
    }
    return 0;
}

// Wall-time comparison of the serial reference kernels against the
// OpenMP-parallel ones on representative sizes, with checksum equality as a
// correctness gate.  Build with -fopenmp to see a speedup; without it the
// parallel entry points fall back to the serial code path.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "shewave/kernels.hpp"

namespace {

double now_s() {
#ifdef _OPENMP
    return omp_get_wtime();
#else
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
#endif
}

std::uint64_t rng_state = 0x5EEDBA5EULL;
double uniform01() {
    rng_state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = rng_state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return static_cast<double>((z ^ (z >> 31)) >> 11) * 0x1.0p-53;
}

struct timing {
    double serial_s = 0.0;
    double parallel_s = 0.0;
    double checksum_serial = 0.0;
    double checksum_parallel = 0.0;
};

void report(const char* name, const timing& t) {
    const bool equal = t.checksum_serial == t.checksum_parallel; // bitwise: kernels promise determinism
    std::printf("%-16s serial %8.3f ms   parallel %8.3f ms   speedup %5.2fx   checksums %s\n", name,
                t.serial_s * 1e3, t.parallel_s * 1e3, t.serial_s / t.parallel_s, equal ? "equal" : "DIFFER");
}

double argmin_probe(std::size_t index, const void*) {
    const double x = static_cast<double>(index) * 1e-6;
    return std::cos(x * 37.0) + 0.3 * std::sin(x * 101.0) + x * 1e-3;
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("openmp enabled, max threads %d\n", omp_get_max_threads());
#else
    std::printf("openmp not enabled; parallel entry points run the serial path\n");
#endif

    // fourier projection: one long trace, 16 orders
    {
        const std::size_t count = std::size_t(1) << 20;
        const double dt = 1e-7, omega = 2.0 * 3.14159265358979 / (count * dt);
        std::vector<double> samples(count);
        for (std::size_t n = 0; n < count; ++n) samples[n] = uniform01() - 0.5;
        std::vector<int> orders;
        for (int p = 1; p <= 31; p += 2) orders.push_back(p);

        timing t;
        double t0 = now_s();
        const auto serial = shewave::kernels::fourier_project_serial(samples.data(), count, dt, omega, orders);
        t.serial_s = now_s() - t0;
        t0 = now_s();
        const auto parallel = shewave::kernels::fourier_project_parallel(samples.data(), count, dt, omega, orders);
        t.parallel_s = now_s() - t0;
        for (std::size_t k = 0; k < serial.size(); ++k) {
            t.checksum_serial += serial[k].a + serial[k].b;
            t.checksum_parallel += parallel[k].a + parallel[k].b;
        }
        report("fourier_project", t);
    }

    // edge sums: many candidate angle sets, as in the discrete refinement scan
    {
        const std::size_t sets = 20000, edges = 6;
        std::vector<double> angles(sets * edges);
        for (auto& a : angles) a = uniform01() * 1.5;
        const std::vector<int> steps = {-2, 2, -2, 2, -2, 2};
        std::vector<int> orders;
        for (int p = 1; p <= 35; p += 2) orders.push_back(p);

        timing t;
        double t0 = now_s();
        const auto serial =
            shewave::kernels::edge_sums_serial(angles.data(), sets, edges, steps.data(), -1, orders);
        t.serial_s = now_s() - t0;
        t0 = now_s();
        const auto parallel =
            shewave::kernels::edge_sums_parallel(angles.data(), sets, edges, steps.data(), -1, orders);
        t.parallel_s = now_s() - t0;
        for (std::size_t k = 0; k < serial.size(); ++k) {
            t.checksum_serial += serial[k];
            t.checksum_parallel += parallel[k];
        }
        report("edge_sums", t);
    }

    // current fill: experiment-2 sized table at high oversampling
    {
        const std::size_t cycles = 3888;
        const int spc = 256;
        std::vector<int> levels(cycles);
        std::vector<long long> prefix(cycles);
        long long acc = 0;
        for (std::size_t c = 0; c < cycles; ++c) {
            levels[c] = uniform01() < 0.5 ? -1 : 1;
            prefix[c] = acc;
            acc += levels[c];
        }
        std::vector<double> out_serial(cycles * spc), out_parallel(cycles * spc);

        timing t;
        double t0 = now_s();
        shewave::kernels::fill_current_serial(levels.data(), prefix.data(), cycles, spc, 1e-3, 0.5,
                                              out_serial.data());
        t.serial_s = now_s() - t0;
        t0 = now_s();
        shewave::kernels::fill_current_parallel(levels.data(), prefix.data(), cycles, spc, 1e-3, 0.5,
                                                out_parallel.data());
        t.parallel_s = now_s() - t0;
        for (std::size_t n = 0; n < out_serial.size(); ++n) {
            t.checksum_serial += out_serial[n];
            t.checksum_parallel += out_parallel[n];
        }
        report("fill_current", t);
    }

    // argmin scan: box-scan sized candidate sweep
    {
        const std::size_t count = 5 * 5 * 5 * 5 * 5 * 5 * 64;
        timing t;
        double t0 = now_s();
        const auto serial = shewave::kernels::argmin_scan_serial(count, argmin_probe, nullptr);
        t.serial_s = now_s() - t0;
        t0 = now_s();
        const auto parallel = shewave::kernels::argmin_scan_parallel(count, argmin_probe, nullptr);
        t.parallel_s = now_s() - t0;
        t.checksum_serial = serial.value + static_cast<double>(serial.index);
        t.checksum_parallel = parallel.value + static_cast<double>(parallel.index);
        report("argmin_scan", t);
    }
    return 0;
}

#include "shewave/kernels.hpp"

#include <cmath>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace shewave::kernels {

namespace {

// sin(z)/z with the small-argument series so z = 0 is exact.
double sinc(double z) {
    if (std::abs(z) < 1e-8) return 1.0 - z * z / 6.0;
    return std::sin(z) / z;
}

// sin(p*pi/2) is exactly 0 or +-1; avoid trig roundoff at the boundary.
double quarter_sine(int p) {
    switch (((p % 4) + 4) % 4) {
    case 1: return 1.0;
    case 3: return -1.0;
    default: return 0.0;
    }
}

// Shared per-order bodies: the parallel variants run the identical code per
// output element, so results are bitwise equal to the serial reference.

ab_pair project_one(const double* samples, std::size_t count, double dt, double omega, int order) {
    const double step = order * omega * dt;
    double c = 0.0, s = 0.0;
    for (std::size_t n = 0; n < count; ++n) {
        const double phase = step * static_cast<double>(n);
        c += samples[n] * std::cos(phase);
        s += samples[n] * std::sin(phase);
    }
    const double half = 0.5 * step;
    const double corr = sinc(half) * sinc(half); // exact for piecewise-linear inputs
    const double scale = 2.0 / static_cast<double>(count) * corr;
    return ab_pair{c * scale, s * scale};
}

double edge_sum_one(const double* angles, std::size_t edges, const int* steps, int boundary_step, int order) {
    double sum = 0.0;
    for (std::size_t q = 0; q < edges; ++q) sum += steps[q] * std::sin(order * angles[q]);
    sum += boundary_step * quarter_sine(order);
    return sum;
}

} // namespace

double edge_sum_single(const double* angles_rad, std::size_t edges, const int* steps, int boundary_step, int order) {
    return edge_sum_one(angles_rad, edges, steps, boundary_step, order);
}

std::vector<ab_pair> fourier_project_serial(const double* samples, std::size_t count, double dt, double omega,
                                            const std::vector<int>& orders) {
    std::vector<ab_pair> out(orders.size());
    for (std::size_t k = 0; k < orders.size(); ++k) out[k] = project_one(samples, count, dt, omega, orders[k]);
    return out;
}

std::vector<ab_pair> fourier_project_parallel(const double* samples, std::size_t count, double dt, double omega,
                                              const std::vector<int>& orders) {
    std::vector<ab_pair> out(orders.size());
    const long n = static_cast<long>(orders.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long k = 0; k < n; ++k) out[k] = project_one(samples, count, dt, omega, orders[k]);
    return out;
}

std::vector<ab_pair> fourier_project(const double* samples, std::size_t count, double dt, double omega,
                                     const std::vector<int>& orders, bool parallel) {
    return parallel ? fourier_project_parallel(samples, count, dt, omega, orders)
                    : fourier_project_serial(samples, count, dt, omega, orders);
}

std::vector<double> edge_sums_serial(const double* angles_rad, std::size_t sets, std::size_t edges_per_set,
                                     const int* steps, int boundary_step, const std::vector<int>& orders) {
    std::vector<double> out(sets * orders.size());
    for (std::size_t s = 0; s < sets; ++s)
        for (std::size_t k = 0; k < orders.size(); ++k)
            out[s * orders.size() + k] =
                edge_sum_one(angles_rad + s * edges_per_set, edges_per_set, steps, boundary_step, orders[k]);
    return out;
}

std::vector<double> edge_sums_parallel(const double* angles_rad, std::size_t sets, std::size_t edges_per_set,
                                       const int* steps, int boundary_step, const std::vector<int>& orders) {
    std::vector<double> out(sets * orders.size());
    const long n = static_cast<long>(sets);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long s = 0; s < n; ++s)
        for (std::size_t k = 0; k < orders.size(); ++k)
            out[static_cast<std::size_t>(s) * orders.size() + k] = edge_sum_one(
                angles_rad + static_cast<std::size_t>(s) * edges_per_set, edges_per_set, steps, boundary_step,
                orders[k]);
    return out;
}

std::vector<double> edge_sums(const double* angles_rad, std::size_t sets, std::size_t edges_per_set, const int* steps,
                              int boundary_step, const std::vector<int>& orders, bool parallel) {
    return parallel ? edge_sums_parallel(angles_rad, sets, edges_per_set, steps, boundary_step, orders)
                    : edge_sums_serial(angles_rad, sets, edges_per_set, steps, boundary_step, orders);
}

namespace {

void fill_cycle(const int* levels, const long long* prefix, std::size_t c, int samples_per_cycle, double scale,
                double offset, double* out) {
    const double base = static_cast<double>(prefix[c]);
    const double lev = static_cast<double>(levels[c]);
    for (int r = 0; r < samples_per_cycle; ++r) {
        const double frac = static_cast<double>(r) / static_cast<double>(samples_per_cycle);
        out[c * static_cast<std::size_t>(samples_per_cycle) + static_cast<std::size_t>(r)] =
            scale * (base + lev * frac) - offset;
    }
}

} // namespace

void fill_current_serial(const int* levels, const long long* prefix, std::size_t cycles, int samples_per_cycle,
                         double scale, double offset, double* out) {
    for (std::size_t c = 0; c < cycles; ++c) fill_cycle(levels, prefix, c, samples_per_cycle, scale, offset, out);
}

void fill_current_parallel(const int* levels, const long long* prefix, std::size_t cycles, int samples_per_cycle,
                           double scale, double offset, double* out) {
    const long n = static_cast<long>(cycles);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long c = 0; c < n; ++c)
        fill_cycle(levels, prefix, static_cast<std::size_t>(c), samples_per_cycle, scale, offset, out);
}

void fill_current(const int* levels, const long long* prefix, std::size_t cycles, int samples_per_cycle, double scale,
                  double offset, double* out, bool parallel) {
    if (parallel)
        fill_current_parallel(levels, prefix, cycles, samples_per_cycle, scale, offset, out);
    else
        fill_current_serial(levels, prefix, cycles, samples_per_cycle, scale, offset, out);
}

scan_result argmin_scan_serial(std::size_t count, double (*value)(std::size_t, const void*), const void* ctx) {
    scan_result best{0, value(0, ctx)};
    for (std::size_t i = 1; i < count; ++i) {
        const double v = value(i, ctx);
        if (v < best.value) best = scan_result{i, v};
    }
    return best;
}

scan_result argmin_scan_parallel(std::size_t count, double (*value)(std::size_t, const void*), const void* ctx) {
    scan_result best{0, value(0, ctx)};
#ifdef _OPENMP
#pragma omp parallel
    {
        scan_result local{count, 0.0};
        bool any = false;
#pragma omp for schedule(static) nowait
        for (long i = 1; i < static_cast<long>(count); ++i) {
            const double v = value(static_cast<std::size_t>(i), ctx);
            if (!any || v < local.value || (v == local.value && static_cast<std::size_t>(i) < local.index)) {
                local = scan_result{static_cast<std::size_t>(i), v};
                any = true;
            }
        }
        if (any) {
#pragma omp critical
            {
                // total order on (value, index) makes the merge order irrelevant
                if (local.value < best.value || (local.value == best.value && local.index < best.index)) best = local;
            }
        }
    }
#else
    for (std::size_t i = 1; i < count; ++i) {
        const double v = value(i, ctx);
        if (v < best.value) best = scan_result{i, v};
    }
#endif
    return best;
}

scan_result argmin_scan(std::size_t count, double (*value)(std::size_t, const void*), const void* ctx, bool parallel) {
    return parallel ? argmin_scan_parallel(count, value, ctx) : argmin_scan_serial(count, value, ctx);
}

} // namespace shewave::kernels

#pragma once

#include <cstddef>
#include <vector>

namespace shewave::kernels {

// Numeric kernels exist in two variants: a plain serial reference and an
// OpenMP version parallelized strictly over independent outputs, so both
// produce bit-identical results regardless of thread count.  Tests assert
// the equivalence; tools/bench_kernels compares wall time.

struct ab_pair {
    double a = 0.0; // cosine coefficient
    double b = 0.0; // sine coefficient
};

// Fourier coefficients of the periodic piecewise-linear interpolant through
// uniformly spaced samples covering an integer number of fundamental periods:
// a plain discrete Fourier sum per order, scaled by sinc^2(p*omega*dt/2),
// which makes the projection exact for piecewise-linear signals whose kinks
// lie on sample points and second-order accurate for smooth ones.
std::vector<ab_pair> fourier_project_serial(const double* samples, std::size_t count, double dt,
                                            double omega, const std::vector<int>& orders);
std::vector<ab_pair> fourier_project_parallel(const double* samples, std::size_t count, double dt,
                                              double omega, const std::vector<int>& orders);
std::vector<ab_pair> fourier_project(const double* samples, std::size_t count, double dt,
                                     double omega, const std::vector<int>& orders, bool parallel);

// Edge-sum S_p = sum_q step_q sin(p*alpha_q) + boundary_step*sin(p*pi/2).
double edge_sum_single(const double* angles_rad, std::size_t edges, const int* steps, int boundary_step, int order);

// The same sum for a batch of angle sets sharing one step pattern; parallel
// over sets.  angles_rad is row-major [set][edge].
std::vector<double> edge_sums_serial(const double* angles_rad, std::size_t sets, std::size_t edges_per_set,
                                     const int* steps, int boundary_step, const std::vector<int>& orders);
std::vector<double> edge_sums_parallel(const double* angles_rad, std::size_t sets, std::size_t edges_per_set,
                                       const int* steps, int boundary_step, const std::vector<int>& orders);
std::vector<double> edge_sums(const double* angles_rad, std::size_t sets, std::size_t edges_per_set,
                              const int* steps, int boundary_step, const std::vector<int>& orders, bool parallel);

// Piecewise-linear current fill: given per-cycle integer voltage levels and
// their integer prefix sums, produce samples_per_cycle samples per cycle of
//   i(t) = scale * (prefix + level * fraction) - offset.
// Parallel over cycles; every sample depends only on its own cycle.
void fill_current_serial(const int* levels, const long long* prefix, std::size_t cycles,
                         int samples_per_cycle, double scale, double offset, double* out);
void fill_current_parallel(const int* levels, const long long* prefix, std::size_t cycles,
                           int samples_per_cycle, double scale, double offset, double* out);
void fill_current(const int* levels, const long long* prefix, std::size_t cycles,
                  int samples_per_cycle, double scale, double offset, double* out, bool parallel);

// Deterministic argmin over an enumerated candidate set: evaluates
// value(index) for index in [0, count) and returns the smallest index
// attaining the minimum (ties by lower index, making the result independent
// of evaluation order).  Parallel over candidates.
struct scan_result {
    std::size_t index = 0;
    double value = 0.0;
};
scan_result argmin_scan_serial(std::size_t count, double (*value)(std::size_t, const void*), const void* ctx);
scan_result argmin_scan_parallel(std::size_t count, double (*value)(std::size_t, const void*), const void* ctx);
scan_result argmin_scan(std::size_t count, double (*value)(std::size_t, const void*), const void* ctx,
                        bool parallel);

} // namespace shewave::kernels

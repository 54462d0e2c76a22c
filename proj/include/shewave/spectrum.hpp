#pragma once

#include <vector>

#include "shewave/circuit.hpp"
#include "shewave/grid.hpp"
#include "shewave/schedule.hpp"

namespace shewave {

enum class membership { selected, eliminated, other };

struct spectrum_line {
    int order = 0;
    double freq_hz = 0.0;
    double a = 0.0;        // cosine coefficient, amperes
    double b = 0.0;        // sine coefficient, amperes (signed)
    double m = 0.0;        // modulation index (p*omega*L/V0)*b_p, signed
    double m_scaled = 0.0; // |m|/p, the tabulated comparison quantity
    membership member = membership::other;
};

struct spectrum_report {
    double omega = 0.0;
    bool quarter_symmetric = false; // cosine parts negligible and folded
    bool has_modulation = false;    // m fields populated (circuit known)
    std::vector<spectrum_line> lines;

    const spectrum_line* find(int order) const;
};

// Closed-form coil-current coefficients from the switching angles:
//   b_p = -(4*V0 / (p^2*pi*omega*L)) * S_p,
//   S_p = sum_q step_q*sin(p*alpha_q) + boundary_step*sin(p*pi/2),
// odd p only (even harmonics vanish by quarter-wave symmetry).
spectrum_report analytic_coefficients(const switching_schedule& sched, const circuit_params& circuit,
                                      int max_order);

// Numeric coefficients of a sampled current covering an integer number of
// fundamental periods (see kernels::fourier_project for the projection).
// All orders 1..max_order are reported; when the cosine parts are below
// 1e-9 of the fundamental they are folded into signed b_p.  Modulation
// indices are filled when the circuit is supplied.
struct sampled_signal {
    double sample_dt = 0.0;
    std::vector<double> values;
};
spectrum_report dft_coefficients(const sampled_signal& wave, const timing_grid& grid, int max_order,
                                 const circuit_params* circuit = nullptr);

// 100 * sqrt(sum of squared amplitudes at unselected odd orders <= max_order)
//     / sqrt(sum of squared amplitudes at the selected orders).
double thd(const spectrum_report& report, const std::vector<int>& selected, int max_order);

// Tags each line selected / eliminated / other.
void classify(spectrum_report& report, const std::vector<int>& selected,
              const std::vector<int>& constrained);

} // namespace shewave

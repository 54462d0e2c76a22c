#pragma once

#include <string_view>
#include <vector>

#include "shewave/grid.hpp"

namespace shewave {

// One sinusoidal term  w * sin(p*omega*t + phase).
struct harmonic_component {
    int order = 1;        // p >= 1
    double weight = 1.0;  // > 0
    double phase = 0.0;   // radians, in [0, 2*pi)
};

// Objective waveform  f(t) = sum_p w_p sin(p*omega*t + theta_p).
// Orders are strictly increasing and the fundamental (p = 1) is always the
// first component.
struct objective_signal {
    double omega = 0.0; // fundamental angular frequency, rad/s
    std::vector<harmonic_component> components;

    // Quarter-wave symmetry (odd about t = 0, even about the quarter period)
    // requires every phase to be zero and every order odd.
    bool quarter_symmetric() const;
};

objective_signal make_objective(double omega, std::vector<harmonic_component> components);

// Built-in signal families: weights 1/p unless noted.
//   f1: orders 1,3,9,27,81
//   f2: orders 1,3,7,17
//   f3: orders 1,2,4,6,8,10,12,14
//   f4: orders 1..8
//   f5: f1's orders/weights with phases (0, pi/4, pi/7, pi/5, pi/6)
objective_signal preset(std::string_view name, double omega);

double eval(const objective_signal& s, double t);
double eval_gradient(const objective_signal& s, double t);

// All interior zeros of the gradient over (0, pi/2) of the fundamental,
// located by bisection after a sign-change prescan at 10x grid resolution,
// rounded to the nearest clock cycle (ties round up).  Duplicates after
// rounding collapse; a zero landing exactly on the quarter boundary is
// dropped.  Requires quarter-wave symmetry.
std::vector<int> gradient_zeros(const objective_signal& s, const timing_grid& grid);

} // namespace shewave

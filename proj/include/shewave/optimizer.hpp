#pragma once

#include <vector>

#include "shewave/grid.hpp"
#include "shewave/schedule.hpp"

namespace shewave {

// Constrained angle-placement problem:
//   minimize   sum_{p in selected} lambda_p * (c_p(alpha) - m_p)^2
//   subject to |c_p(alpha)| <= epsilon_p   for p in constrained,
//              0 <= alpha_1 <= ... <= alpha_N <= pi/2,
// where c_p(alpha) = -(4/(p*pi)) * S_p(alpha) is the modulation index of the
// fixed edge pattern (supply voltage and inductance cancel).  The per-order
// targets m_p are decision variables tied to one shared scale s through the
// target shape, m_p = s * tau_p; the current amplitude at order p goes as
// m_p / p, so tau_p = 1 for every p makes the delivered amplitudes fall off
// as 1/p.  The single scale is what turns the wanted amplitude proportion
// into one degree of freedom instead of |selected| independent ones.
struct optimization_problem {
    switching_schedule pattern; // step pattern + boundary; edge cycles are placeholders
    std::vector<int> selected;
    std::vector<double> lambda;       // per selected order, >= 0
    std::vector<int> constrained;     // disjoint from selected
    std::vector<double> epsilon;      // per constrained order, > 0
    std::vector<double> target_shape; // tau_p per selected order; empty = all 1
    int max_iterations = 400;         // damped-Newton step budget
    int multistart = 4;               // total deterministic starts, the given one included
    double penalty_mu = 1e4;          // discrete refinement constraint penalty

    double tau(std::size_t sel_index) const {
        return target_shape.empty() ? 1.0 : target_shape[sel_index];
    }
};

optimization_problem make_problem(switching_schedule pattern, std::vector<int> selected,
                                  std::vector<double> lambda, std::vector<int> constrained,
                                  std::vector<double> epsilon);

// Objective, constraint values and analytic first derivatives at one point.
struct problem_eval {
    double objective = 0.0;
    std::vector<double> c_selected;    // c_p for p in selected
    std::vector<double> c_constrained; // c_p for p in constrained
    double max_violation = 0.0;        // max(0, |c_p| - eps_p)
    std::vector<double> grad_angles;   // dF/d alpha_q
    std::vector<double> grad_m;        // dF/d m_p (per selected order)
    // Jacobians d c_p / d alpha_q, row-major [order][angle]
    std::vector<std::vector<double>> jac_selected;
    std::vector<std::vector<double>> jac_constrained;
};

problem_eval residuals_and_constraints(const std::vector<double>& angles_rad,
                                       const std::vector<double>& m,
                                       const optimization_problem& problem);

// Shared starting scale: unweighted mean of c_p / tau_p over the selected
// orders at the given angles, replicated per order.
std::vector<double> initial_m(const std::vector<double>& angles_rad, const optimization_problem& problem);

enum class solve_method { interior_point, augmented_lagrangian };

struct solve_options {
    solve_method method = solve_method::interior_point;
    double kkt_tolerance = 1e-8;
};

struct optimization_result {
    std::vector<double> continuous_angles; // radians, one per edge of the pattern
    std::vector<int> quantized_cycles;
    std::vector<double> m; // per selected order (shared scale times tau)
    double objective = 0.0;               // recomputed at continuous_angles
    double max_violation = 0.0;           // recomputed at continuous_angles
    double kkt_stationarity = 0.0;        // projected-gradient norm at exit
    double penalized_quantized = 0.0;     // penalized objective at quantized_cycles
    double max_violation_quantized = 0.0; // threshold violation at quantized_cycles
    int iterations = 0;
    bool converged = false;
};

// Interior-point solve (log barrier, damped Newton, geometric barrier
// decrease) with a feasibility-restoration phase when the start violates the
// thresholds, an augmented-Lagrangian fallback, and deterministic
// multi-start; the returned point is the best by (quantized feasibility,
// penalized quantized objective, continuous objective, lexicographic angles).
// Throws infeasible_thresholds when no feasible point is found.
optimization_result solve(const optimization_problem& problem, const std::vector<double>& initial_angles_rad,
                          const solve_options& options = {});

// Discrete refinement of a continuous solution, minimizing
//   objective + penalty_mu * sum max(0, |c_p| - eps_p)^2
// with the shared scale re-optimized in closed form per candidate.  Small
// instances (at most a million ordered cycle sets) are solved exactly by
// lexicographic enumeration; otherwise each angle is rounded to the nearest
// cycle (ties up) and an exhaustive +-2-cycle box around the rounded point
// is scanned, re-centering on the best candidate until it is its own box
// minimum (deterministic, ties to the lexicographically smallest cycles).
// For more than 8 angles the box degenerates to first-improvement coordinate
// descent with +-1/+-2 moves.  Output is never worse than naive rounding and
// no single +-1-cycle move improves it.
std::vector<int> quantize_refine(const optimization_problem& problem,
                                 const std::vector<double>& continuous_angles_rad);

// Penalized objective of a quantized angle set (shared scale re-optimized);
// +infinity when ordering or range constraints are violated.
double penalized_objective(const optimization_problem& problem, const std::vector<int>& cycles,
                           double* max_violation = nullptr);

} // namespace shewave

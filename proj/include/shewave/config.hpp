#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "shewave/circuit.hpp"
#include "shewave/grid.hpp"
#include "shewave/signal.hpp"

namespace shewave {

// Parsed design configuration.  The file format is flat key = value text in
// [design] / [circuit] / [optimizer] / [export] sections; every physical
// quantity carries its unit in the key name (clock_frequency_MHz,
// inductance_uH, ...).  Unknown keys are errors.
struct design_config {
    timing_grid grid;
    std::string preset_name;                    // empty when explicit harmonics given
    std::vector<harmonic_component> harmonics;  // explicit list (order:weight:phase)
    circuit_params circuit;

    // optimizer block
    std::vector<double> lambda;    // per selected order; defaults to all 1
    std::vector<int> constrained;  // disjoint from the signal orders
    std::vector<double> epsilon;   // per constrained order
    std::optional<double> epsilon_scaled_bound; // eps_p = bound * p when set
    int thd_max_order = 0;         // 0 = default (2 * highest selected + 1)
    int max_iterations = 400;
    int multistart = 4;

    // export block
    int dead_time_cycles = 0;
    int samples_per_cycle = 64;
    int periods = 1;
    std::string schedule_path = "schedule.txt";
    std::string spectrum_path = "spectrum.txt";
    std::string lookup_path = "lookup.txt";

    objective_signal signal() const;            // builds/validates the objective
    std::vector<int> selected_orders() const;   // orders of the signal
    std::vector<double> epsilon_values() const; // explicit list or bound * p
    int effective_thd_max_order() const;
};

design_config parse_config(std::istream& in);
design_config load_config(const std::string& path);

} // namespace shewave

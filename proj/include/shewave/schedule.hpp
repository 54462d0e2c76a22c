#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "shewave/grid.hpp"
#include "shewave/signal.hpp"

namespace shewave {

// One switching instant inside the first quarter period.  `step` counts
// voltage steps of V_0 (|step| >= 1); negative = falling edge.
struct switching_edge {
    int cycle = 0;
    int step = 0;

    friend bool operator==(const switching_edge&, const switching_edge&) = default;
};

// Quarter-period switching pattern.  The full period is produced by
// quarter-wave mirroring (see expand_full_period): the bridge voltage is even
// about t = 0 and odd about the quarter boundary, so the driven current is an
// odd sine series.  The level reached just before the quarter boundary flips
// sign across it; `boundary_edge` records that implied edge (step = -end
// level) when the quarter ends on a nonzero level.
struct switching_schedule {
    timing_grid grid;
    std::vector<switching_edge> edges; // strictly increasing cycles in [0, quarter)
    int start_level = 0;               // level on [0, first edge)
    int level_max = 1;
    std::optional<switching_edge> boundary_edge; // at exactly the quarter boundary

    // level just before the quarter boundary
    int end_level() const;
    // level during clock cycle k of the first quarter, k in [0, quarter)
    std::vector<int> quarter_levels() const;
    std::vector<double> angles_rad() const; // edge cycles * grid.resolution()
};

// Validates ordering, ranges and running level; `boundary_step`, when given,
// must equal minus the end level (the mirror construction allows nothing
// else).  When omitted the boundary edge is derived automatically.
switching_schedule build_schedule(const timing_grid& grid, std::vector<switching_edge> edges,
                                  int start_level, int level_max,
                                  std::optional<int> boundary_step = std::nullopt);

// Same edge pattern, new angles (cycle positions).  Steps, start level and
// boundary handling are preserved; used by the optimizer.
switching_schedule with_angles(const switching_schedule& pattern, const std::vector<int>& cycles);

// Gradient-descent-free initial design: edges at the gradient zeros of the
// objective, alternating double steps through zero (bipolar pattern), start
// level = sign of the gradient at t = 0.
switching_schedule initial_schedule_from_objective(const objective_signal& s, const timing_grid& grid);

// Signed level per clock cycle over the full period.  Satisfies
// seq[k + half] = -seq[k] and seq[cycles-1-k] = seq[k]; consequently the
// expansion has zero mean and only odd sine harmonics.
std::vector<int> expand_full_period(const switching_schedule& sched);

// Gate bitstream for one or two full H-bridges.
//   level_max 1: 4 gates per cycle, bit order (MSB first) HA LA HB LB.
//   level_max 2: 8 gates, cell 1 then cell 2, each HA LA HB LB.
// +1 = high-side A + low-side B, -1 = high-side B + low-side A, 0 = both
// low sides on.  Dead time delays turn-on only, per half bridge.
struct lookup_table {
    timing_grid grid;
    int level_max = 1;
    int dead_time_cycles = 0;
    std::vector<std::uint16_t> gate_words; // one word per clock cycle
    std::vector<int> levels;               // commanded level per cycle (before dead time)

    int gates_per_cycle() const { return level_max == 1 ? 4 : 8; }
};

lookup_table to_lookup_table(const switching_schedule& sched, int dead_time_cycles);

// Gate words for an explicit level sequence (also used when reloading a
// levels-format table from disk).  Throws DeadTimeTooLong when the dead time
// reaches the shortest dwell between level changes.
std::vector<std::uint16_t> assemble_gate_words(const std::vector<int>& levels, int level_max,
                                               int dead_time_cycles);

} // namespace shewave

#include "shewave/schedule.hpp"

#include <algorithm>
#include <string>

#include "shewave/errors.hpp"

namespace shewave {

int switching_schedule::end_level() const {
    int level = start_level;
    for (const auto& e : edges) level += e.step;
    return level;
}

std::vector<int> switching_schedule::quarter_levels() const {
    const int quarter = grid.quarter_cycles();
    std::vector<int> levels(static_cast<std::size_t>(quarter));
    int level = start_level;
    std::size_t next = 0;
    for (int k = 0; k < quarter; ++k) {
        while (next < edges.size() && edges[next].cycle == k) level += edges[next++].step;
        levels[static_cast<std::size_t>(k)] = level;
    }
    return levels;
}

std::vector<double> switching_schedule::angles_rad() const {
    std::vector<double> out;
    out.reserve(edges.size());
    for (const auto& e : edges) out.push_back(e.cycle * grid.resolution());
    return out;
}

switching_schedule build_schedule(const timing_grid& grid, std::vector<switching_edge> edges, int start_level,
                                  int level_max, std::optional<int> boundary_step) {
    make_grid(grid.clock_hz, grid.cycles_per_period); // revalidate grid invariants
    if (level_max < 1) raise(errc::bad_config, "level_max must be >= 1, got " + std::to_string(level_max));
    if (std::abs(start_level) > level_max)
        raise(errc::level_overflow,
              "start level " + std::to_string(start_level) + " exceeds level_max " + std::to_string(level_max));

    const int quarter = grid.quarter_cycles();
    int level = start_level;
    int prev_cycle = -1;
    for (const auto& e : edges) {
        if (e.cycle < 0 || e.cycle >= quarter)
            raise(errc::angle_out_of_range, "edge cycle " + std::to_string(e.cycle) + " outside [0, " +
                                                std::to_string(quarter) +
                                                ") (the quarter boundary itself is the boundary edge)");
        if (e.cycle <= prev_cycle)
            raise(errc::unsorted_edges, "edge cycles must be strictly increasing; cycle " + std::to_string(e.cycle) +
                                            " follows " + std::to_string(prev_cycle));
        if (e.step == 0) raise(errc::invalid_step, "edge at cycle " + std::to_string(e.cycle) + " has step 0");
        level += e.step;
        if (std::abs(level) > level_max)
            raise(errc::level_overflow, "running level " + std::to_string(level) + " exceeds level_max " +
                                            std::to_string(level_max) + " after the edge at cycle " +
                                            std::to_string(e.cycle));
        prev_cycle = e.cycle;
    }

    // The mirror construction flips the waveform across the quarter boundary,
    // so the only admissible boundary edge is the full return to zero.
    std::optional<switching_edge> boundary;
    if (level != 0) boundary = switching_edge{quarter, -level};
    if (boundary_step.has_value()) {
        const int expected = -level;
        if (expected == 0)
            raise(errc::boundary_edge_mismatch,
                  "quarter ends at level 0; a boundary edge (step " + std::to_string(*boundary_step) +
                      ") is not allowed");
        if (*boundary_step != expected)
            raise(errc::boundary_edge_mismatch, "boundary step must be " + std::to_string(expected) +
                                                    " (minus the end level), got " + std::to_string(*boundary_step));
    }

    switching_schedule sched;
    sched.grid = grid;
    sched.edges = std::move(edges);
    sched.start_level = start_level;
    sched.level_max = level_max;
    sched.boundary_edge = boundary;
    return sched;
}

switching_schedule with_angles(const switching_schedule& pattern, const std::vector<int>& cycles) {
    if (cycles.size() != pattern.edges.size())
        raise(errc::bad_config, "angle count " + std::to_string(cycles.size()) + " does not match the pattern's " +
                                    std::to_string(pattern.edges.size()) + " edges");
    std::vector<switching_edge> edges = pattern.edges;
    for (std::size_t q = 0; q < edges.size(); ++q) edges[q].cycle = cycles[q];
    return build_schedule(pattern.grid, std::move(edges), pattern.start_level, pattern.level_max);
}

switching_schedule initial_schedule_from_objective(const objective_signal& s, const timing_grid& grid) {
    const std::vector<int> zeros = gradient_zeros(s, grid); // validates quarter symmetry
    const int start = eval_gradient(s, 0.0) >= 0.0 ? 1 : -1;

    // Bipolar pattern: every edge flips the voltage through zero (double
    // step); the boundary edge returning to zero is derived automatically.
    std::vector<switching_edge> edges;
    edges.reserve(zeros.size());
    int level = start;
    for (int cycle : zeros) {
        edges.push_back({cycle, -2 * level});
        level = -level;
    }
    return build_schedule(grid, std::move(edges), start, 1);
}

std::vector<int> expand_full_period(const switching_schedule& sched) {
    const std::vector<int> quarter = sched.quarter_levels();
    const std::size_t q = quarter.size();
    std::vector<int> full(4 * q);
    for (std::size_t k = 0; k < q; ++k) {
        full[k] = quarter[k];                   // first quarter
        full[q + k] = -quarter[q - 1 - k];      // mirrored and negated
        full[2 * q + k] = -quarter[k];          // second half = negated first half
        full[3 * q + k] = quarter[q - 1 - k];
    }
    return full;
}

namespace {

// Conduction request per half bridge: +1 = high side, -1 = low side.
// Level +1 yields gate nibble 1001, -1 yields 0110, 0 yields 0101 (both
// low sides on: defined freewheel path).
struct leg_state {
    int a = -1;
    int b = -1;
};

leg_state cell_legs(int cell_level) {
    if (cell_level > 0) return {+1, -1};
    if (cell_level < 0) return {-1, +1};
    return {-1, -1};
}

// Splits a stacked level across two cascaded bridges: the first cell
// saturates before the second engages.
void split_level(int level, int cell[2]) {
    const int first = std::clamp(level, -1, 1);
    cell[0] = first;
    cell[1] = level - first;
}

int min_dwell(const std::vector<int>& levels) {
    const std::size_t n = levels.size();
    // circular run lengths of equal consecutive levels
    std::size_t first_change = n;
    for (std::size_t k = 0; k < n; ++k)
        if (levels[k] != levels[0]) {
            first_change = k;
            break;
        }
    if (first_change == n) return static_cast<int>(n); // constant sequence
    int best = static_cast<int>(n);
    std::size_t run_start = first_change;
    for (std::size_t off = 1; off <= n; ++off) {
        const std::size_t idx = (first_change + off) % n;
        if (levels[idx] != levels[(idx + n - 1) % n]) {
            best = std::min(best, static_cast<int>((first_change + off) - run_start));
            run_start = first_change + off;
        }
    }
    return best;
}

} // namespace

lookup_table to_lookup_table(const switching_schedule& sched, int dead_time_cycles) {
    if (sched.level_max != 1 && sched.level_max != 2)
        raise(errc::bad_config,
              "gate tables support level_max 1 (one bridge) or 2 (two bridges), got " + std::to_string(sched.level_max));
    if (dead_time_cycles < 0)
        raise(errc::bad_config, "dead_time_cycles must be >= 0, got " + std::to_string(dead_time_cycles));

    lookup_table table;
    table.grid = sched.grid;
    table.level_max = sched.level_max;
    table.dead_time_cycles = dead_time_cycles;
    table.levels = expand_full_period(sched);
    table.gate_words = assemble_gate_words(table.levels, sched.level_max, dead_time_cycles);
    return table;
}

std::vector<std::uint16_t> assemble_gate_words(const std::vector<int>& levels, int level_max, int dead_time_cycles) {
    const std::size_t n = levels.size();
    const int cells = level_max == 1 ? 1 : 2;

    if (dead_time_cycles > 0) {
        const int dwell = min_dwell(levels);
        if (dead_time_cycles >= dwell)
            raise(errc::dead_time_too_long, "dead time " + std::to_string(dead_time_cycles) +
                                                " cycles >= shortest level dwell " + std::to_string(dwell) +
                                                " cycles");
    }

    std::vector<std::uint16_t> words(n, 0);
    for (int cell = 0; cell < cells; ++cell) {
        // desired conduction per leg, before dead time
        std::vector<leg_state> want(n);
        for (std::size_t k = 0; k < n; ++k) {
            int split[2];
            split_level(levels[k], split);
            want[k] = cell_legs(cells == 1 ? std::clamp(levels[k], -1, 1) : split[cell]);
        }
        // a leg transition keeps both switches off while the turn-on is delayed
        std::vector<std::uint16_t> nibble(n);
        for (std::size_t k = 0; k < n; ++k) {
            const leg_state cur = want[k];
            bool a_on = true, b_on = true;
            if (dead_time_cycles > 0) {
                for (int back = 0; back < dead_time_cycles; ++back) {
                    const std::size_t from = (k + n - 1 - static_cast<std::size_t>(back)) % n;
                    if (want[from].a != cur.a) a_on = false;
                    if (want[from].b != cur.b) b_on = false;
                }
            }
            std::uint16_t bits = 0;
            if (a_on) bits |= cur.a > 0 ? 0b1000 : 0b0100;
            if (b_on) bits |= cur.b > 0 ? 0b0010 : 0b0001;
            nibble[k] = bits;
        }
        const int shift = (cells - 1 - cell) * 4;
        for (std::size_t k = 0; k < n; ++k) words[k] |= static_cast<std::uint16_t>(nibble[k] << shift);
    }

    // internal consistency: complementary switches of one leg never both on
    for (std::size_t k = 0; k < n; ++k)
        for (int cell = 0; cell < cells; ++cell) {
            const std::uint16_t nib = (words[k] >> ((cells - 1 - cell) * 4)) & 0xF;
            if (((nib & 0b1000) && (nib & 0b0100)) || ((nib & 0b0010) && (nib & 0b0001)))
                raise(errc::shoot_through, "cycle " + std::to_string(k) + " drives both switches of one half bridge");
        }
    return words;
}

} // namespace shewave

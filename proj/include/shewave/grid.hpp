#pragma once

#include <numbers>

namespace shewave {

// Clock grid on which switching instants live.  cycles_per_period must be a
// positive multiple of 4 so the quarter-period boundary falls on a cycle
// edge; the fundamental is fully determined by clock / cycles.
struct timing_grid {
    double clock_hz = 0.0;
    int cycles_per_period = 0;

    double omega() const { return 2.0 * std::numbers::pi * clock_hz / cycles_per_period; }
    double fundamental_hz() const { return clock_hz / cycles_per_period; }
    double period_s() const { return cycles_per_period / clock_hz; }
    // angle subtended by one clock cycle, radians
    double resolution() const { return 2.0 * std::numbers::pi / cycles_per_period; }
    int quarter_cycles() const { return cycles_per_period / 4; }

    friend bool operator==(const timing_grid&, const timing_grid&) = default;
};

// Validates and constructs; throws non_positive_frequency / bad_config.
timing_grid make_grid(double clock_hz, int cycles_per_period);

} // namespace shewave

#pragma once

#include <stdexcept>
#include <string>

namespace shewave {

// Every failure mode the library reports.  The enum name doubles as the
// stable token at the front of the exception message, so callers (and
// tests) can match on either.
enum class errc {
    // objective-signal validation
    duplicate_order,
    unsorted_orders,
    invalid_order,
    missing_fundamental,
    non_positive_weight,
    non_positive_frequency,
    phase_out_of_range,
    unknown_preset,
    not_quarter_symmetric,
    // schedule validation
    level_overflow,
    unsorted_edges,
    angle_out_of_range,
    invalid_step,
    boundary_edge_mismatch,
    // gate table generation
    shoot_through,
    dead_time_too_long,
    // spectra / traces
    non_integer_periods,
    empty_selected_set,
    // optimizer
    max_iterations,
    infeasible_thresholds,
    // trace ingestion
    malformed_row,
    non_monotone_time,
    too_short,
    // metrics
    zero_dc_power,
    // configuration / files
    bad_config,
    io_failure,
};

// Category used by the CLI to pick an exit code.
enum class error_category { validation, optimizer, io };

const char* error_name(errc code) noexcept;
error_category category(errc code) noexcept;

class error : public std::runtime_error {
public:
    error(errc code, const std::string& detail)
        : std::runtime_error(std::string(error_name(code)) + ": " + detail), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& detail) { throw error(code, detail); }

} // namespace shewave

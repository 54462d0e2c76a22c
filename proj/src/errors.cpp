#include "shewave/errors.hpp"

namespace shewave {

const char* error_name(errc code) noexcept {
    switch (code) {
    case errc::duplicate_order: return "DuplicateOrder";
    case errc::unsorted_orders: return "UnsortedOrders";
    case errc::invalid_order: return "InvalidOrder";
    case errc::missing_fundamental: return "MissingFundamental";
    case errc::non_positive_weight: return "NonPositiveWeight";
    case errc::non_positive_frequency: return "NonPositiveFrequency";
    case errc::phase_out_of_range: return "PhaseOutOfRange";
    case errc::unknown_preset: return "UnknownPreset";
    case errc::not_quarter_symmetric: return "NotQuarterSymmetric";
    case errc::level_overflow: return "LevelOverflow";
    case errc::unsorted_edges: return "UnsortedEdges";
    case errc::angle_out_of_range: return "AngleOutOfRange";
    case errc::invalid_step: return "InvalidStep";
    case errc::boundary_edge_mismatch: return "BoundaryEdgeMismatch";
    case errc::shoot_through: return "ShootThrough";
    case errc::dead_time_too_long: return "DeadTimeTooLong";
    case errc::non_integer_periods: return "NonIntegerPeriods";
    case errc::empty_selected_set: return "EmptySelectedSet";
    case errc::max_iterations: return "MaxIterations";
    case errc::infeasible_thresholds: return "InfeasibleThresholds";
    case errc::malformed_row: return "MalformedRow";
    case errc::non_monotone_time: return "NonMonotoneTime";
    case errc::too_short: return "TooShort";
    case errc::zero_dc_power: return "ZeroDCPower";
    case errc::bad_config: return "BadConfig";
    case errc::io_failure: return "IoFailure";
    }
    return "UnknownError";
}

error_category category(errc code) noexcept {
    switch (code) {
    case errc::max_iterations:
    case errc::infeasible_thresholds:
        return error_category::optimizer;
    case errc::malformed_row:
    case errc::non_monotone_time:
    case errc::too_short:
    case errc::io_failure:
        return error_category::io;
    default:
        return error_category::validation;
    }
}

} // namespace shewave

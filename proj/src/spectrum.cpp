#include "shewave/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "shewave/errors.hpp"
#include "shewave/kernels.hpp"

namespace shewave {

const spectrum_line* spectrum_report::find(int order) const {
    for (const auto& line : lines)
        if (line.order == order) return &line;
    return nullptr;
}

spectrum_report analytic_coefficients(const switching_schedule& sched, const circuit_params& circuit,
                                      int max_order) {
    if (max_order < 1) raise(errc::bad_config, "max_order must be >= 1, got " + std::to_string(max_order));
    const double omega = sched.grid.omega();
    if (std::abs(circuit.omega - omega) > 1e-9 * omega)
        raise(errc::bad_config, "circuit fundamental does not match the schedule's timing grid");

    const std::vector<double> angles = sched.angles_rad();
    std::vector<int> steps;
    steps.reserve(sched.edges.size());
    for (const auto& e : sched.edges) steps.push_back(e.step);
    const int boundary = sched.boundary_edge ? sched.boundary_edge->step : 0;

    spectrum_report report;
    report.omega = omega;
    report.quarter_symmetric = true;
    report.has_modulation = true;
    const double f1 = sched.grid.fundamental_hz();
    for (int p = 1; p <= max_order; p += 2) {
        const double s_p = kernels::edge_sum_single(angles.data(), angles.size(), steps.data(), boundary, p);
        const double m_p = -4.0 * s_p / (p * std::numbers::pi);
        spectrum_line line;
        line.order = p;
        line.freq_hz = p * f1;
        line.a = 0.0;
        line.b = m_p * circuit.v0 / (p * omega * circuit.inductance);
        line.m = m_p;
        line.m_scaled = std::abs(m_p) / p;
        report.lines.push_back(line);
    }
    return report;
}

spectrum_report dft_coefficients(const sampled_signal& wave, const timing_grid& grid, int max_order,
                                 const circuit_params* circuit) {
    if (max_order < 1) raise(errc::bad_config, "max_order must be >= 1, got " + std::to_string(max_order));
    if (wave.sample_dt <= 0.0) raise(errc::bad_config, "sample_dt must be positive");
    if (wave.values.size() < 2) raise(errc::too_short, "need at least two samples");

    const double period = grid.period_s();
    const double span = wave.sample_dt * static_cast<double>(wave.values.size());
    const double periods = span / period;
    if (std::abs(periods - std::round(periods)) > 1e-9 * std::max(1.0, periods) || std::round(periods) < 1.0)
        raise(errc::non_integer_periods,
              "samples cover " + std::to_string(periods) + " fundamental periods; an integer count is required");

    std::vector<int> orders(static_cast<std::size_t>(max_order));
    for (int p = 1; p <= max_order; ++p) orders[static_cast<std::size_t>(p - 1)] = p;

    const std::vector<kernels::ab_pair> ab =
        kernels::fourier_project(wave.values.data(), wave.values.size(), wave.sample_dt, grid.omega(),
                                 orders, true);

    double fundamental = std::hypot(ab[0].a, ab[0].b);
    if (fundamental == 0.0) fundamental = 1.0;
    double max_cos = 0.0;
    for (const auto& c : ab) max_cos = std::max(max_cos, std::abs(c.a));
    const bool fold = max_cos < 1e-9 * fundamental;

    spectrum_report report;
    report.omega = grid.omega();
    report.quarter_symmetric = fold;
    report.has_modulation = circuit != nullptr;
    const double f1 = grid.fundamental_hz();
    for (std::size_t k = 0; k < orders.size(); ++k) {
        spectrum_line line;
        line.order = orders[k];
        line.freq_hz = orders[k] * f1;
        line.a = fold ? 0.0 : ab[k].a;
        line.b = ab[k].b;
        if (circuit) {
            // signed along b when folded, magnitude with b's sign otherwise
            const double amp = fold ? ab[k].b : std::copysign(std::hypot(ab[k].a, ab[k].b), ab[k].b);
            line.m = amp * orders[k] * report.omega * circuit->inductance / circuit->v0;
            line.m_scaled = std::abs(line.m) / orders[k];
        }
        report.lines.push_back(line);
    }
    return report;
}

double thd(const spectrum_report& report, const std::vector<int>& selected, int max_order) {
    if (selected.empty()) raise(errc::empty_selected_set, "no selected orders");
    if (max_order < 1) raise(errc::bad_config, "max_order must be >= 1, got " + std::to_string(max_order));

    auto amplitude = [](const spectrum_line& line) { return std::hypot(line.a, line.b); };

    double selected_sq = 0.0;
    for (int p : selected) {
        const spectrum_line* line = report.find(p);
        if (!line)
            raise(errc::bad_config, "selected order " + std::to_string(p) + " is missing from the report");
        const double amp = amplitude(*line);
        selected_sq += amp * amp;
    }
    if (selected_sq == 0.0) raise(errc::bad_config, "selected orders carry no amplitude");

    double residual_sq = 0.0;
    for (const auto& line : report.lines) {
        if (line.order > max_order || line.order % 2 == 0) continue;
        if (std::find(selected.begin(), selected.end(), line.order) != selected.end()) continue;
        const double amp = amplitude(line);
        residual_sq += amp * amp;
    }
    return 100.0 * std::sqrt(residual_sq) / std::sqrt(selected_sq);
}

void classify(spectrum_report& report, const std::vector<int>& selected,
              const std::vector<int>& constrained) {
    auto contains = [](const std::vector<int>& v, int p) {
        return std::find(v.begin(), v.end(), p) != v.end();
    };
    for (auto& line : report.lines) {
        if (contains(selected, line.order)) line.member = membership::selected;
        else if (contains(constrained, line.order)) line.member = membership::eliminated;
        else line.member = membership::other;
    }
}

} // namespace shewave

#include "shewave/signal.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "shewave/errors.hpp"

namespace shewave {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

} // namespace

bool objective_signal::quarter_symmetric() const {
    for (const auto& c : components)
        if (c.phase != 0.0 || c.order % 2 == 0) return false;
    return true;
}

objective_signal make_objective(double omega, std::vector<harmonic_component> components) {
    if (!(omega > 0.0))
        raise(errc::non_positive_frequency, "fundamental angular frequency must be > 0, got " + std::to_string(omega));
    if (components.empty())
        raise(errc::missing_fundamental, "component list is empty");
    int prev_order = 0;
    for (const auto& c : components) {
        if (c.order < 1)
            raise(errc::invalid_order, "order must be >= 1, got " + std::to_string(c.order));
        if (c.order == prev_order)
            raise(errc::duplicate_order, "order " + std::to_string(c.order) + " listed twice");
        if (c.order < prev_order)
            raise(errc::unsorted_orders, "orders must be strictly increasing, got " + std::to_string(c.order) +
                                             " after " + std::to_string(prev_order));
        if (!(c.weight > 0.0))
            raise(errc::non_positive_weight,
                  "weight of order " + std::to_string(c.order) + " must be > 0, got " + std::to_string(c.weight));
        if (!(c.phase >= 0.0) || c.phase >= two_pi)
            raise(errc::phase_out_of_range,
                  "phase of order " + std::to_string(c.order) + " must lie in [0, 2*pi), got " + std::to_string(c.phase));
        prev_order = c.order;
    }
    if (components.front().order != 1)
        raise(errc::missing_fundamental, "first component must be the fundamental (order 1), got order " +
                                             std::to_string(components.front().order));
    return objective_signal{omega, std::move(components)};
}

objective_signal preset(std::string_view name, double omega) {
    auto one_over_p = [](std::initializer_list<int> orders) {
        std::vector<harmonic_component> cs;
        for (int p : orders) cs.push_back({p, 1.0 / p, 0.0});
        return cs;
    };
    if (name == "f1") return make_objective(omega, one_over_p({1, 3, 9, 27, 81}));
    if (name == "f2") return make_objective(omega, one_over_p({1, 3, 7, 17}));
    if (name == "f3") return make_objective(omega, one_over_p({1, 2, 4, 6, 8, 10, 12, 14}));
    if (name == "f4") return make_objective(omega, one_over_p({1, 2, 3, 4, 5, 6, 7, 8}));
    if (name == "f5") {
        auto cs = one_over_p({1, 3, 9, 27, 81});
        const double phases[] = {0.0, std::numbers::pi / 4, std::numbers::pi / 7, std::numbers::pi / 5,
                                 std::numbers::pi / 6};
        for (std::size_t k = 0; k < cs.size(); ++k) cs[k].phase = phases[k];
        return make_objective(omega, std::move(cs));
    }
    raise(errc::unknown_preset, "no preset named '" + std::string(name) + "' (expected f1..f5)");
}

double eval(const objective_signal& s, double t) {
    double sum = 0.0;
    for (const auto& c : s.components) sum += c.weight * std::sin(c.order * s.omega * t + c.phase);
    return sum;
}

double eval_gradient(const objective_signal& s, double t) {
    double sum = 0.0;
    for (const auto& c : s.components) sum += c.weight * c.order * s.omega * std::cos(c.order * s.omega * t + c.phase);
    return sum;
}

std::vector<int> gradient_zeros(const objective_signal& s, const timing_grid& grid) {
    if (!s.quarter_symmetric())
        raise(errc::not_quarter_symmetric,
              "gradient zeros need quarter-wave symmetry (all phases zero, odd orders only)");

    // Work in fundamental phase theta = omega*t over (0, pi/2); the gradient
    // in theta differs from eval_gradient by the positive factor omega, so
    // sign changes coincide.
    auto grad = [&](double theta) {
        double sum = 0.0;
        for (const auto& c : s.components) sum += c.weight * c.order * std::cos(c.order * theta);
        return sum;
    };

    const int quarter = grid.quarter_cycles();
    const long prescan = 10L * quarter; // 10x grid resolution
    const double quarter_rad = std::numbers::pi / 2.0;

    std::vector<double> zeros;
    int last_sign = 0;
    double last_theta = 0.0;
    for (long j = 0; j <= prescan; ++j) {
        const double theta = quarter_rad * static_cast<double>(j) / static_cast<double>(prescan);
        const int sgn = sign_of(grad(theta));
        if (sgn == 0) continue; // exact-zero sample: resolved by the next nonzero sample
        if (last_sign != 0 && sgn != last_sign) {
            double lo = last_theta, hi = theta;
            const bool lo_positive = grad(lo) > 0.0;
            while (hi - lo > 1e-12) {
                const double mid = 0.5 * (lo + hi);
                if ((grad(mid) > 0.0) == lo_positive)
                    lo = mid;
                else
                    hi = mid;
            }
            const double z = 0.5 * (lo + hi);
            if (std::abs(z - quarter_rad) > 1e-9) zeros.push_back(z);
        }
        last_sign = sgn;
        last_theta = theta;
    }

    std::vector<int> cycles;
    for (double z : zeros) {
        // round to nearest cycle, exact .5 rounds up
        const int c = static_cast<int>(std::floor(z / grid.resolution() + 0.5));
        if (cycles.empty() || cycles.back() != c) cycles.push_back(c);
    }
    return cycles;
}

} // namespace shewave

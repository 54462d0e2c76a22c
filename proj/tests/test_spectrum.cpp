#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "shewave/circuit.hpp"
#include "shewave/errors.hpp"
#include "shewave/grid.hpp"
#include "shewave/schedule.hpp"
#include "shewave/signal.hpp"
#include "shewave/spectrum.hpp"
#include "support/helpers.hpp"

using namespace shewave;
using test_support::throws_errc;

namespace {

constexpr double kPi = std::numbers::pi;

timing_grid grid_476() { return make_grid(24.0e6, 476); }

circuit_params coil_circuit(const timing_grid& g) {
    return make_circuit(24.0, 24.0, 1.4e-6, 0.0, g.omega());
}

switching_schedule bipolar_at(const timing_grid& g, const std::vector<int>& cycles) {
    std::vector<switching_edge> edges;
    int level = 1;
    for (int c : cycles) {
        edges.push_back({c, -2 * level});
        level = -level;
    }
    return build_schedule(g, std::move(edges), 1, 1);
}

} // namespace

TEST_CASE("square-wave modulation indices are 4/(p*pi)") {
    const timing_grid g = grid_476();
    const circuit_params circuit = coil_circuit(g);
    const switching_schedule square = build_schedule(g, {}, 1, 1);

    const spectrum_report report = analytic_coefficients(square, circuit, 11);
    REQUIRE(report.lines.size() == 6); // odd orders 1..11
    CHECK(report.quarter_symmetric);
    CHECK(report.has_modulation);

    for (const auto& line : report.lines) {
        CHECK(line.order % 2 == 1);
        CHECK(std::abs(line.m) == doctest::Approx(4.0 / (line.order * kPi)).epsilon(1e-12));
        CHECK(line.m_scaled == doctest::Approx(4.0 / (line.order * line.order * kPi)).epsilon(1e-12));
        // m and b describe the same phasor: b_p = m_p * V0 / (p*omega*L)
        CHECK(line.b * line.order * g.omega() * circuit.inductance / circuit.v0 ==
              doctest::Approx(line.m).epsilon(1e-12));
        CHECK(line.freq_hz == doctest::Approx(line.order * g.fundamental_hz()).epsilon(1e-12));
    }
    // square-wave current fundamental: 4*V0/(pi*omega*L), positive (sine-aligned)
    const double b1 = 4.0 * circuit.v0 / (kPi * g.omega() * circuit.inductance);
    CHECK(report.find(1)->b == doctest::Approx(b1).epsilon(1e-12));
}

TEST_CASE("analytic coefficients at the reference design angles") {
    const timing_grid g = grid_476();
    const circuit_params circuit = coil_circuit(g);
    const std::vector<int> selected = {1, 3, 7, 17};

    struct row {
        std::vector<int> cycles;
        double m_scaled[4];
        double thd_percent;
    };
    const row rows[] = {
        {{36, 49, 68, 77, 88, 111}, {0.533501, 0.144967, 0.065535, 0.043292}, 7.3254},
        {{39, 51, 70, 82, 90, 111}, {0.552574, 0.171354, 0.047310, 0.032212}, 9.0214},
        {{35, 48, 65, 74, 86, 111}, {0.493261, 0.156807, 0.067778, 0.042419}, 7.7352},
    };

    for (const row& r : rows) {
        const switching_schedule sched = bipolar_at(g, r.cycles);
        const spectrum_report report = analytic_coefficients(sched, circuit, 21);
        for (std::size_t k = 0; k < 4; ++k) {
            const spectrum_line* line = report.find(selected[k]);
            REQUIRE(line != nullptr);
            CHECK(std::abs(line->m_scaled - r.m_scaled[k]) < 1e-5);
        }
        CHECK(std::abs(thd(report, selected, 21) - r.thd_percent) < 1e-3);
    }
}

TEST_CASE("analytic coefficient validation") {
    const timing_grid g = grid_476();
    const switching_schedule square = build_schedule(g, {}, 1, 1);

    CHECK(throws_errc([&] { analytic_coefficients(square, coil_circuit(g), 0); }, errc::bad_config));

    circuit_params wrong = coil_circuit(g);
    wrong.omega *= 1.001;
    CHECK(throws_errc([&] { analytic_coefficients(square, wrong, 11); }, errc::bad_config));
}

TEST_CASE("numeric coefficients of pure test tones") {
    const timing_grid g = grid_476();
    const std::size_t n = 2048;
    const double dt = g.period_s() / static_cast<double>(n);

    sampled_signal sine;
    sine.sample_dt = dt;
    sine.values.resize(n);
    for (std::size_t k = 0; k < n; ++k)
        sine.values[k] = std::sin(g.omega() * (static_cast<double>(k) * dt));

    const spectrum_report rs = dft_coefficients(sine, g, 9);
    CHECK(rs.quarter_symmetric); // cosine parts negligible -> folded
    CHECK_FALSE(rs.has_modulation);
    // the trapezoid projection of a pure tone is low by ~(pi*p/n)^2/3
    CHECK(std::abs(rs.find(1)->b - 1.0) < 2.0 * (kPi / n) * (kPi / n));
    for (int p = 2; p <= 9; ++p) {
        CHECK(std::abs(rs.find(p)->b) < 1e-12);
        CHECK(std::abs(rs.find(p)->a) < 1e-12);
    }

    sampled_signal cosine = sine;
    for (std::size_t k = 0; k < n; ++k)
        cosine.values[k] = std::cos(3.0 * g.omega() * (static_cast<double>(k) * dt));
    const spectrum_report rc = dft_coefficients(cosine, g, 9);
    CHECK_FALSE(rc.quarter_symmetric); // cosine energy present, not folded
    CHECK(std::abs(rc.find(3)->a - 1.0) < 2e-5);
    CHECK(std::abs(rc.find(3)->b) < 1e-12);
}

TEST_CASE("numeric coefficient validation") {
    const timing_grid g = grid_476();
    sampled_signal wave;
    wave.sample_dt = g.period_s() / 64.0;
    wave.values.assign(64, 0.0);

    CHECK(throws_errc([&] { dft_coefficients(wave, g, 0); }, errc::bad_config));

    sampled_signal short_wave;
    short_wave.sample_dt = wave.sample_dt;
    short_wave.values = {1.0};
    CHECK(throws_errc([&] { dft_coefficients(short_wave, g, 3); }, errc::too_short));

    sampled_signal ragged = wave;
    ragged.values.resize(63);
    CHECK(throws_errc([&] { dft_coefficients(ragged, g, 3); }, errc::non_integer_periods));

    sampled_signal bad_dt = wave;
    bad_dt.sample_dt = 0.0;
    CHECK(throws_errc([&] { dft_coefficients(bad_dt, g, 3); }, errc::bad_config));
}

TEST_CASE("numeric spectrum of the ideal current matches the closed form") {
    test_support::rng64 rng(31);
    const timing_grid g = grid_476();
    const circuit_params circuit = coil_circuit(g);

    for (int trial = 0; trial < 10; ++trial) {
        const switching_schedule sched = test_support::random_schedule(rng, g, 8, 2);
        const waveform_trace trace = resemblance_current(sched, circuit, 32);

        sampled_signal wave;
        wave.sample_dt = trace.sample_dt;
        wave.values = trace.i;
        const spectrum_report numeric = dft_coefficients(wave, g, 35, &circuit);
        const spectrum_report closed = analytic_coefficients(sched, circuit, 35);

        for (const auto& line : closed.lines) {
            const spectrum_line* got = numeric.find(line.order);
            REQUIRE(got != nullptr);
            CHECK(std::abs(got->b - line.b) <= 1e-6 * std::max(1.0, std::abs(line.b)));
            CHECK(std::abs(got->m - line.m) <= 1e-6 * std::max(1.0, std::abs(line.m)));
        }
        // even orders vanish by symmetry
        for (int p = 2; p <= 34; p += 2) CHECK(std::abs(numeric.find(p)->b) < 1e-9);
    }
}

TEST_CASE("distortion ratio arithmetic") {
    spectrum_report report;
    report.lines.push_back({1, 0.0, 0.0, 2.0, 0.0, 0.0, membership::other});
    report.lines.push_back({3, 0.0, 0.0, 0.2, 0.0, 0.0, membership::other});
    report.lines.push_back({4, 0.0, 0.0, 9.0, 0.0, 0.0, membership::other}); // even: ignored
    report.lines.push_back({23, 0.0, 0.0, 9.0, 0.0, 0.0, membership::other}); // beyond cutoff

    CHECK(thd(report, {1}, 21) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(thd(report, {1, 3}, 21) == doctest::Approx(0.0));
    CHECK(thd(report, {1}, 23) == doctest::Approx(100.0 * std::hypot(0.2, 9.0) / 2.0).epsilon(1e-12));

    CHECK(throws_errc([&] { thd(report, {}, 21); }, errc::empty_selected_set));
    CHECK(throws_errc([&] { thd(report, {5}, 21); }, errc::bad_config));
    CHECK(throws_errc([&] { thd(report, {1}, 0); }, errc::bad_config));

    spectrum_report silent;
    silent.lines.push_back({1, 0.0, 0.0, 0.0, 0.0, 0.0, membership::other});
    CHECK(throws_errc([&] { thd(silent, {1}, 21); }, errc::bad_config));
}

TEST_CASE("membership classification") {
    const timing_grid g = grid_476();
    spectrum_report report = analytic_coefficients(build_schedule(g, {}, 1, 1), coil_circuit(g), 15);
    classify(report, {1, 3, 7}, {5, 9, 11});

    CHECK(report.find(1)->member == membership::selected);
    CHECK(report.find(3)->member == membership::selected);
    CHECK(report.find(7)->member == membership::selected);
    CHECK(report.find(5)->member == membership::eliminated);
    CHECK(report.find(9)->member == membership::eliminated);
    CHECK(report.find(11)->member == membership::eliminated);
    CHECK(report.find(13)->member == membership::other);
    CHECK(report.find(15)->member == membership::other);
}

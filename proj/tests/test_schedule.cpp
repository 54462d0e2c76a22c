#include <cstdint>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "shewave/errors.hpp"
#include "shewave/grid.hpp"
#include "shewave/schedule.hpp"
#include "shewave/signal.hpp"
#include "support/helpers.hpp"

using namespace shewave;
using test_support::throws_errc;

namespace {

timing_grid tiny_grid(int cycles) { return make_grid(64.0, cycles); }

bool nibble_complementary(std::uint16_t nib) {
    const bool ha = nib & 0b1000, la = nib & 0b0100, hb = nib & 0b0010, lb = nib & 0b0001;
    return ha != la && hb != lb;
}

bool nibble_safe(std::uint16_t nib) {
    return !((nib & 0b1000) && (nib & 0b0100)) && !((nib & 0b0010) && (nib & 0b0001));
}

} // namespace

TEST_CASE("build_schedule validation") {
    const timing_grid g = tiny_grid(64); // quarter = 16

    CHECK(throws_errc([&] { build_schedule(g, {}, 1, 0); }, errc::bad_config));
    CHECK(throws_errc([&] { build_schedule(g, {}, 2, 1); }, errc::level_overflow));
    CHECK(throws_errc([&] { build_schedule(g, {{-1, -2}}, 1, 1); }, errc::angle_out_of_range));
    CHECK(throws_errc([&] { build_schedule(g, {{16, -2}}, 1, 1); }, errc::angle_out_of_range));
    CHECK(throws_errc([&] { build_schedule(g, {{4, -2}, {4, 2}}, 1, 1); }, errc::unsorted_edges));
    CHECK(throws_errc([&] { build_schedule(g, {{7, -2}, {4, 2}}, 1, 1); }, errc::unsorted_edges));
    CHECK(throws_errc([&] { build_schedule(g, {{4, 0}}, 1, 1); }, errc::invalid_step));
    CHECK(throws_errc([&] { build_schedule(g, {{4, 1}}, 1, 1); }, errc::level_overflow));
    // boundary step is forced to minus the end level
    CHECK(throws_errc([&] { build_schedule(g, {{4, -2}}, 1, 1, -1); }, errc::boundary_edge_mismatch));
    CHECK(throws_errc([&] { build_schedule(g, {{4, -1}}, 1, 1, +1); }, errc::boundary_edge_mismatch));
    CHECK_NOTHROW(build_schedule(g, {{4, -2}}, 1, 1, +1 /* end level -1 -> boundary +1 */));
}

TEST_CASE("build_schedule derives the boundary edge") {
    const timing_grid g = tiny_grid(64);

    const switching_schedule up = build_schedule(g, {}, 1, 1);
    CHECK(up.end_level() == 1);
    REQUIRE(up.boundary_edge.has_value());
    CHECK(up.boundary_edge->cycle == 16);
    CHECK(up.boundary_edge->step == -1);

    const switching_schedule flat = build_schedule(g, {{4, -1}}, 1, 1);
    CHECK(flat.end_level() == 0);
    CHECK_FALSE(flat.boundary_edge.has_value());
}

TEST_CASE("level walk and angles") {
    const timing_grid g = tiny_grid(64);
    const switching_schedule s = build_schedule(g, {{3, -2}, {9, 2}}, 1, 1);

    CHECK(s.end_level() == 1);
    const std::vector<int> levels = s.quarter_levels();
    REQUIRE(levels.size() == 16);
    for (int k = 0; k < 3; ++k) CHECK(levels[static_cast<std::size_t>(k)] == 1);
    for (int k = 3; k < 9; ++k) CHECK(levels[static_cast<std::size_t>(k)] == -1);
    for (int k = 9; k < 16; ++k) CHECK(levels[static_cast<std::size_t>(k)] == 1);

    // an edge at cycle 0 applies to cycle 0 (the level during a cycle is the
    // post-edge level)
    const switching_schedule zero_edge = build_schedule(g, {{0, -2}}, 1, 1);
    CHECK(zero_edge.quarter_levels()[0] == -1);

    const std::vector<double> angles = s.angles_rad();
    REQUIRE(angles.size() == 2);
    CHECK(angles[0] == doctest::Approx(3.0 * g.resolution()).epsilon(1e-15));
    CHECK(angles[1] == doctest::Approx(9.0 * g.resolution()).epsilon(1e-15));
}

TEST_CASE("with_angles keeps the pattern and validates") {
    const timing_grid g = tiny_grid(64);
    const switching_schedule s = build_schedule(g, {{3, -2}, {9, 2}}, 1, 1);

    const switching_schedule moved = with_angles(s, {5, 11});
    CHECK(moved.edges == std::vector<switching_edge>{{5, -2}, {11, 2}});
    CHECK(moved.start_level == 1);
    CHECK(moved.level_max == 1);

    CHECK(throws_errc([&] { with_angles(s, {5}); }, errc::bad_config));
    CHECK(throws_errc([&] { with_angles(s, {9, 5}); }, errc::unsorted_edges));
    CHECK(throws_errc([&] { with_angles(s, {5, 16}); }, errc::angle_out_of_range));
}

TEST_CASE("initial schedule from the 1,3,7,17 family") {
    const timing_grid g = make_grid(24.0e6, 476);
    const switching_schedule s = initial_schedule_from_objective(preset("f2", g.omega()), g);

    CHECK(s.start_level == 1);
    CHECK(s.level_max == 1);
    const std::vector<switching_edge> want = {{35, -2}, {48, 2}, {67, -2}, {76, 2}, {87, -2}, {110, 2}};
    CHECK(s.edges == want);
    CHECK(s.end_level() == 1);
    REQUIRE(s.boundary_edge.has_value());
    CHECK(s.boundary_edge->step == -1);
}

TEST_CASE("initial schedule from the 1..81 triplen family") {
    const timing_grid g = make_grid(6.25e6, 3888);
    const switching_schedule s = initial_schedule_from_objective(preset("f1", g.omega()), g);

    CHECK(s.edges.size() == 20);
    CHECK(s.start_level == 1);
    int level = s.start_level;
    for (const auto& e : s.edges) {
        CHECK(e.step == -2 * level); // bipolar: every edge flips through zero
        level += e.step;
    }
    CHECK(throws_errc([&] { initial_schedule_from_objective(preset("f5", g.omega()), g); },
                      errc::not_quarter_symmetric));
}

TEST_CASE("full-period expansion of the square wave") {
    const timing_grid g = make_grid(24.0e6, 476);
    const switching_schedule square = build_schedule(g, {}, 1, 1);
    const std::vector<int> full = expand_full_period(square);

    REQUIRE(full.size() == 476);
    for (int k = 0; k < 119; ++k) CHECK(full[static_cast<std::size_t>(k)] == 1);
    for (int k = 119; k < 357; ++k) CHECK(full[static_cast<std::size_t>(k)] == -1);
    for (int k = 357; k < 476; ++k) CHECK(full[static_cast<std::size_t>(k)] == 1);
}

TEST_CASE("full-period expansion symmetry properties") {
    test_support::rng64 rng(21);
    const timing_grid g = tiny_grid(128); // quarter = 32

    for (int trial = 0; trial < 60; ++trial) {
        const switching_schedule s = test_support::random_schedule(rng, g, 6, 2);
        const std::vector<int> full = expand_full_period(s);
        const std::size_t n = full.size();
        REQUIRE(n == 128);

        long long sum = 0;
        for (std::size_t k = 0; k < n; ++k) {
            sum += full[k];
            CHECK(full[(k + n / 2) % n] == -full[k]); // half-period antisymmetry
            CHECK(full[n - 1 - k] == full[k]);        // even about the start
        }
        CHECK(sum == 0);
        CHECK(full[n - 1] == full[0]); // no wrap transition
    }
}

TEST_CASE("gate words for a single bridge, no dead time") {
    const timing_grid g = tiny_grid(16); // quarter = 4
    const switching_schedule square = build_schedule(g, {}, 1, 1);
    const lookup_table table = to_lookup_table(square, 0);

    CHECK(table.gate_words.size() == 16);
    CHECK(table.levels == expand_full_period(square));
    for (std::size_t k = 0; k < 16; ++k) {
        const std::uint16_t want = table.levels[k] > 0 ? 0b1001 : 0b0110;
        CHECK(table.gate_words[k] == want);
        CHECK(nibble_complementary(table.gate_words[k] & 0xF));
    }

    // a zero level parks both low sides on
    const switching_schedule with_zero = build_schedule(g, {{2, -1}}, 1, 1);
    const lookup_table z = to_lookup_table(with_zero, 0);
    CHECK(z.levels[2] == 0);
    CHECK(z.gate_words[2] == 0b0101);
}

TEST_CASE("dead time blanks the changed leg at each transition") {
    const timing_grid g = tiny_grid(16);
    const switching_schedule square = build_schedule(g, {}, 1, 1);
    const lookup_table table = to_lookup_table(square, 1);

    // levels: +1 on cycles 0..3, -1 on 4..11, +1 on 12..15; both legs swap at
    // each transition, so the transition cycle goes fully off
    for (std::size_t k = 0; k < 16; ++k) {
        std::uint16_t want = 0;
        if (k == 4 || k == 12) want = 0b0000;
        else if (k < 4 || k >= 12) want = 0b1001;
        else want = 0b0110;
        CHECK(table.gate_words[k] == want);
    }
}

TEST_CASE("dead time only delays turn-on of the leg that changed") {
    const timing_grid g = tiny_grid(16);
    // levels walk through 0, so only one leg changes per transition
    const switching_schedule s = build_schedule(g, {{2, -1}}, 1, 1);
    const lookup_table table = to_lookup_table(s, 1);

    // quarter levels: 1 1 0 0 -> full period: 1 1 0 0 | 0 0 -1 -1 | -1 -1 0 0 | 0 0 1 1
    const std::vector<int> want_levels = {1, 1, 0, 0, 0, 0, -1, -1, -1, -1, 0, 0, 0, 0, 1, 1};
    CHECK(table.levels == want_levels);

    // +1 -> 0 at k=2: leg A falls (H->L), leg B holds L: word 0b0001
    CHECK(table.gate_words[2] == 0b0001);
    CHECK(table.gate_words[3] == 0b0101);
    // 0 -> -1 at k=6: leg B rises (L->H), leg A holds L: word 0b0100
    CHECK(table.gate_words[6] == 0b0100);
    CHECK(table.gate_words[7] == 0b0110);
    // -1 -> 0 at k=10: leg B falls, leg A holds: 0b0100
    CHECK(table.gate_words[10] == 0b0100);
    // 0 -> +1 at k=14: leg A rises, leg B holds: 0b0001
    CHECK(table.gate_words[14] == 0b0001);
    // wrap: k=0 continues the +1 run from k=15, no blanking
    CHECK(table.gate_words[0] == 0b1001);
}

TEST_CASE("two-bridge gate words stack cell levels") {
    const timing_grid g = tiny_grid(16);
    const switching_schedule s = build_schedule(g, {{1, 1}, {2, 1}}, 0, 2);
    const lookup_table table = to_lookup_table(s, 0);

    const std::vector<int> want_levels = {0, 1, 2, 2, -2, -2, -1, 0, 0, -1, -2, -2, 2, 2, 1, 0};
    CHECK(table.levels == want_levels);
    CHECK(table.gates_per_cycle() == 8);

    auto word_for = [](int level) -> std::uint16_t {
        switch (level) {
        case 2: return 0b1001'1001;
        case 1: return 0b1001'0101;
        case 0: return 0b0101'0101;
        case -1: return 0b0110'0101;
        default: return 0b0110'0110;
        }
    };
    for (std::size_t k = 0; k < 16; ++k) CHECK(table.gate_words[k] == word_for(table.levels[k]));
}

TEST_CASE("dead time must stay below the shortest dwell") {
    const timing_grid g = make_grid(24.0e6, 476);
    const switching_schedule square = build_schedule(g, {}, 1, 1);
    // the +1 runs at the period edges join circularly: dwells are 238, 238
    CHECK_NOTHROW(to_lookup_table(square, 237));
    CHECK(throws_errc([&] { to_lookup_table(square, 238); }, errc::dead_time_too_long));

    const switching_schedule s = initial_schedule_from_objective(preset("f2", g.omega()), g);
    CHECK(throws_errc([&] { to_lookup_table(s, 13); }, errc::dead_time_too_long));
    CHECK_NOTHROW(to_lookup_table(s, 4));

    CHECK(throws_errc([&] { to_lookup_table(square, -1); }, errc::bad_config));
}

TEST_CASE("random tables never drive a half bridge shoot-through") {
    test_support::rng64 rng(22);
    const timing_grid g = tiny_grid(128);

    int built = 0;
    for (int trial = 0; trial < 80; ++trial) {
        const switching_schedule s = test_support::random_schedule(rng, g, 5, 2);
        const int dead = static_cast<int>(rng.below(4));
        lookup_table table;
        try {
            table = to_lookup_table(s, dead);
        } catch (const error& e) {
            CHECK(e.code() == errc::dead_time_too_long);
            continue;
        }
        ++built;
        for (const std::uint16_t word : table.gate_words) {
            CHECK(nibble_safe(word & 0xF));
            CHECK(nibble_safe((word >> 4) & 0xF));
        }
    }
    CHECK(built > 30); // the scan must exercise real tables
}

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "shewave/circuit.hpp"
#include "shewave/cli.hpp"
#include "shewave/config.hpp"
#include "shewave/errors.hpp"
#include "shewave/io.hpp"
#include "shewave/schedule.hpp"
#include "shewave/signal.hpp"
#include "shewave/spectrum.hpp"
#include "support/helpers.hpp"

using namespace shewave;
using test_support::throws_errc;

namespace {

std::string render_schedule(const switching_schedule& sched) {
    std::ostringstream out;
    write_schedule(out, sched);
    return out.str();
}

bool same_schedule(const switching_schedule& x, const switching_schedule& y) {
    return x.grid == y.grid && x.edges == y.edges && x.start_level == y.start_level &&
           x.level_max == y.level_max && x.boundary_edge == y.boundary_edge;
}

int count_lines(const std::string& text) {
    int n = 0;
    for (char ch : text) n += ch == '\n';
    return n;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// capture std::cout / std::cerr while running the CLI in-process
int run(const std::vector<std::string>& args, std::string* out = nullptr, std::string* err = nullptr) {
    std::vector<const char*> argv;
    argv.push_back("shewave");
    for (const std::string& a : args) argv.push_back(a.c_str());

    std::ostringstream cout_buf, cerr_buf;
    std::streambuf* old_out = std::cout.rdbuf(cout_buf.rdbuf());
    std::streambuf* old_err = std::cerr.rdbuf(cerr_buf.rdbuf());
    const int rc = run_cli(static_cast<int>(argv.size()), argv.data());
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    if (out) *out = cout_buf.str();
    if (err) *err = cerr_buf.str();
    return rc;
}

std::filesystem::path scratch_dir() {
    const std::filesystem::path dir = std::filesystem::current_path() / "cli_scratch";
    std::filesystem::create_directories(dir);
    return dir;
}

std::filesystem::path write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
    return path;
}

std::string coil_config_text(const std::filesystem::path& dir, const std::string& lambda) {
    return "# four-frequency coil drive\n"
           "[design]\n"
           "clock_frequency_MHz = 24\n"
           "cycles_per_period = 476\n"
           "preset = f2\n"
           "[circuit]\n"
           "v_dc_V = 24\n"
           "inductance_uH = 1.4\n"
           "[optimizer]\n"
           "lambda = " + lambda + "\n"
           "constrained = 5, 9, 11, 13, 15\n"
           "epsilon = 0.10, 0.18, 0.22, 0.26, 0.30\n"
           "thd_max_order = 21\n"
           "multistart = 1\n"
           "[export]\n"
           "samples_per_cycle = 16\n"
           "periods = 2\n"
           "schedule_path = " + (dir / "schedule.txt").string() + "\n"
           "spectrum_path = " + (dir / "spectrum.txt").string() + "\n"
           "lookup_path = " + (dir / "lookup.txt").string() + "\n";
}

} // namespace

TEST_CASE("schedule files round trip exactly") {
    test_support::rng64 rng(71);
    const timing_grid g = make_grid(24.0e6, 476);
    for (int trial = 0; trial < 25; ++trial) {
        const switching_schedule sched = test_support::random_schedule(rng, g, 8, 2);
        const std::string text = render_schedule(sched);
        CHECK(text == render_schedule(sched)); // deterministic bytes

        std::istringstream in(text);
        CHECK(same_schedule(read_schedule(in), sched));
    }
}

TEST_CASE("schedule reader rejects damaged files") {
    auto read_text = [](const std::string& text) {
        std::istringstream in(text);
        return read_schedule(in);
    };
    CHECK(throws_errc([&] { read_text(""); }, errc::malformed_row));
    CHECK(throws_errc([&] { read_text("clock_frequency_Hz abc\n"); }, errc::malformed_row));
    CHECK(throws_errc([&] { read_text("cycles_per_period 476\n"); }, errc::malformed_row));
    // edge count promises more rows than present
    CHECK(throws_errc(
        [&] {
            read_text("clock_frequency_Hz 24e6\ncycles_per_period 476\nstart_level 1\nlevel_max 1\nedges 2\n"
                      "10 -2\n");
        },
        errc::malformed_row));
    // boundary step contradicting the walk is a validation error
    CHECK(throws_errc(
        [&] {
            read_text("clock_frequency_Hz 24e6\ncycles_per_period 476\nstart_level 1\nlevel_max 1\nedges 1\n"
                      "10 -2\nboundary_step -1\n");
        },
        errc::boundary_edge_mismatch));
}

TEST_CASE("lookup tables round trip in both formats") {
    const timing_grid g = make_grid(24.0e6, 476);
    const switching_schedule sched = initial_schedule_from_objective(preset("f2", g.omega()), g);

    for (int dead : {0, 2}) {
        const lookup_table table = to_lookup_table(sched, dead);

        std::ostringstream gates;
        write_lookup_table(gates, table, table_format::gates);
        std::istringstream gin(gates.str());
        const lookup_table from_gates = read_lookup_table(gin);
        CHECK(from_gates.gate_words == table.gate_words);
        CHECK(from_gates.levels == table.levels); // dead-time cycles resolved to the upcoming level
        CHECK(from_gates.level_max == table.level_max);
        CHECK(from_gates.dead_time_cycles == dead);

        std::ostringstream levels;
        write_lookup_table(levels, table, table_format::levels);
        std::istringstream lin(levels.str());
        const lookup_table from_levels = read_lookup_table(lin);
        CHECK(from_levels.levels == table.levels);
        CHECK(from_levels.gate_words == table.gate_words); // reassembled with the stored dead time
    }
}

TEST_CASE("lookup table reader rejects damaged files") {
    const std::string header = "clock_frequency_Hz 64\ncycles_per_period 16\nlevel_max 1\n"
                               "dead_time_cycles 0\nformat gates\n";
    auto read_text = [](const std::string& text) {
        std::istringstream in(text);
        return read_lookup_table(in);
    };

    std::string sixteen;
    for (int k = 0; k < 16; ++k) sixteen += k < 8 ? "1001\n" : "0110\n";
    CHECK_NOTHROW(read_text(header + sixteen));

    CHECK(throws_errc([&] { read_text(header + "1001\n"); }, errc::malformed_row)); // wrong count
    std::string bad_bits = sixteen;
    bad_bits.replace(0, 4, "10x1");
    CHECK(throws_errc([&] { read_text(header + bad_bits); }, errc::malformed_row));
    std::string wide = sixteen;
    wide.replace(0, 4, "10011");
    CHECK(throws_errc([&] { read_text(header + wide); }, errc::malformed_row));

    // both switches of one leg on
    std::string fire = sixteen;
    fire.replace(0, 4, "1101");
    CHECK(throws_errc([&] { read_text(header + fire); }, errc::shoot_through));

    // level beyond level_max in levels format
    const std::string lheader = "clock_frequency_Hz 64\ncycles_per_period 16\nlevel_max 1\n"
                                "dead_time_cycles 0\nformat levels\n";
    std::string levels;
    for (int k = 0; k < 16; ++k) levels += k == 3 ? "2\n" : "0\n";
    CHECK(throws_errc([&] { read_text(lheader + levels); }, errc::level_overflow));
}

TEST_CASE("trace CSV writes round trip through ingestion") {
    const timing_grid g = make_grid(24.0e6, 476);
    const circuit_params c = make_circuit(24.0, 24.0, 1.4e-6, 0.0, g.omega());
    const switching_schedule sched = initial_schedule_from_objective(preset("f2", g.omega()), g);
    const waveform_trace trace = simulate(sched, c, 8, 2);

    std::ostringstream out;
    write_trace_csv(out, trace);
    const std::string text = out.str();
    CHECK(text.rfind("time_s,voltage_V,current_A\n", 0) == 0);
    CHECK(count_lines(text) == static_cast<int>(trace.u.size()) + 1);

    std::istringstream in(text);
    const waveform_trace back = ingest_trace(in, g.fundamental_hz());
    CHECK(back.periods == 1); // span is N*dt minus one sample: 2 periods round down
    double peak = 0.0, worst = 0.0;
    for (std::size_t n = 0; n < back.i.size() && n < trace.i.size(); ++n) {
        peak = std::max(peak, std::abs(trace.i[n]));
        worst = std::max(worst, std::abs(trace.i[n] - back.i[n]));
    }
    CHECK(worst < 1e-6 * peak);
}

TEST_CASE("spectrum and metric reports carry the expected rows") {
    const timing_grid g = make_grid(24.0e6, 476);
    const circuit_params c = make_circuit(24.0, 24.0, 1.4e-6, 0.0, g.omega());
    const switching_schedule sched = initial_schedule_from_objective(preset("f2", g.omega()), g);
    spectrum_report report = analytic_coefficients(sched, c, 21);
    classify(report, {1, 3, 7, 17}, {5, 9, 11, 13, 15});

    std::ostringstream out;
    write_spectrum_report(out, report, {1, 3, 7, 17}, 21);
    const std::string text = out.str();
    CHECK(text.rfind("order frequency_Hz amplitude_A m_scaled membership\n", 0) == 0);
    CHECK(count_lines(text) == static_cast<int>(report.lines.size()) + 2);
    CHECK(text.find("thd_percent ") != std::string::npos);
    CHECK(text.find(" max_order 21") != std::string::npos);
    CHECK(text.find("selected") != std::string::npos);
    CHECK(text.find("eliminated") != std::string::npos);

    power_metrics metrics = efficiency_metrics(24.0, 1.43, 6.87, 224.81);
    metrics.harmonics = {{1, 10.0, 2.0, 1.5}};
    std::ostringstream mr;
    write_metric_report(mr, metrics, "bench measurement");
    const std::string mtext = mr.str();
    for (const char* key : {"V_DC_V 24", "I_DC_A 1.43", "P_DC_W 34.32", "P_out_W 6.87", "Q_out_var 224.81",
                            "eta_percent 20.0174825175", "zeta 6.55040792541", "harmonic 1 ",
                            "note bench measurement"})
        CHECK(mtext.find(key) != std::string::npos);
}

TEST_CASE("config files populate every block") {
    const std::string text = "# demo\n"
                             "[design]\n"
                             "clock_frequency_MHz = 24\n"
                             "cycles_per_period = 476\n"
                             "preset = f2\n"
                             "[circuit]\n"
                             "v_dc_V = 24\n"
                             "v0_V = 12\n"
                             "inductance_uH = 1.4\n"
                             "r_series_ohm = 0.25\n"
                             "[optimizer]\n"
                             "lambda = 1, 1, 1, 0\n"
                             "constrained = 5, 9\n"
                             "epsilon = 0.1, 0.2\n"
                             "thd_max_order = 21\n"
                             "max_iterations = 250\n"
                             "multistart = 2\n"
                             "[export]\n"
                             "dead_time_cycles = 2\n"
                             "samples_per_cycle = 32\n"
                             "periods = 3\n"
                             "schedule_path = s.txt\n"
                             "spectrum_path = r.txt\n"
                             "lookup_path = l.txt\n";
    std::istringstream in(text);
    const design_config cfg = parse_config(in);

    CHECK(cfg.grid.clock_hz == doctest::Approx(24e6));
    CHECK(cfg.grid.cycles_per_period == 476);
    CHECK(cfg.preset_name == "f2");
    CHECK(cfg.circuit.v_dc == 24.0);
    CHECK(cfg.circuit.v0 == 12.0);
    CHECK(cfg.circuit.inductance == doctest::Approx(1.4e-6));
    CHECK(cfg.circuit.r_series == 0.25);
    CHECK(cfg.lambda == std::vector<double>{1.0, 1.0, 1.0, 0.0});
    CHECK(cfg.constrained == std::vector<int>{5, 9});
    CHECK(cfg.epsilon_values() == std::vector<double>{0.1, 0.2});
    CHECK(cfg.thd_max_order == 21);
    CHECK(cfg.effective_thd_max_order() == 21);
    CHECK(cfg.max_iterations == 250);
    CHECK(cfg.multistart == 2);
    CHECK(cfg.dead_time_cycles == 2);
    CHECK(cfg.samples_per_cycle == 32);
    CHECK(cfg.periods == 3);
    CHECK(cfg.schedule_path == "s.txt");
    CHECK(cfg.spectrum_path == "r.txt");
    CHECK(cfg.lookup_path == "l.txt");
    CHECK(cfg.selected_orders() == std::vector<int>{1, 3, 7, 17});
}

TEST_CASE("config defaults and alternate unit keys") {
    const std::string text = "[design]\n"
                             "fundamental_frequency_kHz = 50.420168067226896\n"
                             "cycles_per_period = 476\n"
                             "harmonics = 1:1; 3:0.3333333333; 7:0.142857:0.5\n"
                             "[circuit]\n"
                             "v_dc_V = 24\n"
                             "inductance_H = 1.4e-6\n"
                             "[optimizer]\n"
                             "constrained = 5, 9\n"
                             "epsilon_scaled_bound = 0.02\n";
    std::istringstream in(text);
    const design_config cfg = parse_config(in);

    CHECK(cfg.grid.clock_hz == doctest::Approx(24e6).epsilon(1e-9));
    CHECK(cfg.circuit.v0 == 24.0); // defaults to the supply
    CHECK(cfg.circuit.r_series == 0.0);
    REQUIRE(cfg.harmonics.size() == 3);
    CHECK(cfg.harmonics[2].order == 7);
    CHECK(cfg.harmonics[2].phase == doctest::Approx(0.5));
    const std::vector<double> eps = cfg.epsilon_values();
    REQUIRE(eps.size() == 2);
    CHECK(eps[0] == doctest::Approx(0.10));
    CHECK(eps[1] == doctest::Approx(0.18));
    CHECK(cfg.effective_thd_max_order() == 15); // 2 * 7 + 1
    CHECK(cfg.max_iterations == 400);
    CHECK(cfg.multistart == 4);
    CHECK(cfg.samples_per_cycle == 64);
}

TEST_CASE("config parser rejects malformed input") {
    auto parse_text = [](const std::string& text) {
        std::istringstream in(text);
        return parse_config(in);
    };
    const std::string base = "[design]\nclock_frequency_MHz = 24\ncycles_per_period = 476\npreset = f2\n"
                             "[circuit]\nv_dc_V = 24\ninductance_uH = 1.4\n";

    CHECK_NOTHROW(parse_text(base));
    CHECK(throws_errc([&] { parse_text(base + "[optimizer]\nbogus = 1\n"); }, errc::bad_config));
    try {
        parse_text(base + "[optimizer]\nbogus = 1\n");
    } catch (const error& e) {
        CHECK(std::string(e.what()).find("optimizer.bogus") != std::string::npos);
    }
    CHECK(throws_errc([&] { parse_text(base + "[design]\npreset = f1\n"); }, errc::bad_config)); // duplicate
    CHECK(throws_errc([&] { parse_text("[design]\ncycles_per_period = 476\npreset = f2\n"
                                       "[circuit]\nv_dc_V = 24\ninductance_uH = 1.4\n"); },
                      errc::bad_config)); // no frequency
    CHECK(throws_errc([&] { parse_text(base + "[design]\nclock_frequency_Hz = 24e6\n"); },
                      errc::bad_config)); // two frequencies
    CHECK(throws_errc([&] { parse_text(base + "[design]\nharmonics = 1:1\n"); }, errc::bad_config));
    CHECK(throws_errc([&] { parse_text("[design]\nclock_frequency_MHz = 24\ncycles_per_period = 476\n"
                                       "[circuit]\nv_dc_V = 24\ninductance_uH = 1.4\n"); },
                      errc::bad_config)); // neither preset nor harmonics
    CHECK(throws_errc([&] { parse_text("[design]\nclock_frequency_MHz = 24\ncycles_per_period = 476\n"
                                       "preset = f2\n[circuit]\ninductance_uH = 1.4\n"); },
                      errc::bad_config)); // missing supply
    CHECK(throws_errc([&] { parse_text("[design]\nclock_frequency_MHz = 24\ncycles_per_period = 476\n"
                                       "preset = f2\n[circuit]\nv_dc_V = 24\n"); },
                      errc::bad_config)); // missing inductance
    CHECK(throws_errc([&] { parse_text(base + "[circuit]\ninductance_H = 1e-6\n"); }, errc::bad_config));
    CHECK(throws_errc([&] { parse_text(base + "[optimizer]\nlambda = 1, 1\n"); }, errc::bad_config));
    CHECK(throws_errc([&] { parse_text(base + "[optimizer]\nconstrained = 5\n"); }, errc::bad_config));
    CHECK(throws_errc([&] { parse_text(base + "[optimizer]\nconstrained = 3\nepsilon = 0.1\n"); },
                      errc::bad_config)); // overlaps selected
    CHECK(throws_errc([&] { parse_text("key = 1\n" + base); }, errc::bad_config)); // outside section
    CHECK(throws_errc([&] { parse_text("[nope]\n" + base); }, errc::bad_config));
    CHECK(throws_errc([&] { parse_text("[design\n" + base); }, errc::bad_config));
    CHECK(throws_errc([&] { parse_text(base + "[export]\nperiods\n"); }, errc::bad_config));
}

TEST_CASE("command line drives the full design flow") {
    setenv("SHEWAVE_LOG", "quiet", 1);
    const std::filesystem::path dir = scratch_dir();
    const std::filesystem::path cfg =
        write_text(dir / "coil.ini", coil_config_text(dir, "1, 1, 1, 1"));

    std::string out, err;

    // objective synthesis
    const std::filesystem::path csv = dir / "objective.csv";
    CHECK(run({"synth", "--config", cfg.string(), "--out", csv.string()}, &out, &err) == 0);
    CHECK(out.find("fundamental_Hz 50420.1680672") != std::string::npos);
    CHECK(out.find("17 ") != std::string::npos); // per-order table includes the highest order
    const std::string csv_text = slurp(csv);
    CHECK(count_lines(csv_text) == 477);
    CHECK(run({"synth", "--config", cfg.string(), "--out", csv.string()}) == 0);
    CHECK(slurp(csv) == csv_text); // deterministic bytes

    // gradient-zero design
    CHECK(run({"design", "--config", cfg.string(), "--fast"}, &out, &err) == 0);
    const switching_schedule sched = read_schedule_file((dir / "schedule.txt").string());
    const std::vector<switching_edge> want = {{35, -2}, {48, 2}, {67, -2}, {76, 2}, {87, -2}, {110, 2}};
    CHECK(sched.edges == want);
    CHECK(out.find("lookup_table ") != std::string::npos);
    CHECK(out.find(" entries 476") != std::string::npos);
    CHECK(slurp(dir / "spectrum.txt").find("thd_percent ") != std::string::npos);
    CHECK(count_lines(slurp(dir / "lookup.txt")) == 476 + 5);

    // flag misuse
    CHECK(run({"design", "--config", cfg.string()}) == 2);
    CHECK(run({"design", "--config", cfg.string(), "--fast", "--optimize"}) == 2);

    // constrained optimization over the same config
    CHECK(run({"design", "--config", cfg.string(), "--optimize"}, &out, &err) == 0);
    CHECK(out.find("quantized_cycles") != std::string::npos);
    CHECK(out.find("converged 1") != std::string::npos);

    // spectrum of the stored schedule to stdout
    CHECK(run({"analyze", "--config", cfg.string(), "--out", "-"}, &out, &err) == 0);
    CHECK(out.find("order frequency_Hz amplitude_A m_scaled membership") != std::string::npos);
    CHECK(out.find("thd_percent ") != std::string::npos);

    // steady-state trace
    const std::filesystem::path trace_path = dir / "trace.csv";
    CHECK(run({"simulate", "--config", cfg.string(), "--out", trace_path.string()}, &out, &err) == 0);
    CHECK(out.find("samples 15232") != std::string::npos); // 2 periods * 476 cycles * 16 samples
    {
        std::ifstream in(trace_path);
        const waveform_trace trace = ingest_trace(in, 24e6 / 476.0);
        CHECK(trace.periods >= 1);
    }

    // metrics via simulation of the stored schedule (ideal coil: no dissipation)
    CHECK(run({"metrics", "--config", cfg.string(), "--simulate", "--v-dc", "24", "--i-dc", "1.43"},
              &out, &err) == 0);
    CHECK(out.find("P_out_W 0\n") != std::string::npos);
    CHECK(out.find("note ideal model") != std::string::npos);
    CHECK(out.find("harmonic 1 ") != std::string::npos);

    // gate table export in levels format with a dead-time override
    const std::filesystem::path lut = dir / "export.txt";
    CHECK(run({"export", "--config", cfg.string(), "--out", lut.string(), "--format", "levels",
               "--dead-time", "2"},
              &out, &err) == 0);
    const lookup_table table = read_lookup_table_file(lut.string());
    CHECK(table.dead_time_cycles == 2);
    // the optimize run above rewrote the stored schedule; export follows it
    const switching_schedule stored = read_schedule_file((dir / "schedule.txt").string());
    CHECK(table.gate_words == to_lookup_table(stored, 2).gate_words);
}

TEST_CASE("command line reports measured metrics directly") {
    setenv("SHEWAVE_LOG", "quiet", 1);
    std::string out, err;
    CHECK(run({"metrics", "--v-dc", "24", "--i-dc", "1.43", "--p-out", "6.87", "--q-out", "224.81"},
              &out, &err) == 0);
    CHECK(out.find("P_DC_W 34.32") != std::string::npos);
    CHECK(out.find("eta_percent 20.0174825175") != std::string::npos);
    CHECK(out.find("zeta 6.55040792541") != std::string::npos);

    // missing inputs name the quantity
    CHECK(run({"metrics", "--v-dc", "24", "--p-out", "6.87", "--q-out", "224.81"}, &out, &err) == 2);
    CHECK(err.find("I_DC") != std::string::npos);
    CHECK(run({"metrics", "--v-dc", "24", "--i-dc", "1.43"}, &out, &err) == 2);
    CHECK(err.find("--trace") != std::string::npos);
}

TEST_CASE("command line exit codes by failure category") {
    setenv("SHEWAVE_LOG", "quiet", 1);
    const std::filesystem::path dir = scratch_dir();
    std::string out, err;

    // usage errors
    CHECK(run({}, &out, &err) == 1);
    CHECK(run({"--help"}, &out, &err) == 0);
    CHECK(run({"synth"}, &out, &err) == 1); // --config required

    // validation: unknown preset name
    const std::filesystem::path bad = write_text(dir / "bad.ini",
                                                 "[design]\nclock_frequency_MHz = 24\n"
                                                 "cycles_per_period = 476\npreset = f9\n"
                                                 "[circuit]\nv_dc_V = 24\ninductance_uH = 1.4\n");
    CHECK(run({"synth", "--config", bad.string(), "--out", (dir / "x.csv").string()}, &out, &err) == 2);
    CHECK(err.find("UnknownPreset") != std::string::npos);

    // validation: phase-shifted family has no quarter-wave design
    const std::filesystem::path f5 = write_text(dir / "f5.ini",
                                                "[design]\nclock_frequency_MHz = 24\n"
                                                "cycles_per_period = 476\npreset = f5\n"
                                                "[circuit]\nv_dc_V = 24\ninductance_uH = 1.4\n"
                                                "[export]\nschedule_path = " + (dir / "f5s.txt").string() +
                                                "\nspectrum_path = " + (dir / "f5r.txt").string() +
                                                "\nlookup_path = " + (dir / "f5l.txt").string() + "\n");
    CHECK(run({"design", "--config", f5.string(), "--fast"}, &out, &err) == 2);
    CHECK(err.find("NotQuarterSymmetric") != std::string::npos);

    // io: missing config file
    CHECK(run({"synth", "--config", (dir / "absent.ini").string()}, &out, &err) == 4);
}

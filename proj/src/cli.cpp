#include "shewave/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shewave/config.hpp"
#include "shewave/errors.hpp"
#include "shewave/io.hpp"
#include "shewave/optimizer.hpp"
#include "shewave/spectrum.hpp"

namespace shewave {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::vector<int> parse_order_list(const std::string& value) {
    std::vector<int> orders;
    std::string cur;
    auto flush = [&] {
        if (cur.empty()) return;
        char* end = nullptr;
        const long v = std::strtol(cur.c_str(), &end, 10);
        if (end == cur.c_str() || *end != '\0' || v < 1)
            raise(errc::bad_config, "bad harmonic order '" + cur + "' in order list");
        orders.push_back(static_cast<int>(v));
        cur.clear();
    };
    for (char ch : value) {
        if (ch == ',')
            flush();
        else if (ch != ' ')
            cur += ch;
    }
    flush();
    return orders;
}

void echo_transmitting(const design_config& cfg, std::ostream& out) {
    const objective_signal s = cfg.signal();
    out << "fundamental_Hz " << fmt(cfg.grid.fundamental_hz()) << "\n";
    out << "order weight phase_rad frequency_Hz\n";
    for (const auto& h : s.components)
        out << h.order << " " << fmt(h.weight) << " " << fmt(h.phase) << " "
            << fmt(h.order * cfg.grid.fundamental_hz()) << "\n";
}

spectrum_report analyzed_report(const switching_schedule& sched, const design_config& cfg) {
    spectrum_report report = analytic_coefficients(sched, cfg.circuit, cfg.effective_thd_max_order());
    classify(report, cfg.selected_orders(), cfg.constrained);
    return report;
}

int cmd_synth(const std::string& config_path, const std::string& out_path) {
    const design_config cfg = load_config(config_path);
    const objective_signal s = cfg.signal();
    echo_transmitting(cfg, std::cout);

    std::ofstream out(out_path);
    if (!out) raise(errc::io_failure, "cannot open " + out_path + " for writing");
    out << "time_s,objective,gradient\n";
    const double dt = cfg.grid.period_s() / cfg.grid.cycles_per_period;
    for (int k = 0; k < cfg.grid.cycles_per_period; ++k) {
        const double t = k * dt;
        out << fmt(t) << "," << fmt(eval(s, t)) << "," << fmt(eval_gradient(s, t)) << "\n";
    }
    if (!out.flush()) raise(errc::io_failure, "write to " + out_path + " failed");
    std::cout << "objective_csv " << out_path << "\n";
    return 0;
}

void emit_design_outputs(const design_config& cfg, const switching_schedule& sched) {
    write_schedule_file(cfg.schedule_path, sched);
    {
        std::ofstream out(cfg.spectrum_path);
        if (!out) raise(errc::io_failure, "cannot open " + cfg.spectrum_path + " for writing");
        write_spectrum_report(out, analyzed_report(sched, cfg), cfg.selected_orders(),
                              cfg.effective_thd_max_order());
        if (!out.flush()) raise(errc::io_failure, "write to " + cfg.spectrum_path + " failed");
    }
    write_lookup_table_file(cfg.lookup_path, to_lookup_table(sched, cfg.dead_time_cycles), table_format::gates);
    std::cout << "schedule " << cfg.schedule_path << "\n";
    std::cout << "spectrum " << cfg.spectrum_path << "\n";
    std::cout << "lookup_table " << cfg.lookup_path << " entries " << cfg.grid.cycles_per_period << "\n";
}

int cmd_design(const std::string& config_path, bool fast, bool optimize) {
    if (fast == optimize) raise(errc::bad_config, "design needs exactly one of --fast / --optimize");
    const design_config cfg = load_config(config_path);
    echo_transmitting(cfg, std::cout);

    switching_schedule sched = initial_schedule_from_objective(cfg.signal(), cfg.grid);
    if (optimize) {
        std::vector<double> lambda = cfg.lambda;
        if (lambda.empty()) lambda.assign(cfg.selected_orders().size(), 1.0);
        optimization_problem problem =
            make_problem(sched, cfg.selected_orders(), std::move(lambda), cfg.constrained, cfg.epsilon_values());
        problem.max_iterations = cfg.max_iterations;
        problem.multistart = cfg.multistart;
        const optimization_result res = solve(problem, sched.angles_rad());
        sched = with_angles(sched, res.quantized_cycles);
        std::cout << "objective " << fmt(res.objective) << " max_violation " << fmt(res.max_violation)
                  << " converged " << (res.converged ? 1 : 0) << " iterations " << res.iterations << "\n";
        std::cout << "quantized_cycles";
        for (int c : res.quantized_cycles) std::cout << " " << c;
        std::cout << "\n";
    }
    emit_design_outputs(cfg, sched);
    return 0;
}

int cmd_analyze(const std::string& config_path, const std::string& schedule_path, const std::string& out_path) {
    const design_config cfg = load_config(config_path);
    const switching_schedule sched = read_schedule_file(schedule_path.empty() ? cfg.schedule_path : schedule_path);
    const spectrum_report report = analyzed_report(sched, cfg);
    if (out_path == "-") {
        write_spectrum_report(std::cout, report, cfg.selected_orders(), cfg.effective_thd_max_order());
    } else {
        std::ofstream out(out_path.empty() ? cfg.spectrum_path : out_path);
        if (!out) raise(errc::io_failure, "cannot open spectrum output for writing");
        write_spectrum_report(out, report, cfg.selected_orders(), cfg.effective_thd_max_order());
        if (!out.flush()) raise(errc::io_failure, "spectrum write failed");
        std::cout << "spectrum " << (out_path.empty() ? cfg.spectrum_path : out_path) << "\n";
    }
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& schedule_path, const std::string& out_path) {
    const design_config cfg = load_config(config_path);
    const switching_schedule sched = read_schedule_file(schedule_path.empty() ? cfg.schedule_path : schedule_path);
    const waveform_trace trace = simulate(sched, cfg.circuit, cfg.samples_per_cycle, cfg.periods);
    write_trace_csv_file(out_path, trace);
    std::cout << "trace " << out_path << " samples " << trace.u.size() << " periods " << trace.periods << "\n";
    return 0;
}

struct metrics_args {
    std::string config_path;
    std::string trace_path;
    bool use_simulate = false;
    std::string schedule_path;
    std::string orders = "";
    std::optional<double> v_dc, i_dc, p_out, q_out;
    std::string out_path = "-";
};

int cmd_metrics(const metrics_args& args) {
    if (!args.v_dc) raise(errc::bad_config, "missing input V_DC (--v-dc): the DC-side power needs it");
    if (!args.i_dc) raise(errc::bad_config, "missing input I_DC (--i-dc): the DC-side power needs it");

    double p_out = 0.0, q_out = 0.0;
    std::vector<harmonic_phasor> phasors;
    std::string note;

    if (args.p_out || args.q_out) {
        // direct arithmetic over measured values
        if (!args.p_out) raise(errc::bad_config, "missing input P_out (--p-out)");
        if (!args.q_out) raise(errc::bad_config, "missing input Q_out (--q-out)");
        p_out = *args.p_out;
        q_out = *args.q_out;
    } else {
        if (!args.use_simulate && args.trace_path.empty())
            raise(errc::bad_config, "metrics needs --trace, --simulate, or direct --p-out/--q-out values");
        const design_config cfg = load_config(args.config_path);
        std::vector<int> orders =
            args.orders.empty() ? cfg.selected_orders() : parse_order_list(args.orders);
        waveform_trace trace;
        if (args.use_simulate) {
            const switching_schedule sched =
                read_schedule_file(args.schedule_path.empty() ? cfg.schedule_path : args.schedule_path);
            trace = simulate(sched, cfg.circuit, cfg.samples_per_cycle, cfg.periods);
        } else {
            std::ifstream in(args.trace_path);
            if (!in) raise(errc::io_failure, "cannot open " + args.trace_path);
            trace = ingest_trace(in, cfg.grid.fundamental_hz());
        }
        q_out = reactive_power(trace, orders, cfg.grid, &phasors);
        if (args.use_simulate && cfg.circuit.r_series == 0.0) {
            // a lossless network absorbs no real power; the quadrature
            // residual is noise, not dissipation
            p_out = 0.0;
            note = "ideal model: no dissipation, P_out forced to 0";
        } else {
            p_out = real_power(trace);
        }
    }

    power_metrics metrics = efficiency_metrics(*args.v_dc, *args.i_dc, p_out, q_out);
    metrics.harmonics = std::move(phasors);
    if (args.out_path == "-") {
        write_metric_report(std::cout, metrics, note);
    } else {
        std::ofstream out(args.out_path);
        if (!out) raise(errc::io_failure, "cannot open " + args.out_path + " for writing");
        write_metric_report(out, metrics, note);
        if (!out.flush()) raise(errc::io_failure, "metric write failed");
        std::cout << "metrics " << args.out_path << "\n";
    }
    return 0;
}

int cmd_export(const std::string& config_path, const std::string& schedule_path, const std::string& out_path,
               const std::string& format, int dead_time) {
    const design_config cfg = load_config(config_path);
    const switching_schedule sched = read_schedule_file(schedule_path.empty() ? cfg.schedule_path : schedule_path);
    const lookup_table table = to_lookup_table(sched, dead_time >= 0 ? dead_time : cfg.dead_time_cycles);
    const table_format tf = format == "levels" ? table_format::levels : table_format::gates;
    const std::string path = out_path.empty() ? cfg.lookup_path : out_path;
    write_lookup_table_file(path, table, tf);
    std::cout << "lookup_table " << path << " entries " << table.levels.size() << "\n";
    return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    const char* log_env = std::getenv("SHEWAVE_LOG");
    if (!log_env || std::string(log_env) != "quiet") std::cerr << "shewave 1.0.0\n";

    CLI::App app{"multi-frequency switching-schedule design for Class D coil drivers"};
    app.require_subcommand(1);

    std::string config_path, schedule_path, out_path, format = "gates";
    bool fast = false, optimize = false;
    int dead_time = -1;
    metrics_args margs;

    CLI::App* synth = app.add_subcommand("synth", "objective summary and sampled waveform CSV");
    synth->add_option("--config", config_path, "design config file")->required();
    synth->add_option("--out", out_path, "objective CSV path")->default_val("objective.csv");

    CLI::App* design = app.add_subcommand("design", "compute a switching schedule and reports");
    design->add_option("--config", config_path, "design config file")->required();
    design->add_flag("--fast", fast, "gradient-zero initial schedule only");
    design->add_flag("--optimize", optimize, "full constrained optimization");

    CLI::App* analyze = app.add_subcommand("analyze", "spectrum report of an existing schedule");
    analyze->add_option("--config", config_path, "design config file")->required();
    analyze->add_option("--schedule", schedule_path, "schedule file (default: config schedule_path)");
    analyze->add_option("--out", out_path, "report path, - for stdout")->default_val("-");

    CLI::App* simulate = app.add_subcommand("simulate", "exact RL steady-state trace CSV");
    simulate->add_option("--config", config_path, "design config file")->required();
    simulate->add_option("--schedule", schedule_path, "schedule file (default: config schedule_path)");
    simulate->add_option("--out", out_path, "trace CSV path")->default_val("trace.csv");

    CLI::App* metrics = app.add_subcommand("metrics", "power and efficiency report");
    metrics->add_option("--config", margs.config_path, "design config file");
    metrics->add_option("--trace", margs.trace_path, "measured trace CSV to ingest");
    metrics->add_flag("--simulate", margs.use_simulate, "simulate the configured schedule");
    metrics->add_option("--schedule", margs.schedule_path, "schedule file for --simulate");
    metrics->add_option("--orders", margs.orders, "transmitting orders, comma separated");
    metrics->add_option("--v-dc", [&](const CLI::results_t& r) { margs.v_dc = std::stod(r[0]); return true; },
                        "DC supply voltage, volts");
    metrics->add_option("--i-dc", [&](const CLI::results_t& r) { margs.i_dc = std::stod(r[0]); return true; },
                        "DC supply current, amperes");
    metrics->add_option("--p-out", [&](const CLI::results_t& r) { margs.p_out = std::stod(r[0]); return true; },
                        "measured output real power, watts");
    metrics->add_option("--q-out", [&](const CLI::results_t& r) { margs.q_out = std::stod(r[0]); return true; },
                        "measured output reactive power, var");
    metrics->add_option("--out", margs.out_path, "report path, - for stdout")->default_val("-");

    CLI::App* exp = app.add_subcommand("export", "gate lookup table for an existing schedule");
    exp->add_option("--config", config_path, "design config file")->required();
    exp->add_option("--schedule", schedule_path, "schedule file (default: config schedule_path)");
    exp->add_option("--out", out_path, "lookup table path (default: config lookup_path)");
    exp->add_option("--format", format, "gates | levels")->check(CLI::IsMember({"gates", "levels"}));
    exp->add_option("--dead-time", dead_time, "dead time in clock cycles (default: config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e); // prints usage/error text
        return e.get_exit_code() == 0 ? 0 : 1;
    }

    try {
        if (synth->parsed()) return cmd_synth(config_path, out_path);
        if (design->parsed()) return cmd_design(config_path, fast, optimize);
        if (analyze->parsed()) return cmd_analyze(config_path, schedule_path, out_path);
        if (simulate->parsed()) return cmd_simulate(config_path, schedule_path, out_path);
        if (metrics->parsed()) return cmd_metrics(margs);
        if (exp->parsed()) return cmd_export(config_path, schedule_path, out_path, format, dead_time);
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (category(e.code())) {
        case error_category::optimizer: return 3;
        case error_category::io: return 4;
        case error_category::validation: return 2;
        }
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

} // namespace shewave

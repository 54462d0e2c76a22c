#include "shewave/io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "shewave/errors.hpp"

namespace shewave {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string trimmed(std::string line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n' || line.back() == ' ')) line.pop_back();
    std::size_t b = 0;
    while (b < line.size() && line[b] == ' ') ++b;
    return line.substr(b);
}

bool next_row(std::istream& in, std::string& row, int& line_no) {
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        row = trimmed(line);
        if (!row.empty() && row.front() != '#') return true;
    }
    return false;
}

long long parse_ll(const std::string& s, const std::string& where) {
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0') raise(errc::malformed_row, where + ": expected an integer, got '" + s + "'");
    return v;
}

double parse_d(const std::string& s, const std::string& where) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') raise(errc::malformed_row, where + ": expected a number, got '" + s + "'");
    return v;
}

std::vector<std::string> fields(const std::string& row) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : row) {
        if (ch == ' ' || ch == '\t') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

} // namespace

// -- switching schedule -------------------------------------------------------

void write_schedule(std::ostream& out, const switching_schedule& sched) {
    out << "clock_frequency_Hz " << fmt(sched.grid.clock_hz) << "\n";
    out << "cycles_per_period " << sched.grid.cycles_per_period << "\n";
    out << "start_level " << sched.start_level << "\n";
    out << "level_max " << sched.level_max << "\n";
    out << "edges " << sched.edges.size() << "\n";
    for (const auto& e : sched.edges) out << e.cycle << " " << e.step << "\n";
    if (sched.boundary_edge) out << "boundary_step " << sched.boundary_edge->step << "\n";
}

switching_schedule read_schedule(std::istream& in) {
    int line_no = 0;
    std::string row;
    auto need = [&](const char* key) {
        if (!next_row(in, row, line_no)) raise(errc::malformed_row, std::string("missing ") + key + " line");
        const std::vector<std::string> f = fields(row);
        if (f.size() != 2 || f[0] != key)
            raise(errc::malformed_row, "line " + std::to_string(line_no) + ": expected '" + key + " <value>'");
        return f[1];
    };
    const double clock_hz = parse_d(need("clock_frequency_Hz"), "clock_frequency_Hz");
    const int cycles = static_cast<int>(parse_ll(need("cycles_per_period"), "cycles_per_period"));
    const int start_level = static_cast<int>(parse_ll(need("start_level"), "start_level"));
    const int level_max = static_cast<int>(parse_ll(need("level_max"), "level_max"));
    const long long edge_count = parse_ll(need("edges"), "edges");
    if (edge_count < 0) raise(errc::malformed_row, "edge count must be >= 0");

    std::vector<switching_edge> edges;
    edges.reserve(static_cast<std::size_t>(edge_count));
    for (long long k = 0; k < edge_count; ++k) {
        if (!next_row(in, row, line_no)) raise(errc::malformed_row, "expected " + std::to_string(edge_count) +
                                                                        " edge lines, got " + std::to_string(k));
        const std::vector<std::string> f = fields(row);
        if (f.size() != 2)
            raise(errc::malformed_row, "line " + std::to_string(line_no) + ": expected 'cycle step'");
        edges.push_back({static_cast<int>(parse_ll(f[0], "edge cycle")), static_cast<int>(parse_ll(f[1], "edge step"))});
    }
    std::optional<int> boundary_step;
    if (next_row(in, row, line_no)) {
        const std::vector<std::string> f = fields(row);
        if (f.size() != 2 || f[0] != "boundary_step")
            raise(errc::malformed_row, "line " + std::to_string(line_no) + ": expected 'boundary_step <value>'");
        boundary_step = static_cast<int>(parse_ll(f[1], "boundary_step"));
    }
    return build_schedule(make_grid(clock_hz, cycles), std::move(edges), start_level, level_max, boundary_step);
}

void write_schedule_file(const std::string& path, const switching_schedule& sched) {
    std::ofstream out(path);
    if (!out) raise(errc::io_failure, "cannot open " + path + " for writing");
    write_schedule(out, sched);
    if (!out.flush()) raise(errc::io_failure, "write to " + path + " failed");
}

switching_schedule read_schedule_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(errc::io_failure, "cannot open " + path);
    return read_schedule(in);
}

// -- lookup table ---------------------------------------------------------------

void write_lookup_table(std::ostream& out, const lookup_table& table, table_format format) {
    out << "clock_frequency_Hz " << fmt(table.grid.clock_hz) << "\n";
    out << "cycles_per_period " << table.grid.cycles_per_period << "\n";
    out << "level_max " << table.level_max << "\n";
    out << "dead_time_cycles " << table.dead_time_cycles << "\n";
    out << "format " << (format == table_format::gates ? "gates" : "levels") << "\n";
    if (format == table_format::gates) {
        const int bits = table.gates_per_cycle();
        for (std::uint16_t word : table.gate_words) {
            char line[17];
            for (int b = 0; b < bits; ++b) line[b] = (word >> (bits - 1 - b)) & 1 ? '1' : '0';
            line[bits] = '\0';
            out << line << "\n";
        }
    } else {
        for (int level : table.levels) out << level << "\n";
    }
}

lookup_table read_lookup_table(std::istream& in) {
    int line_no = 0;
    std::string row;
    auto need = [&](const char* key) {
        if (!next_row(in, row, line_no)) raise(errc::malformed_row, std::string("missing ") + key + " line");
        const std::vector<std::string> f = fields(row);
        if (f.size() != 2 || f[0] != key)
            raise(errc::malformed_row, "line " + std::to_string(line_no) + ": expected '" + key + " <value>'");
        return f[1];
    };
    lookup_table table;
    const double clock_hz = parse_d(need("clock_frequency_Hz"), "clock_frequency_Hz");
    const int cycles = static_cast<int>(parse_ll(need("cycles_per_period"), "cycles_per_period"));
    table.grid = make_grid(clock_hz, cycles);
    table.level_max = static_cast<int>(parse_ll(need("level_max"), "level_max"));
    table.dead_time_cycles = static_cast<int>(parse_ll(need("dead_time_cycles"), "dead_time_cycles"));
    if (table.level_max != 1 && table.level_max != 2)
        raise(errc::malformed_row, "level_max must be 1 or 2, got " + std::to_string(table.level_max));
    if (table.dead_time_cycles < 0) raise(errc::malformed_row, "dead_time_cycles must be >= 0");
    const std::string format = need("format");
    if (format != "gates" && format != "levels")
        raise(errc::malformed_row, "format must be 'gates' or 'levels', got '" + format + "'");

    const int bits = table.level_max == 1 ? 4 : 8;
    std::vector<std::uint16_t> words;
    std::vector<int> levels;
    while (next_row(in, row, line_no)) {
        if (format == "gates") {
            if (row.size() != static_cast<std::size_t>(bits))
                raise(errc::malformed_row,
                      "line " + std::to_string(line_no) + ": expected " + std::to_string(bits) + " gate bits");
            std::uint16_t word = 0;
            for (char ch : row) {
                if (ch != '0' && ch != '1')
                    raise(errc::malformed_row, "line " + std::to_string(line_no) + ": gate bits must be 0/1");
                word = static_cast<std::uint16_t>((word << 1) | (ch == '1'));
            }
            words.push_back(word);
        } else {
            levels.push_back(static_cast<int>(parse_ll(row, "level")));
        }
    }
    if ((format == "gates" ? words.size() : levels.size()) != static_cast<std::size_t>(cycles))
        raise(errc::malformed_row, "expected " + std::to_string(cycles) + " table lines");

    if (format == "levels") {
        for (int level : levels)
            if (std::abs(level) > table.level_max)
                raise(errc::level_overflow, "table level " + std::to_string(level) + " exceeds level_max");
        table.levels = std::move(levels);
        table.gate_words = assemble_gate_words(table.levels, table.level_max, table.dead_time_cycles);
    } else {
        table.gate_words = std::move(words);
        // Levels from the driven gates; a cycle in dead time (a leg all-off)
        // belongs to the upcoming level, so it inherits from the next fully
        // driven cycle.
        const std::size_t n = table.gate_words.size();
        table.levels.assign(n, 0);
        std::vector<bool> known(n, false);
        const int cells = table.level_max == 1 ? 1 : 2;
        for (std::size_t k = 0; k < n; ++k) {
            int level = 0;
            bool full = true;
            for (int cell = 0; cell < cells; ++cell) {
                const std::uint16_t nib = (table.gate_words[k] >> ((cells - 1 - cell) * 4)) & 0xF;
                if (((nib & 0b1000) && (nib & 0b0100)) || ((nib & 0b0010) && (nib & 0b0001)))
                    raise(errc::shoot_through, "cycle " + std::to_string(k) + " drives both switches of one leg");
                switch (nib) {
                case 0b1001: level += 1; break;
                case 0b0110: level -= 1; break;
                case 0b0101: break;
                default: full = false; break;
                }
            }
            if (full) {
                table.levels[k] = level;
                known[k] = true;
            }
        }
        for (int pass = 0; pass < 2; ++pass) // second pass resolves the wrap at n-1 -> 0
            for (std::size_t k = n; k-- > 0;)
                if (!known[k]) table.levels[k] = table.levels[(k + 1) % n];
    }
    return table;
}

void write_lookup_table_file(const std::string& path, const lookup_table& table, table_format format) {
    std::ofstream out(path);
    if (!out) raise(errc::io_failure, "cannot open " + path + " for writing");
    write_lookup_table(out, table, format);
    if (!out.flush()) raise(errc::io_failure, "write to " + path + " failed");
}

lookup_table read_lookup_table_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(errc::io_failure, "cannot open " + path);
    return read_lookup_table(in);
}

// -- waveform trace CSV ---------------------------------------------------------

void write_trace_csv(std::ostream& out, const waveform_trace& trace) {
    out << "time_s,voltage_V,current_A\n";
    for (std::size_t n = 0; n < trace.u.size(); ++n)
        out << fmt(static_cast<double>(n) * trace.sample_dt) << "," << fmt(trace.u[n]) << "," << fmt(trace.i[n])
            << "\n";
}

void write_trace_csv_file(const std::string& path, const waveform_trace& trace) {
    std::ofstream out(path);
    if (!out) raise(errc::io_failure, "cannot open " + path + " for writing");
    write_trace_csv(out, trace);
    if (!out.flush()) raise(errc::io_failure, "write to " + path + " failed");
}

// -- reports ----------------------------------------------------------------

void write_spectrum_report(std::ostream& out, const spectrum_report& report, const std::vector<int>& selected,
                           int thd_max_order) {
    out << "order frequency_Hz amplitude_A m_scaled membership\n";
    for (const auto& line : report.lines) {
        const double amp = std::hypot(line.a, line.b);
        const char* tag = line.member == membership::selected     ? "selected"
                          : line.member == membership::eliminated ? "eliminated"
                                                                  : "other";
        out << line.order << " " << fmt(line.freq_hz) << " " << fmt(amp) << " "
            << (report.has_modulation ? fmt(line.m_scaled) : std::string("-")) << " " << tag << "\n";
    }
    if (!selected.empty() && thd_max_order > 0)
        out << "thd_percent " << fmt(thd(report, selected, thd_max_order)) << " max_order " << thd_max_order
            << "\n";
}

void write_metric_report(std::ostream& out, const power_metrics& metrics, const std::string& note) {
    out << "V_DC_V " << fmt(metrics.v_dc) << "\n";
    out << "I_DC_A " << fmt(metrics.i_dc) << "\n";
    out << "P_DC_W " << fmt(metrics.p_dc) << "\n";
    out << "P_out_W " << fmt(metrics.p_out) << "\n";
    out << "Q_out_var " << fmt(metrics.q_out) << "\n";
    out << "eta_percent " << fmt(100.0 * metrics.eta) << "\n";
    out << "zeta " << fmt(metrics.zeta) << "\n";
    for (const auto& h : metrics.harmonics)
        out << "harmonic " << h.order << " U_rms_V " << fmt(h.u_rms) << " I_rms_A " << fmt(h.i_rms) << " theta_rad "
            << fmt(h.theta) << "\n";
    if (!note.empty()) out << "note " << note << "\n";
}

} // namespace shewave

#include "shewave/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>

#include "shewave/errors.hpp"

namespace shewave {

objective_signal design_config::signal() const {
    if (!preset_name.empty()) return preset(preset_name, grid.omega());
    return make_objective(grid.omega(), harmonics);
}

std::vector<int> design_config::selected_orders() const {
    const objective_signal s = signal();
    std::vector<int> orders;
    orders.reserve(s.components.size());
    for (const auto& h : s.components) orders.push_back(h.order);
    return orders;
}

std::vector<double> design_config::epsilon_values() const {
    if (!epsilon.empty()) {
        if (epsilon.size() != constrained.size())
            raise(errc::bad_config, "optimizer.epsilon needs one entry per constrained order");
        return epsilon;
    }
    if (epsilon_scaled_bound) {
        std::vector<double> out;
        out.reserve(constrained.size());
        for (int p : constrained) out.push_back(*epsilon_scaled_bound * p);
        return out;
    }
    if (!constrained.empty())
        raise(errc::bad_config, "constrained orders given without optimizer.epsilon or epsilon_scaled_bound");
    return {};
}

int design_config::effective_thd_max_order() const {
    if (thd_max_order > 0) return thd_max_order;
    int highest = 1;
    for (int p : selected_orders()) highest = std::max(highest, p);
    return 2 * highest + 1;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return s.substr(b, e - b);
}

double parse_number(const std::string& value, const std::string& where) {
    const std::string v = trim(value);
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        raise(errc::bad_config, where + ": expected a number, got '" + value + "'");
    return x;
}

int parse_integer(const std::string& value, const std::string& where) {
    const double x = parse_number(value, where);
    const int i = static_cast<int>(x);
    if (static_cast<double>(i) != x) raise(errc::bad_config, where + ": expected an integer, got '" + value + "'");
    return i;
}

std::vector<std::string> split(const std::string& value, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : value) {
        if (ch == sep) {
            parts.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    parts.push_back(trim(cur));
    while (!parts.empty() && parts.back().empty()) parts.pop_back();
    return parts;
}

std::vector<harmonic_component> parse_harmonics(const std::string& value, const std::string& where) {
    std::vector<harmonic_component> out;
    for (const std::string& item : split(value, ';')) {
        const std::vector<std::string> f = split(item, ':');
        if (f.size() != 2 && f.size() != 3)
            raise(errc::bad_config, where + ": expected order:weight or order:weight:phase, got '" + item + "'");
        harmonic_component h;
        h.order = parse_integer(f[0], where);
        h.weight = parse_number(f[1], where);
        h.phase = f.size() == 3 ? parse_number(f[2], where) : 0.0;
        out.push_back(h);
    }
    return out;
}

struct raw_config {
    // section -> key -> value, with duplicates rejected at insert
    std::map<std::string, std::map<std::string, std::string>> kv;

    bool has(const std::string& sec, const std::string& key) const {
        const auto s = kv.find(sec);
        return s != kv.end() && s->second.count(key) > 0;
    }
    std::string take(const std::string& sec, const std::string& key) {
        return kv[sec][key];
    }
};

const std::map<std::string, std::vector<std::string>> kKnownKeys = {
    {"design",
     {"clock_frequency_MHz", "clock_frequency_Hz", "fundamental_frequency_Hz", "fundamental_frequency_kHz",
      "cycles_per_period", "preset", "harmonics"}},
    {"circuit", {"v_dc_V", "v0_V", "inductance_uH", "inductance_H", "r_series_ohm"}},
    {"optimizer",
     {"lambda", "constrained", "epsilon", "epsilon_scaled_bound", "thd_max_order", "max_iterations",
      "multistart"}},
    {"export",
     {"dead_time_cycles", "samples_per_cycle", "periods", "schedule_path", "spectrum_path", "lookup_path"}},
};

} // namespace

design_config parse_config(std::istream& in) {
    raw_config raw;
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string row = trim(line);
        if (row.empty()) continue;
        if (row.front() == '[') {
            if (row.back() != ']')
                raise(errc::bad_config, "line " + std::to_string(line_no) + ": unterminated section header");
            section = trim(row.substr(1, row.size() - 2));
            if (kKnownKeys.find(section) == kKnownKeys.end())
                raise(errc::bad_config, "line " + std::to_string(line_no) + ": unknown section [" + section + "]");
            continue;
        }
        const std::size_t eq = row.find('=');
        if (eq == std::string::npos)
            raise(errc::bad_config, "line " + std::to_string(line_no) + ": expected key = value");
        if (section.empty())
            raise(errc::bad_config, "line " + std::to_string(line_no) + ": key outside any section");
        const std::string key = trim(row.substr(0, eq));
        const std::string value = trim(row.substr(eq + 1));
        const auto& known = kKnownKeys.at(section);
        if (std::find(known.begin(), known.end(), key) == known.end())
            raise(errc::bad_config, "unknown key " + section + "." + key);
        if (!raw.kv[section].emplace(key, value).second)
            raise(errc::bad_config, "duplicate key " + section + "." + key);
    }

    design_config cfg;

    // ---- design: timing grid
    if (!raw.has("design", "cycles_per_period")) raise(errc::bad_config, "design.cycles_per_period is required");
    const int cycles = parse_integer(raw.take("design", "cycles_per_period"), "design.cycles_per_period");
    int freq_keys = 0;
    double clock_hz = 0.0;
    if (raw.has("design", "clock_frequency_MHz")) {
        clock_hz = parse_number(raw.take("design", "clock_frequency_MHz"), "design.clock_frequency_MHz") * 1e6;
        ++freq_keys;
    }
    if (raw.has("design", "clock_frequency_Hz")) {
        clock_hz = parse_number(raw.take("design", "clock_frequency_Hz"), "design.clock_frequency_Hz");
        ++freq_keys;
    }
    if (raw.has("design", "fundamental_frequency_Hz")) {
        clock_hz =
            parse_number(raw.take("design", "fundamental_frequency_Hz"), "design.fundamental_frequency_Hz") * cycles;
        ++freq_keys;
    }
    if (raw.has("design", "fundamental_frequency_kHz")) {
        clock_hz = parse_number(raw.take("design", "fundamental_frequency_kHz"), "design.fundamental_frequency_kHz") *
                   1e3 * cycles;
        ++freq_keys;
    }
    if (freq_keys != 1)
        raise(errc::bad_config, "design needs exactly one of clock_frequency_MHz / clock_frequency_Hz / "
                                "fundamental_frequency_Hz / fundamental_frequency_kHz");
    cfg.grid = make_grid(clock_hz, cycles);

    // ---- design: objective
    const bool has_preset = raw.has("design", "preset");
    const bool has_harmonics = raw.has("design", "harmonics");
    if (has_preset == has_harmonics)
        raise(errc::bad_config, "design needs exactly one of preset / harmonics");
    if (has_preset) cfg.preset_name = raw.take("design", "preset");
    if (has_harmonics) cfg.harmonics = parse_harmonics(raw.take("design", "harmonics"), "design.harmonics");

    // ---- circuit
    if (!raw.has("circuit", "v_dc_V")) raise(errc::bad_config, "circuit.v_dc_V is required");
    const double v_dc = parse_number(raw.take("circuit", "v_dc_V"), "circuit.v_dc_V");
    const double v0 = raw.has("circuit", "v0_V") ? parse_number(raw.take("circuit", "v0_V"), "circuit.v0_V") : v_dc;
    double inductance = 0.0;
    if (raw.has("circuit", "inductance_uH") == raw.has("circuit", "inductance_H"))
        raise(errc::bad_config, "circuit needs exactly one of inductance_uH / inductance_H");
    if (raw.has("circuit", "inductance_uH"))
        inductance = parse_number(raw.take("circuit", "inductance_uH"), "circuit.inductance_uH") * 1e-6;
    else
        inductance = parse_number(raw.take("circuit", "inductance_H"), "circuit.inductance_H");
    const double r_series =
        raw.has("circuit", "r_series_ohm") ? parse_number(raw.take("circuit", "r_series_ohm"), "circuit.r_series_ohm")
                                           : 0.0;
    cfg.circuit = make_circuit(v_dc, v0, inductance, r_series, cfg.grid.omega());

    // ---- optimizer
    if (raw.has("optimizer", "lambda"))
        for (const std::string& item : split(raw.take("optimizer", "lambda"), ','))
            cfg.lambda.push_back(parse_number(item, "optimizer.lambda"));
    if (raw.has("optimizer", "constrained"))
        for (const std::string& item : split(raw.take("optimizer", "constrained"), ','))
            cfg.constrained.push_back(parse_integer(item, "optimizer.constrained"));
    if (raw.has("optimizer", "epsilon"))
        for (const std::string& item : split(raw.take("optimizer", "epsilon"), ','))
            cfg.epsilon.push_back(parse_number(item, "optimizer.epsilon"));
    if (raw.has("optimizer", "epsilon_scaled_bound"))
        cfg.epsilon_scaled_bound =
            parse_number(raw.take("optimizer", "epsilon_scaled_bound"), "optimizer.epsilon_scaled_bound");
    if (raw.has("optimizer", "thd_max_order"))
        cfg.thd_max_order = parse_integer(raw.take("optimizer", "thd_max_order"), "optimizer.thd_max_order");
    if (raw.has("optimizer", "max_iterations"))
        cfg.max_iterations = parse_integer(raw.take("optimizer", "max_iterations"), "optimizer.max_iterations");
    if (raw.has("optimizer", "multistart"))
        cfg.multistart = parse_integer(raw.take("optimizer", "multistart"), "optimizer.multistart");

    // ---- export
    if (raw.has("export", "dead_time_cycles"))
        cfg.dead_time_cycles = parse_integer(raw.take("export", "dead_time_cycles"), "export.dead_time_cycles");
    if (raw.has("export", "samples_per_cycle"))
        cfg.samples_per_cycle = parse_integer(raw.take("export", "samples_per_cycle"), "export.samples_per_cycle");
    if (raw.has("export", "periods")) cfg.periods = parse_integer(raw.take("export", "periods"), "export.periods");
    if (raw.has("export", "schedule_path")) cfg.schedule_path = raw.take("export", "schedule_path");
    if (raw.has("export", "spectrum_path")) cfg.spectrum_path = raw.take("export", "spectrum_path");
    if (raw.has("export", "lookup_path")) cfg.lookup_path = raw.take("export", "lookup_path");

    // cross-field validation while the section/key context is still known
    const std::vector<int> orders = cfg.selected_orders();
    if (!cfg.lambda.empty() && cfg.lambda.size() != orders.size())
        raise(errc::bad_config, "optimizer.lambda needs one entry per selected order (" +
                                    std::to_string(orders.size()) + "), got " + std::to_string(cfg.lambda.size()));
    cfg.epsilon_values();
    for (int p : cfg.constrained)
        if (std::find(orders.begin(), orders.end(), p) != orders.end())
            raise(errc::bad_config, "order " + std::to_string(p) + " is both selected and constrained");
    return cfg;
}

design_config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(errc::io_failure, "cannot open config file " + path);
    return parse_config(in);
}

} // namespace shewave

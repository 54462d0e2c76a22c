#include "shewave/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <numbers>
#include <string>

#include "shewave/errors.hpp"
#include "shewave/kernels.hpp"

namespace shewave {

circuit_params make_circuit(double v_dc, double v0, double inductance, double r_series, double omega) {
    if (!(v_dc > 0.0)) raise(errc::bad_config, "v_dc must be positive");
    if (!(v0 > 0.0)) raise(errc::bad_config, "v0 must be positive");
    if (!(inductance > 0.0)) raise(errc::bad_config, "inductance must be positive");
    if (!(r_series >= 0.0)) raise(errc::bad_config, "r_series must be >= 0");
    if (!(omega > 0.0)) raise(errc::non_positive_frequency, "fundamental must be positive");
    return {v_dc, v0, inductance, r_series, omega};
}

namespace {

void check_alignment(const switching_schedule& sched, const circuit_params& circuit, int samples_per_cycle) {
    make_circuit(circuit.v_dc, circuit.v0, circuit.inductance, circuit.r_series, circuit.omega);
    if (samples_per_cycle < 4)
        raise(errc::bad_config, "samples_per_cycle must be >= 4, got " + std::to_string(samples_per_cycle));
    const double omega = sched.grid.omega();
    if (std::abs(circuit.omega - omega) > 1e-9 * omega)
        raise(errc::bad_config, "circuit fundamental does not match the schedule's timing grid");
}

// Bridge voltage per sample; the sample on a cycle boundary carries the
// midpoint of the adjacent levels (the value the Fourier series converges to
// at a jump), which keeps the periodic trapezoidal power quadrature exact
// for piecewise-constant voltage against piecewise-linear current.
std::vector<double> voltage_samples(const std::vector<int>& levels, double v0, int spc) {
    const std::size_t cycles = levels.size();
    std::vector<double> u(cycles * static_cast<std::size_t>(spc));
    for (std::size_t c = 0; c < cycles; ++c) {
        const int prev = levels[(c + cycles - 1) % cycles];
        u[c * spc] = 0.5 * v0 * (prev + levels[c]);
        for (int r = 1; r < spc; ++r) u[c * spc + r] = v0 * levels[c];
    }
    return u;
}

} // namespace

waveform_trace resemblance_current(const switching_schedule& sched, const circuit_params& circuit,
                                   int samples_per_cycle) {
    check_alignment(sched, circuit, samples_per_cycle);
    if (circuit.r_series != 0.0)
        raise(errc::bad_config, "resemblance current is the lossless integral; use simulate for r_series > 0");

    const std::vector<int> levels = expand_full_period(sched);
    const std::size_t cycles = levels.size();
    std::vector<long long> prefix(cycles);
    long long acc = 0;
    for (std::size_t c = 0; c < cycles; ++c) {
        prefix[c] = acc;
        acc += levels[c];
    }
    // acc == 0: the second half negates the first, so the current is periodic

    const double cycle_dt = sched.grid.period_s() / sched.grid.cycles_per_period;
    const double scale = circuit.v0 * cycle_dt / circuit.inductance;
    // continuous mean of the piecewise-linear current, removed so the
    // current is a pure odd sine series
    double mean = 0.0;
    for (std::size_t c = 0; c < cycles; ++c) mean += static_cast<double>(prefix[c]) + 0.5 * levels[c];
    const double offset = scale * mean / static_cast<double>(cycles);

    waveform_trace trace;
    trace.sample_dt = cycle_dt / samples_per_cycle;
    trace.periods = 1;
    trace.u = voltage_samples(levels, circuit.v0, samples_per_cycle);
    trace.i.resize(cycles * static_cast<std::size_t>(samples_per_cycle));
    kernels::fill_current(levels.data(), prefix.data(), cycles, samples_per_cycle, scale, offset,
                          trace.i.data(), true);
    return trace;
}

double rl_step(double i0, double v, double r, double inductance, double dt) {
    if (r == 0.0) return i0 + v * dt / inductance;
    const double x = r * dt / inductance;
    // i0*exp(-x) + (v/r)*(1 - exp(-x)), stable for small x via expm1
    return i0 * std::exp(-x) - (v / r) * std::expm1(-x);
}

waveform_trace simulate(const switching_schedule& sched, const circuit_params& circuit,
                        int samples_per_cycle, int periods) {
    check_alignment(sched, circuit, samples_per_cycle);
    if (periods < 1) raise(errc::bad_config, "periods must be >= 1, got " + std::to_string(periods));

    if (circuit.r_series == 0.0) {
        waveform_trace one = resemblance_current(sched, circuit, samples_per_cycle);
        waveform_trace trace;
        trace.sample_dt = one.sample_dt;
        trace.periods = periods;
        trace.u.reserve(one.u.size() * static_cast<std::size_t>(periods));
        trace.i.reserve(one.i.size() * static_cast<std::size_t>(periods));
        for (int k = 0; k < periods; ++k) {
            trace.u.insert(trace.u.end(), one.u.begin(), one.u.end());
            trace.i.insert(trace.i.end(), one.i.begin(), one.i.end());
        }
        return trace;
    }

    const std::vector<int> levels = expand_full_period(sched);
    const std::size_t cycles = levels.size();
    const double cycle_dt = sched.grid.period_s() / sched.grid.cycles_per_period;
    const double r = circuit.r_series;
    const double decay = std::exp(-r * cycle_dt / circuit.inductance);

    // One-period state-transition map i(T) = a_total*i(0) + b_total: each
    // cycle is affine in the entering current, so the composition is too.
    double a_total = 1.0, b_total = 0.0;
    for (std::size_t c = 0; c < cycles; ++c) {
        const double steady = circuit.v0 * levels[c] / r;
        a_total *= decay;
        b_total = decay * b_total + (1.0 - decay) * steady;
    }
    const double i_periodic = b_total / (1.0 - a_total);

    std::vector<double> sub_decay(static_cast<std::size_t>(samples_per_cycle));
    for (int s = 0; s < samples_per_cycle; ++s)
        sub_decay[static_cast<std::size_t>(s)] =
            std::exp(-r * cycle_dt * s / (circuit.inductance * samples_per_cycle));

    waveform_trace trace;
    trace.sample_dt = cycle_dt / samples_per_cycle;
    trace.periods = periods;
    const std::vector<double> u_one = voltage_samples(levels, circuit.v0, samples_per_cycle);
    trace.u.reserve(u_one.size() * static_cast<std::size_t>(periods));
    for (int k = 0; k < periods; ++k) trace.u.insert(trace.u.end(), u_one.begin(), u_one.end());

    trace.i.resize(cycles * static_cast<std::size_t>(samples_per_cycle) * static_cast<std::size_t>(periods));
    double i_cur = i_periodic;
    std::size_t n = 0;
    for (int k = 0; k < periods; ++k)
        for (std::size_t c = 0; c < cycles; ++c) {
            const double steady = circuit.v0 * levels[c] / r;
            for (int s = 0; s < samples_per_cycle; ++s)
                trace.i[n++] = steady + (i_cur - steady) * sub_decay[static_cast<std::size_t>(s)];
            i_cur = steady + (i_cur - steady) * decay;
        }
    return trace;
}

double real_power(const waveform_trace& trace) {
    if (trace.u.size() != trace.i.size() || trace.u.empty())
        raise(errc::bad_config, "trace voltage and current sample counts differ");
    if (trace.periods < 1 || trace.u.size() % static_cast<std::size_t>(trace.periods) != 0)
        raise(errc::non_integer_periods, "trace does not cover an integer number of periods");
    // Periodic samples: the trapezoid's two half-weight endpoints coincide,
    // so the quadrature reduces to the plain sample mean.
    double sum = 0.0;
    for (std::size_t n = 0; n < trace.u.size(); ++n) sum += trace.u[n] * trace.i[n];
    return sum / static_cast<double>(trace.u.size());
}

double reactive_power(const waveform_trace& trace, const std::vector<int>& transmitting_orders,
                      const timing_grid& grid, std::vector<harmonic_phasor>* phasors) {
    if (trace.u.size() != trace.i.size() || trace.u.size() < 2)
        raise(errc::too_short, "trace needs matching voltage/current samples");
    const double span = trace.sample_dt * static_cast<double>(trace.u.size());
    const double ratio = span / grid.period_s();
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio) || std::round(ratio) < 1.0)
        raise(errc::non_integer_periods,
              "trace covers " + std::to_string(ratio) + " fundamental periods; an integer count is required");

    const std::vector<kernels::ab_pair> cu = kernels::fourier_project(
        trace.u.data(), trace.u.size(), trace.sample_dt, grid.omega(), transmitting_orders, true);
    const std::vector<kernels::ab_pair> ci = kernels::fourier_project(
        trace.i.data(), trace.i.size(), trace.sample_dt, grid.omega(), transmitting_orders, true);

    if (phasors) phasors->clear();
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    double q = 0.0;
    for (std::size_t k = 0; k < transmitting_orders.size(); ++k) {
        // x(t) = a*cos + b*sin = A*sin(p*w*t + phi), phi = atan2(a, b)
        const double u_rms = std::hypot(cu[k].a, cu[k].b) * inv_sqrt2;
        const double i_rms = std::hypot(ci[k].a, ci[k].b) * inv_sqrt2;
        const double theta = std::atan2(cu[k].a, cu[k].b) - std::atan2(ci[k].a, ci[k].b);
        q += u_rms * i_rms * std::sin(theta);
        if (phasors) phasors->push_back({transmitting_orders[k], u_rms, i_rms, theta});
    }
    return q;
}

power_metrics efficiency_metrics(double v_dc, double i_dc, double p_out, double q_out) {
    const double p_dc = v_dc * i_dc;
    if (!(p_dc > 0.0)) raise(errc::zero_dc_power, "V_DC * I_DC must be positive to form ratios");
    power_metrics m;
    m.v_dc = v_dc;
    m.i_dc = i_dc;
    m.p_dc = p_dc;
    m.p_out = p_out;
    m.q_out = q_out;
    m.eta = p_out / p_dc;
    m.zeta = q_out / p_dc;
    return m;
}

namespace {

bool parse_row(const std::string& line, double out[3]) {
    const char* s = line.c_str();
    for (int col = 0; col < 3; ++col) {
        char* end = nullptr;
        out[col] = std::strtod(s, &end);
        if (end == s) return false;
        s = end;
        while (*s == ' ' || *s == '\t') ++s;
        if (col < 2) {
            if (*s != ',') return false;
            ++s;
        }
    }
    while (*s == ' ' || *s == '\t' || *s == '\r') ++s;
    return *s == '\0';
}

std::string trimmed(std::string line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n' || line.back() == ' ')) line.pop_back();
    std::size_t b = 0;
    while (b < line.size() && line[b] == ' ') ++b;
    return line.substr(b);
}

} // namespace

waveform_trace ingest_trace(std::istream& in, double fundamental_hz) {
    if (!(fundamental_hz > 0.0)) raise(errc::non_positive_frequency, "fundamental must be positive");

    std::string line;
    bool have_header = false;
    std::vector<double> t, u, i;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string row = trimmed(line);
        if (row.empty()) continue;
        if (!have_header) {
            if (row != "time_s,voltage_V,current_A")
                raise(errc::malformed_row, "line 1: expected header time_s,voltage_V,current_A");
            have_header = true;
            continue;
        }
        double v[3];
        if (!parse_row(row, v))
            raise(errc::malformed_row, "line " + std::to_string(line_no) + ": expected time,voltage,current");
        if (!t.empty() && v[0] <= t.back())
            raise(errc::non_monotone_time, "line " + std::to_string(line_no) + ": time must strictly increase");
        t.push_back(v[0]);
        u.push_back(v[1]);
        i.push_back(v[2]);
    }
    if (t.size() < 2) raise(errc::too_short, "trace has fewer than two samples");

    const double period = 1.0 / fundamental_hz;
    const double span = t.back() - t.front();
    const int periods = static_cast<int>(std::floor(span / period + 1e-9));
    if (periods < 1) raise(errc::too_short, "trace spans less than one fundamental period");

    // resample onto a uniform grid near the native rate, at least 64 samples
    // per period so downstream quadratures stay accurate
    const double native = static_cast<double>(t.size() - 1) * period / span;
    const int spp = std::max(64, static_cast<int>(std::lround(native)));
    const std::size_t total = static_cast<std::size_t>(spp) * static_cast<std::size_t>(periods);

    waveform_trace trace;
    trace.sample_dt = period / spp;
    trace.periods = periods;
    trace.u.resize(total);
    trace.i.resize(total);
    std::size_t seg = 0;
    for (std::size_t n = 0; n < total; ++n) {
        const double tn = std::min(t.front() + static_cast<double>(n) * trace.sample_dt, t.back());
        while (seg + 2 < t.size() && t[seg + 1] < tn) ++seg;
        const double w = (tn - t[seg]) / (t[seg + 1] - t[seg]);
        trace.u[n] = u[seg] + w * (u[seg + 1] - u[seg]);
        trace.i[n] = i[seg] + w * (i[seg + 1] - i[seg]);
    }
    return trace;
}

} // namespace shewave

#pragma once

#include <iosfwd>
#include <vector>

#include "shewave/grid.hpp"
#include "shewave/schedule.hpp"

namespace shewave {

// Electrical environment of the bridge + coil.
struct circuit_params {
    double v_dc = 0.0;       // supply, volts
    double v0 = 0.0;         // voltage step per level, volts (= v_dc for one bridge)
    double inductance = 0.0; // henries
    double r_series = 0.0;   // ohms, >= 0 (coil/loss resistance)
    double omega = 0.0;      // fundamental, rad/s
};

circuit_params make_circuit(double v_dc, double v0, double inductance, double r_series, double omega);

// Uniformly sampled bridge voltage u and coil current i covering
// `periods` full fundamental periods.  At a switching instant the voltage
// sample carries the midpoint of the two adjacent levels (the Fourier-series
// value at a jump); with that convention the periodic trapezoidal power
// quadrature of u*i is exact for piecewise-constant u against
// piecewise-linear i.
struct waveform_trace {
    double sample_dt = 0.0;
    std::vector<double> u; // volts
    std::vector<double> i; // amperes
    int periods = 0;

    std::size_t samples_per_period() const { return periods > 0 ? u.size() / periods : 0; }
};

// Ideal integral of the pulse voltage through the inductance (series R must
// be zero): exact piecewise-linear current with zero mean over the period.
waveform_trace resemblance_current(const switching_schedule& sched, const circuit_params& circuit,
                                   int samples_per_cycle);

// Exact RL response: L di/dt + R i = u with u piecewise constant, integrated
// segment-by-segment in closed form (no ODE stepping error); the initial
// current is the unique periodic steady state.  R = 0 reduces to
// resemblance_current.
waveform_trace simulate(const switching_schedule& sched, const circuit_params& circuit,
                        int samples_per_cycle, int periods);

// Closed-form RL segment response: current after holding voltage v for dt
// starting from i0.  Exposed for tests (a schedule can never hold DC).
double rl_step(double i0, double v, double r, double inductance, double dt);

// (1/T) * integral of u*i over exactly the covered periods, trapezoidal.
double real_power(const waveform_trace& trace);

struct harmonic_phasor {
    int order = 0;
    double u_rms = 0.0;
    double i_rms = 0.0;
    double theta = 0.0; // voltage phase minus current phase, radians
};

// Sum over the transmitting orders of U_rms * I_rms * sin(theta), phasors
// from Fourier analysis of the trace.  Optionally returns the per-order
// phasors.
double reactive_power(const waveform_trace& trace, const std::vector<int>& transmitting_orders,
                      const timing_grid& grid, std::vector<harmonic_phasor>* phasors = nullptr);

struct power_metrics {
    double v_dc = 0.0;
    double i_dc = 0.0;
    double p_dc = 0.0;  // V_DC * I_DC
    double p_out = 0.0; // watts
    double q_out = 0.0; // var
    double eta = 0.0;   // P_out / P_DC
    double zeta = 0.0;  // Q_out / P_DC
    std::vector<harmonic_phasor> harmonics;
};

// Pure metric arithmetic over measured/tabulated inputs; the ideal
// simulation has no loss path, so DC-side numbers are never derived from it.
power_metrics efficiency_metrics(double v_dc, double i_dc, double p_out, double q_out);

// Parse a trace CSV (header time_s,voltage_V,current_A) and resample it onto
// a uniform grid by linear interpolation; the period count is inferred from
// the supplied fundamental frequency.
waveform_trace ingest_trace(std::istream& in, double fundamental_hz);

} // namespace shewave

#pragma once

#include <iosfwd>
#include <string>

#include "shewave/circuit.hpp"
#include "shewave/schedule.hpp"
#include "shewave/spectrum.hpp"

namespace shewave {

// All emitters produce deterministic bytes for identical inputs: fixed field
// order, no timestamps, numbers printed with %.12g so doubles round-trip.

// -- switching schedule -----------------------------------------------------
// key/value header followed by one "cycle step" line per edge.
void write_schedule(std::ostream& out, const switching_schedule& sched);
switching_schedule read_schedule(std::istream& in);
void write_schedule_file(const std::string& path, const switching_schedule& sched);
switching_schedule read_schedule_file(const std::string& path);

// -- lookup table -----------------------------------------------------------
// header: clock_frequency_Hz cycles_per_period level_max dead_time_cycles format
// then one line per clock cycle: gate bits (MSB = high-side A) or one signed
// level.
enum class table_format { gates, levels };
void write_lookup_table(std::ostream& out, const lookup_table& table, table_format format);
lookup_table read_lookup_table(std::istream& in);
void write_lookup_table_file(const std::string& path, const lookup_table& table, table_format format);
lookup_table read_lookup_table_file(const std::string& path);

// -- waveform trace CSV -----------------------------------------------------
// header `time_s,voltage_V,current_A`, '.' decimal point, comma delimiter.
void write_trace_csv(std::ostream& out, const waveform_trace& trace);
void write_trace_csv_file(const std::string& path, const waveform_trace& trace);

// -- reports ----------------------------------------------------------------
// spectrum: one row per harmonic (order, frequency, b_p, m_p/p, membership)
// plus a THD footer when selected orders are tagged.
void write_spectrum_report(std::ostream& out, const spectrum_report& report,
                           const std::vector<int>& selected, int thd_max_order);
// metrics: key-value lines (V_DC_V, I_DC_A, P_DC_W, P_out_W, Q_out_var,
// eta_percent, zeta) plus optional per-harmonic phasor rows.
void write_metric_report(std::ostream& out, const power_metrics& metrics, const std::string& note = "");

} // namespace shewave

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "sawqed/channel.hpp"
#include "sawqed/dynamics.hpp"
#include "sawqed/params.hpp"
#include "sawqed/scattering.hpp"

namespace sawqed::dynamics {

// Default round-trip gain of the qubit / IDT B echo loop while the qubit reflects.
inline constexpr double kDefaultLoopGain = 0.45;

struct RouterOptions {
  double probe_rabi_fraction = 0.1;  // CW probe Rabi rate as a fraction of Gamma_01
  double settle = 300e-9;            // CW probe alone before the control pulse, s
  double tail = 900e-9;              // time recorded after the pulse, s
  double dt = 0.5e-9;                // output grid, s
  double loop_gain = kDefaultLoopGain;
  int eigen_stride = 0;
};

struct RouterResult {
  FieldTrace at_qubit;  // fields right at the transmon
  FieldTrace detected;  // reflected seen at IDT A, transmitted seen at IDT B
  double pulse_start = 0.0;
  double pulse_stop = 0.0;
  std::optional<channel::Edge> rise;
  std::optional<channel::Edge> fall;
  double peak_transmitted = 0.0;  // max |transmitted| at IDT B
  Integrity integrity;
};

namespace detail {

inline channel::Signal as_signal(double t0, double dt, const std::vector<cdouble>& v) {
  return channel::Signal{t0, dt, v};
}

inline std::vector<double> power(const std::vector<cdouble>& v) {
  std::vector<double> p(v.size());
  std::transform(v.begin(), v.end(), p.begin(), [](cdouble x) { return std::norm(x); });
  return p;
}

}  // namespace detail

// CW probe at f01 = f_Q with a rectangular control pulse on the 1-2 transition.
// The transmitted field rings in the qubit / IDT B section with a round-trip
// gain proportional to the qubit's instantaneous reflection, then is detected
// through IDT B; the reflected field travels back through IDT A.
inline RouterResult route_pulse(const DeviceConfig& cfg, double control_pulse_length, double control_rabi,
                                const RouterOptions& options = {}) {
  if (!(control_pulse_length > 0.0)) throw ValidationError("control pulse length must be > 0");
  if (!(control_rabi >= 0.0)) throw ValidationError("control rabi must be >= 0");
  if (!(options.loop_gain >= 0.0 && options.loop_gain < 1.0)) throw ValidationError("loop_gain must lie in [0, 1)");
  const scattering::Rates rates = scattering::rates_from(cfg.transmon);
  const double total = options.settle + control_pulse_length + options.tail;
  const double probe = options.probe_rabi_fraction * rates.gamma01;

  DriveSchedule schedule = DriveSchedule::constant(total, options.dt, probe, 0.0);
  schedule.control_rabi.assign(schedule.size(), 0.0);
  RouterResult result;
  result.pulse_start = options.settle;
  result.pulse_stop = options.settle + control_pulse_length;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const double t = schedule.time(i);
    if (t >= result.pulse_start && t < result.pulse_stop) schedule.control_rabi[i] = control_rabi;
  }
  // Start from the probe-only steady state so the pre-pulse baseline is flat.
  const auto start = steady_state(TransmonModel{3, rates}, probe, 0.0);
  Evolution ev = evolve(schedule, rates, 3, start, {options.eigen_stride, false});
  result.integrity = ev.integrity;
  result.at_qubit = ev.fields;

  const FieldTrace& q = ev.fields;
  const double r0 = scattering::max_reflection(rates.gamma01, rates.gamma_phi);
  std::vector<double> gain(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double reflectivity = r0 > 0.0 ? std::abs(q.reflected[i] / q.incident[i]) / r0 : 0.0;
    gain[i] = std::clamp(options.loop_gain * reflectivity, 0.0, 0.999);
  }
  const double tau_a = channel::transit_delay(cfg.geometry.dist_idtA_qubit, cfg.material.sound_velocity);
  const double tau_b = channel::transit_delay(cfg.geometry.dist_idtB_qubit, cfg.material.sound_velocity);
  auto transmitted = channel::gated_multi_transit(detail::as_signal(q.t0, q.dt, q.transmitted), gain,
                                                  channel::default_round_trip(cfg));
  transmitted = channel::apply_idt_filter(channel::delay(transmitted, tau_b), cfg.idt_b);
  const auto reflected =
      channel::apply_idt_filter(channel::delay(detail::as_signal(q.t0, q.dt, q.reflected), tau_a), cfg.idt_a);
  const auto incident = channel::delay(detail::as_signal(q.t0, q.dt, q.incident), tau_b);

  result.detected = FieldTrace{q.t0, q.dt, incident.values, reflected.values, transmitted.values};
  std::vector<double> times(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) times[i] = q.time(i);
  const auto p = detail::power(transmitted.values);
  // Skip the zero-filled start of the delayed trace.
  const double t_first = q.t0 + tau_b + idt::response_length(cfg.idt_b);
  result.rise = channel::measure_edge(times, p, std::max(t_first, result.pulse_start + tau_b - 1e-12),
                                      result.pulse_stop + tau_b);
  result.fall = channel::measure_edge(times, p, result.pulse_stop + tau_b, times.back());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (times[i] >= t_first) result.peak_transmitted = std::max(result.peak_transmitted, std::sqrt(p[i]));
  }
  return result;
}

struct SawPulseOptions {
  double dt = 0.1e-9;
  double lead = 50e-9;   // before the electrical pulse starts, s
  double tail = 700e-9;  // after it ends, s
  int eigen_stride = 0;
};

struct SawPulseResult {
  channel::Signal launched;     // acoustic field leaving IDT A toward the qubit
  channel::Signal at_qubit_in;  // incident at the qubit
  FieldTrace at_qubit;
  channel::Signal arrival_b;    // transmitted field reaching IDT B
  FieldTrace detected;          // incident = launched; reflected after IDT A; transmitted after IDT B
  double arrival_delay = 0.0;   // centroid(arrival_b) - centroid(launched), s
  double transmitted_energy = 0.0;
  double reflected_energy = 0.0;
  Integrity integrity;
};

// A rectangular electrical pulse of peak Rabi rate `peak_rabi` is launched
// through IDT A, scattered by the qubit at `detuning` (f_Q - f01) and detected
// at both transducers.
inline SawPulseResult saw_pulse(const DeviceConfig& cfg, double pulse_length, double peak_rabi, double detuning,
                                const SawPulseOptions& options = {}) {
  if (!(pulse_length > 0.0)) throw ValidationError("pulse length must be > 0");
  if (!(peak_rabi > 0.0)) throw ValidationError("pulse rabi must be > 0");
  const scattering::Rates rates = scattering::rates_from(cfg.transmon);
  const double tau_a = channel::transit_delay(cfg.geometry.dist_idtA_qubit, cfg.material.sound_velocity);
  const double tau_b = channel::transit_delay(cfg.geometry.dist_idtB_qubit, cfg.material.sound_velocity);
  const double total = options.lead + pulse_length + options.tail;
  const auto n = static_cast<std::size_t>(std::llround(total / options.dt)) + 1;

  channel::Signal electrical = channel::make_signal(0.0, options.dt, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = electrical.time(i);
    if (t >= options.lead && t < options.lead + pulse_length) electrical.values[i] = peak_rabi;
  }
  SawPulseResult out;
  // Envelopes are carried in Rabi units until they reach the qubit.
  out.launched = channel::apply_idt_filter(electrical, cfg.idt_a);
  out.at_qubit_in = channel::delay(out.launched, tau_a);

  DriveSchedule schedule;
  schedule.dt = options.dt;
  schedule.probe_rabi = out.at_qubit_in.values;
  schedule.probe_detuning = detuning;
  Evolution ev = evolve(schedule, rates, 2, {options.eigen_stride, false});
  out.integrity = ev.integrity;
  out.at_qubit = ev.fields;
  const FieldTrace& q = ev.fields;

  out.arrival_b = channel::delay(detail::as_signal(q.t0, q.dt, q.transmitted), tau_b);
  const auto detected_t = channel::apply_idt_filter(out.arrival_b, cfg.idt_b);
  const auto detected_r =
      channel::apply_idt_filter(channel::delay(detail::as_signal(q.t0, q.dt, q.reflected), tau_a), cfg.idt_a);
  std::vector<cdouble> launched_field(n);
  for (std::size_t i = 0; i < n; ++i) launched_field[i] = incident_amplitude(out.launched.values[i], rates.gamma01);
  const channel::Signal launched_amp{0.0, options.dt, launched_field};
  out.detected = FieldTrace{0.0, options.dt, launched_field, detected_r.values, detected_t.values};
  out.arrival_delay = channel::centroid(out.arrival_b) - channel::centroid(launched_amp);
  out.transmitted_energy = out.arrival_b.energy();
  out.reflected_energy = detail::as_signal(q.t0, q.dt, q.reflected).energy();
  return out;
}

}  // namespace sawqed::dynamics

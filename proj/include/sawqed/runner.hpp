#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sawqed/channel.hpp"
#include "sawqed/csv.hpp"
#include "sawqed/device.hpp"
#include "sawqed/dynamics.hpp"
#include "sawqed/errors.hpp"
#include "sawqed/fit.hpp"
#include "sawqed/routing.hpp"
#include "sawqed/scattering.hpp"
#include "sawqed/trap.hpp"

#ifndef SAWQED_VERSION
#define SAWQED_VERSION "0.0.0"
#endif

namespace sawqed::cli {

using nlohmann::json;

enum ExitCode : int { kOk = 0, kValidation = 1, kNumerical = 2, kIo = 3 };

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {"steady-state", "flux-power-map", "power-sweep", "autler-townes",
                                                 "route-pulse",  "saw-pulse",      "trap",        "fit",
                                                 "gate-filter",  "derived-summary"};
  return names;
}

struct Scenario {
  std::string name;
  json parameters = json::object();
  std::string output_dir = "out";
};

inline Scenario parse_scenario(const json& j) {
  json_io::expect_object(j, "scenario");
  json_io::reject_unknown(j, {"name", "parameters", "output_dir"}, "scenario");
  Scenario s;
  const json& name = json_io::member(j, "name", "scenario");
  if (!name.is_string()) throw ParseError("scenario.name must be a string");
  s.name = name.get<std::string>();
  bool known = false;
  for (const auto& n : scenario_names()) known = known || n == s.name;
  if (!known) throw ValidationError("unknown scenario '" + s.name + "'");
  if (j.contains("parameters")) {
    s.parameters = j.at("parameters");
    json_io::expect_object(s.parameters, "scenario.parameters");
  }
  if (j.contains("output_dir")) {
    if (!j.at("output_dir").is_string()) throw ParseError("scenario.output_dir must be a string");
    s.output_dir = j.at("output_dir").get<std::string>();
  }
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError("scenario is not valid JSON: " + std::string(e.what()));
  }
  return parse_scenario(j);
}

// Scenario parameter block; every key must be consumed exactly by the scenario.
class Params {
 public:
  Params(const json& j, std::string scenario) : j_(j), scenario_(std::move(scenario)) {}

  bool has(const std::string& key) {
    used_.insert(key);
    return j_.contains(key);
  }

  double number(const std::string& key, double fallback) {
    return has(key) ? checked_number(key) : fallback;
  }
  double number(const std::string& key) {
    if (!has(key)) throw ValidationError(scenario_ + ": missing parameter '" + key + "'");
    return checked_number(key);
  }
  std::optional<double> optional_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return checked_number(key);
  }
  int integer(const std::string& key, int fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ParseError(scenario_ + ": parameter '" + key + "' must be an integer");
    return v.get<int>();
  }
  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ParseError(scenario_ + ": parameter '" + key + "' must be a string");
    return v.get<std::string>();
  }
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_array()) throw ParseError(scenario_ + ": parameter '" + key + "' must be an array");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw ParseError(scenario_ + ": parameter '" + key + "' must hold numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!used_.contains(item.key())) {
        throw ValidationError(scenario_ + ": unknown parameter '" + item.key() + "'");
      }
    }
  }

 private:
  double checked_number(const std::string& key) const {
    const json& v = j_.at(key);
    if (!v.is_number()) throw ParseError(scenario_ + ": parameter '" + key + "' must be a number");
    return v.get<double>();
  }

  const json& j_;
  std::string scenario_;
  std::set<std::string> used_;
};

inline std::vector<double> linspace(double a, double b, int n) {
  if (n < 1) throw ValidationError("grid needs at least one point");
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = n == 1 ? a : a + (b - a) * i / (n - 1.0);
  return v;
}

inline std::vector<double> logspace(double a, double b, int n) {
  if (!(a > 0.0 && b > 0.0)) throw ValidationError("log grid bounds must be > 0");
  if (n < 1) throw ValidationError("grid needs at least one point");
  return fit::log_spaced(a, b, static_cast<std::size_t>(n));
}

struct RunContext {
  DeviceConfig cfg;
  std::filesystem::path out_dir;
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;  // file names relative to out_dir
  std::ostream* log = &std::cout;

  void write(const std::string& name, const csv::Table& table) {
    table.write((out_dir / name).string());
    outputs.push_back(name);
  }
};

namespace scenarios {

inline csv::Table field_table(const dynamics::FieldTrace& f, const std::vector<double>* cavity = nullptr) {
  std::vector<std::string> cols = {"t_s",         "incident_re",    "incident_im",   "reflected_re",
                                   "reflected_im", "transmitted_re", "transmitted_im"};
  std::vector<std::string> units = {"s", "sqrt(1/s)", "sqrt(1/s)", "sqrt(1/s)", "sqrt(1/s)", "sqrt(1/s)", "sqrt(1/s)"};
  if (cavity) {
    cols.push_back("cavity_energy");
    units.push_back("1");
  }
  csv::Table t(cols, units);
  for (std::size_t i = 0; i < f.size(); ++i) {
    std::vector<csv::Cell> row = {f.time(i),
                                  f.incident[i].real(),
                                  f.incident[i].imag(),
                                  f.reflected[i].real(),
                                  f.reflected[i].imag(),
                                  f.transmitted[i].real(),
                                  f.transmitted[i].imag()};
    if (cavity) row.emplace_back((*cavity)[i]);
    t.row(std::move(row));
  }
  return t;
}

inline void steady_state(RunContext& ctx, Params& p) {
  const auto rabi = p.optional_number("rabi_hz");
  const auto power = p.optional_number("power_w");
  const double detuning = p.number("detuning_hz", 0.0);
  p.finish();
  if (rabi.has_value() == power.has_value()) throw ValidationError("steady-state: give exactly one of rabi_hz, power_w");
  const auto drive = rabi ? scattering::DriveSpec::from_rabi(*rabi, detuning)
                          : scattering::DriveSpec::from_power(*power, detuning);
  const auto rates = scattering::rates_from(ctx.cfg.transmon);
  const double omega = drive.rabi(ctx.cfg.rabi_per_sqrt_watt);
  const auto s = scattering::bloch_steady_state(omega, detuning, rates);
  csv::Table t({"rabi_hz", "detuning_hz", "r_re", "r_im", "t_re", "t_im", "R", "T", "excited_population"},
               {"Hz", "Hz", "1", "1", "1", "1", "1", "1", "1"});
  t.meta("scenario", "steady-state");
  t.meta("max_reflection", scattering::max_reflection(rates.gamma01, rates.gamma_phi));
  t.row({omega, detuning, s.r.real(), s.r.imag(), s.t.real(), s.t.imag(), s.reflectance(), s.transmittance(),
         s.excited_population});
  ctx.write("steady_state.csv", t);
}

inline void flux_power_map(RunContext& ctx, Params& p) {
  const auto fluxes =
      linspace(p.number("phi_start", 0.0), p.number("phi_stop", 0.45), p.integer("phi_points", 181));
  const auto powers =
      logspace(p.number("power_start_w", 1e-18), p.number("power_stop_w", 1e-11), p.integer("power_points", 36));
  p.finish();
  const auto map = scattering::flux_power_map(ctx.cfg, fluxes, powers);
  csv::Table t({"phi_over_phi0", "power_w", "T_norm"}, {"phi0", "W", "1"});
  t.meta("scenario", "flux-power-map");
  t.meta("drive_frequency_hz", ctx.cfg.qdt.center_frequency);
  for (const auto& pt : map.points) t.row({pt.phi_over_phi0, pt.power_w, pt.t_norm});
  ctx.write("flux_power_map.csv", t);
  csv::Table lines({"phi_over_phi0", "f01_hz", "f02_half_hz", "f03_third_hz"}, {"phi0", "Hz", "Hz", "Hz"});
  lines.meta("scenario", "flux-power-map transition overlay");
  for (const auto& tr : map.transitions) lines.row({tr.phi_over_phi0, tr.f01, tr.f02_half, tr.f03_third});
  ctx.write("flux_power_map_transitions.csv", lines);
}

inline void power_sweep(RunContext& ctx, Params& p) {
  std::vector<double> powers = p.numbers("powers_w", {});
  const double lo = p.number("power_start_w", 1e-18);
  const double hi = p.number("power_stop_w", 1e-12);
  const int n = p.integer("points", 61);
  p.finish();
  if (powers.empty()) powers = logspace(lo, hi, n);
  const auto rows = scattering::power_sweep(ctx.cfg, powers);
  csv::Table t({"power_w", "R_on", "T_on", "R_off", "T_off", "dR", "dT"}, {"W", "1", "1", "1", "1", "1", "1"});
  t.meta("scenario", "power-sweep");
  t.meta("off_detuning_hz", scattering::off_resonance_detuning(scattering::rates_from(ctx.cfg.transmon)));
  for (const auto& r : rows) t.row({r.power_w, r.r_on, r.t_on, r.r_off, r.t_off, r.d_r, r.d_t});
  ctx.write("power_sweep.csv", t);
}

inline void autler_townes(RunContext& ctx, Params& p) {
  const auto rates = scattering::rates_from(ctx.cfg.transmon);
  const double gamma = rates.decoherence();
  const auto controls = p.numbers("control_rabi_hz", {0.0, 2.0 * gamma, 5.0 * gamma, 10.0 * gamma});
  const auto detunings = linspace(p.number("probe_detuning_start_hz", -150e6),
                                  p.number("probe_detuning_stop_hz", 150e6), p.integer("probe_points", 601));
  const double probe = p.number("probe_rabi_hz", rates.gamma01 / 100.0);
  const double control_detuning = p.number("control_detuning_hz", 0.0);
  p.finish();
  const auto pts = dynamics::autler_townes_spectrum(rates, probe, controls, detunings, control_detuning);
  csv::Table t({"probe_detuning_hz", "control_rabi_hz", "T"}, {"Hz", "Hz", "1"});
  t.meta("scenario", "autler-townes");
  t.meta("probe_rabi_hz", probe);
  for (const auto& pt : pts) t.row({pt.probe_detuning, pt.control_rabi, pt.transmittance});
  ctx.write("autler_townes.csv", t);
}

inline void route_pulse(RunContext& ctx, Params& p) {
  const auto rates = scattering::rates_from(ctx.cfg.transmon);
  dynamics::RouterOptions opt;
  const double length = p.number("control_pulse_length_s", 400e-9);
  const double control = p.number("control_rabi_hz", 10.0 * rates.decoherence());
  opt.loop_gain = p.number("loop_gain", dynamics::kDefaultLoopGain);
  opt.probe_rabi_fraction = p.number("probe_rabi_fraction", opt.probe_rabi_fraction);
  opt.dt = p.number("dt_s", opt.dt);
  p.finish();
  const auto r = dynamics::route_pulse(ctx.cfg, length, control, opt);
  auto t = field_table(r.detected);
  t.meta("scenario", "route-pulse");
  t.meta("control_pulse_length_s", length);
  t.meta("control_rabi_hz", control);
  t.meta("loop_gain", opt.loop_gain);
  ctx.write("route_pulse.csv", t);
  csv::Table s({"quantity", "value"}, {"-", "s"});
  s.meta("scenario", "route-pulse timing (10-90 % of |transmitted|^2)");
  if (!r.rise || !r.fall) throw NumericalError("route-pulse: could not locate the switching edges");
  s.row({std::string("rise_time"), r.rise->duration});
  s.row({std::string("fall_time"), r.fall->duration});
  ctx.write("route_pulse_timing.csv", s);
  *ctx.log << "rise_time_s=" << csv::format(r.rise->duration) << "\nfall_time_s=" << csv::format(r.fall->duration)
           << '\n';
}

inline void saw_pulse(RunContext& ctx, Params& p) {
  const auto rates = scattering::rates_from(ctx.cfg.transmon);
  const double length = p.number("pulse_length_s", 100e-9);
  const auto rabi = p.optional_number("rabi_hz");
  const auto power = p.optional_number("power_w");
  const double detuning = p.number("detuning_hz", 0.0);
  dynamics::SawPulseOptions opt;
  opt.dt = p.number("dt_s", opt.dt);
  p.finish();
  if (rabi && power) throw ValidationError("saw-pulse: give at most one of rabi_hz, power_w");
  const double peak = rabi ? *rabi : power ? ctx.cfg.rabi_per_sqrt_watt * std::sqrt(*power) : rates.gamma01 / 10.0;
  const auto r = dynamics::saw_pulse(ctx.cfg, length, peak, detuning, opt);
  auto t = field_table(r.detected);
  t.meta("scenario", "saw-pulse");
  t.meta("pulse_length_s", length);
  t.meta("peak_rabi_hz", peak);
  t.meta("detuning_hz", detuning);
  t.meta("arrival_delay_s", r.arrival_delay);
  ctx.write("saw_pulse.csv", t);
}

inline void trap(RunContext& ctx, Params& p) {
  scattering::Rates rates = scattering::rates_from(ctx.cfg.transmon);
  rates.gamma_phi = p.number("dephasing_rate_hz", rates.gamma_phi);
  trap::CatchReleasePlan plan;
  plan.sound_velocity = ctx.cfg.material.sound_velocity;
  plan.carrier_frequency = ctx.cfg.qdt.center_frequency;
  plan.separation = p.number("separation_m", plan.separation);
  plan.pulse_sigma = p.number("pulse_sigma_s", plan.pulse_sigma);
  plan.pulse_center = p.number("pulse_center_s", plan.pulse_center);
  plan.peak_rabi_fraction = p.number("peak_rabi_fraction", plan.peak_rabi_fraction);
  plan.far_detuning = p.number("far_detuning_hz", plan.far_detuning);
  plan.ramp = p.number("ramp_s", plan.ramp);
  plan.close_time = p.number("close_time_s", 0.0);
  plan.release_time = p.number("release_time_s", 0.0);
  plan.duration = p.number("duration_s", 0.0);
  plan.dt = p.number("dt_s", plan.dt);
  plan.release_direction = trap::parse_direction(p.text("release_direction", "left"));
  p.finish();
  const auto schedule = trap::catch_release_schedule(plan, rates);
  const auto r = trap::simulate_trap(schedule, rates);
  dynamics::FieldTrace f{r.left_out.t0, r.left_out.dt, schedule.input_pulse.values, r.left_out.values,
                         r.right_out.values};
  auto t = field_table(f, &r.cavity_energy);
  t.meta("scenario", "trap");
  t.meta("columns", "incident = input from the left, reflected = left output, transmitted = right output");
  t.meta("release_direction", plan.release_direction == trap::Direction::left ? "left" : "right");
  t.meta("input_energy", r.input_energy);
  t.meta("detuning_jumps", r.has_jumps ? "yes" : "no");
  ctx.write("trap.csv", t);
}

inline fit::SweepData read_sweep(const std::string& path) {
  const auto table = csv::read_numeric(path);
  const auto ip = table.column("power_w");
  const auto ir = table.column("R");
  const auto it = table.column("T");
  const auto iw = table.column("weight");
  fit::SweepData data;
  for (const auto& row : table.rows) data.push_back({row[ip], row[ir], row[it], row[iw]});
  return data;
}

inline void fit_scenario(RunContext& ctx, Params& p) {
  const auto rates = scattering::rates_from(ctx.cfg.transmon);
  const std::string data_csv = p.text("data_csv", "");
  const double gamma01 = p.number("gamma01_hz", rates.gamma01);
  const double k_true = p.number("k_true", ctx.cfg.rabi_per_sqrt_watt);
  const double gphi_true = p.number("gamma_phi_true_hz", rates.gamma_phi);
  const double noise = p.number("noise_sigma", 0.01);
  const int points = p.integer("points", 30);
  const double decades = p.number("decades", 4.0);
  const int repetitions = p.integer("repetitions", 1);
  if (p.has("seed")) ctx.seed = static_cast<std::uint64_t>(p.integer("seed", 0));
  p.finish();
  if (repetitions < 1) throw ValidationError("fit: repetitions must be >= 1");

  csv::Table results({"seed", "k", "gamma_phi_hz", "residual_norm", "iterations"}, {"1", "Hz/sqrt(W)", "Hz", "1", "1"});
  results.meta("scenario", "fit");
  results.meta("gamma01_hz", gamma01);
  auto record = [&](std::uint64_t seed, const fit::FitResult& r) {
    results.row({static_cast<double>(seed), r.k, r.gamma_phi, r.residual_norm, static_cast<double>(r.iterations)});
    *ctx.log << "seed=" << seed << "\nk=" << csv::format(r.k) << "\ngamma_phi=" << csv::format(r.gamma_phi)
             << "\nresidual_norm=" << csv::format(r.residual_norm) << "\niterations=" << r.iterations << '\n';
    for (const auto& w : r.warnings) *ctx.log << "warning=" << w << '\n';
  };

  if (!data_csv.empty()) {
    results.meta("data_csv", data_csv);
    record(0, fit::fit_power_sweep(read_sweep(data_csv), gamma01));
  } else {
    const double decoherence = 0.5 * gamma01 + gphi_true;
    const double p_half = gamma01 * decoherence / (k_true * k_true);
    const auto powers = fit::log_spaced(p_half * std::pow(10.0, -decades / 2), p_half * std::pow(10.0, decades / 2),
                                        static_cast<std::size_t>(points));
    results.meta("k_true", k_true);
    results.meta("gamma_phi_true_hz", gphi_true);
    results.meta("noise_sigma", noise);
    for (int i = 0; i < repetitions; ++i) {
      const std::uint64_t seed = ctx.seed + static_cast<std::uint64_t>(i);
      const auto data = fit::synthesize_sweep(powers, k_true, gphi_true, gamma01, noise, seed);
      if (i == 0) {
        csv::Table d({"power_w", "R", "T", "weight"}, {"W", "1", "1", "1"});
        d.meta("scenario", "fit synthetic data");
        d.meta("seed", static_cast<double>(seed));
        for (const auto& row : data) d.row({row.power_w, row.r_meas, row.t_meas, row.weight});
        ctx.write("fit_data.csv", d);
      }
      record(seed, fit::fit_power_sweep(data, gamma01));
    }
  }
  ctx.write("fit_result.csv", results);
}

inline void gate_filter(RunContext& ctx, Params& p) {
  const std::string spectrum_csv = p.text("spectrum_csv", "");
  const double tau_main = channel::transit_delay(ctx.cfg.geometry.dist_idtA_qubit + ctx.cfg.geometry.dist_idtB_qubit,
                                                 ctx.cfg.material.sound_velocity);
  const double f_center = ctx.cfg.qdt.center_frequency;
  const double f_start = p.number("f_start_hz", f_center - 50e6);
  const double f_stop = p.number("f_stop_hz", f_center + 50e6);
  const int points = p.integer("points", 401);
  const double main_delay = p.number("main_delay_s", tau_main);
  const double echo_delay = p.number("echo_delay_s", 2.0 * tau_main);
  const double echo_amplitude = p.number("echo_amplitude", 0.5);
  const double crosstalk = p.number("crosstalk", 0.0);
  const double gate_start = p.number("gate_start_s", 100e-9);
  const double gate_stop = p.number("gate_stop_s", 200e-9);
  const double taper = p.number("taper", 0.1);
  p.finish();

  channel::Spectrum spec;
  if (!spectrum_csv.empty()) {
    const auto table = csv::read_numeric(spectrum_csv);
    const auto ifr = table.column("f_hz");
    const auto ire = table.column("re");
    const auto iim = table.column("im");
    if (table.rows.size() < 2) throw ValidationError("gate-filter: spectrum needs at least two rows");
    spec.f0 = table.rows.front()[ifr];
    spec.df = table.rows[1][ifr] - spec.f0;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      const double expect = spec.f0 + spec.df * static_cast<double>(i);
      if (std::abs(table.rows[i][ifr] - expect) > 1e-6 * std::abs(spec.df)) {
        throw ValidationError("gate-filter: spectrum frequencies must be uniformly spaced");
      }
      spec.values.emplace_back(table.rows[i][ire], table.rows[i][iim]);
    }
  } else {
    if (points < 2) throw ValidationError("gate-filter: points must be >= 2");
    spec.f0 = f_start;
    spec.df = (f_stop - f_start) / (points - 1);
    for (int i = 0; i < points; ++i) {
      const double f = spec.frequency(static_cast<std::size_t>(i));
      spec.values.push_back(std::polar(1.0, -kTwoPi * f * main_delay) +
                            echo_amplitude * std::polar(1.0, -kTwoPi * f * echo_delay) + crosstalk);
    }
  }
  const auto gated = channel::time_gate(spec, gate_start, gate_stop, taper);
  csv::Table t({"f_hz", "raw_re", "raw_im", "gated_re", "gated_im"}, {"Hz", "1", "1", "1", "1"});
  t.meta("scenario", "gate-filter");
  t.meta("gate_start_s", gate_start);
  t.meta("gate_stop_s", gate_stop);
  t.meta("taper", taper);
  for (std::size_t i = 0; i < spec.size(); ++i) {
    t.row({spec.frequency(i), spec.values[i].real(), spec.values[i].imag(), gated.values[i].real(),
           gated.values[i].imag()});
  }
  ctx.write("gate_filter.csv", t);
}

inline void derived(RunContext& ctx, Params& p) {
  p.finish();
  const auto d = derived_summary(ctx.cfg);
  csv::Table t({"quantity", "value", "unit"}, {"-", "-", "-"});
  t.meta("scenario", "derived-summary");
  t.row({std::string("wavelength"), d.wavelength, std::string("m")});
  t.row({std::string("idt_bandwidth"), d.idt_bandwidth, std::string("Hz")});
  t.row({std::string("qdt_bandwidth"), d.qdt_bandwidth, std::string("Hz")});
  t.row({std::string("design_acoustic_coupling"), d.design_coupling, std::string("Hz")});
  t.row({std::string("max_f01"), d.max_f01, std::string("Hz")});
  t.row({std::string("anharmonicity"), d.anharmonicity, std::string("Hz")});
  t.row({std::string("transit_idtA_qubit"), d.transit_a, std::string("s")});
  t.row({std::string("transit_qubit_idtB"), d.transit_b, std::string("s")});
  ctx.write("derived_summary.csv", t);
}

}  // namespace scenarios

inline void run_scenario(RunContext& ctx, const Scenario& s) {
  static const std::map<std::string, std::function<void(RunContext&, Params&)>> table = {
      {"steady-state", scenarios::steady_state},   {"flux-power-map", scenarios::flux_power_map},
      {"power-sweep", scenarios::power_sweep},     {"autler-townes", scenarios::autler_townes},
      {"route-pulse", scenarios::route_pulse},     {"saw-pulse", scenarios::saw_pulse},
      {"trap", scenarios::trap},                   {"fit", scenarios::fit_scenario},
      {"gate-filter", scenarios::gate_filter},     {"derived-summary", scenarios::derived}};
  Params params(s.parameters, s.name);
  table.at(s.name)(ctx, params);
}

// 64-bit FNV-1a, printed as 16 hex digits.
inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline void write_atomically(const std::filesystem::path& path, const std::string& text) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write '" + tmp + "'");
    f << text;
    if (!f) throw IoError("failed while writing '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move manifest into place: " + ec.message());
}

struct RunRequest {
  std::string config_path;
  std::string scenario_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
};

// Runs one scenario and writes its CSVs followed by manifest.json. Returns the
// process exit code; diagnostics go to `err`.
inline int run(const RunRequest& req, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  try {
    const auto start = std::chrono::steady_clock::now();
    const std::string config_text = read_text_file(req.config_path);
    RunContext ctx;
    ctx.cfg = parse_config_text(config_text);
    ctx.log = &log;
    const Scenario scenario = load_scenario(req.scenario_path);
    ctx.out_dir = req.out_dir ? *req.out_dir : scenario.output_dir;
    if (req.seed) ctx.seed = *req.seed;
    std::error_code ec;
    std::filesystem::create_directories(ctx.out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + ctx.out_dir.string() + "': " + ec.message());
    if (req.seed && scenario.parameters.contains("seed")) {
      // Command-line seed wins over the scenario file.
      Scenario overridden = scenario;
      overridden.parameters.erase("seed");
      run_scenario(ctx, overridden);
    } else {
      run_scenario(ctx, scenario);
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json manifest = {{"config_hash", "fnv1a64:" + fnv1a_hex(config_text)},
                     {"config_path", req.config_path},
                     {"scenario",
                      {{"name", scenario.name}, {"parameters", scenario.parameters}, {"output_dir", scenario.output_dir}}},
                     {"seed", ctx.seed},
                     {"tool_version", SAWQED_VERSION},
                     {"wall_time_s", wall},
                     {"outputs", ctx.outputs}};
    write_atomically(ctx.out_dir / "manifest.json", manifest.dump(2) + "\n");
    return kOk;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  }
}

inline int validate_config(const std::string& path, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  try {
    const auto cfg = load_config(path);
    const auto d = derived_summary(cfg);
    log << "ok: " << path << "\nmax_f01_hz=" << csv::format(d.max_f01)
        << "\nwavelength_m=" << csv::format(d.wavelength) << '\n';
    return kOk;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  }
}

}  // namespace sawqed::cli

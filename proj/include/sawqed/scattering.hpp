#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "sawqed/errors.hpp"
#include "sawqed/params.hpp"
#include "sawqed/transmon.hpp"

namespace sawqed::scattering {

using cdouble = std::complex<double>;

// Transmon 0-1 rates in Hz.
struct Rates {
  double gamma01 = 0.0;    // relaxation |1> -> |0>, all of it into the acoustic channel
  double gamma_phi = 0.0;  // pure dephasing

  // Decoherence of the 0-1 coherence, Gamma_01 / 2 + Gamma_phi.
  double decoherence() const { return 0.5 * gamma01 + gamma_phi; }
};

inline Rates rates_from(const TransmonParams& t) { return Rates{t.acoustic_coupling, t.dephasing_rate}; }

// A coherent drive given either directly as a Rabi rate or as a power that
// converts through Omega_p = k sqrt(P).
class DriveSpec {
 public:
  static DriveSpec from_rabi(double rabi_hz, double detuning_hz = 0.0) {
    if (!(rabi_hz >= 0.0)) throw ValidationError("drive rabi must be >= 0");
    DriveSpec d;
    d.rabi_ = rabi_hz;
    d.detuning_ = detuning_hz;
    return d;
  }
  static DriveSpec from_power(double power_w, double detuning_hz = 0.0) {
    if (!(power_w >= 0.0)) throw ValidationError("drive power must be >= 0");
    DriveSpec d;
    d.power_ = power_w;
    d.detuning_ = detuning_hz;
    return d;
  }

  double detuning() const { return detuning_; }
  bool given_as_power() const { return power_.has_value(); }

  // k is only consulted when the drive was specified by power.
  double rabi(double rabi_per_sqrt_watt = 0.0) const {
    if (rabi_) return *rabi_;
    if (!(rabi_per_sqrt_watt > 0.0)) throw ValidationError("power drive needs k > 0");
    return rabi_per_sqrt_watt * std::sqrt(*power_);
  }

 private:
  DriveSpec() = default;
  std::optional<double> rabi_;
  std::optional<double> power_;
  double detuning_ = 0.0;
};

struct BlochSteadyState {
  cdouble r;
  cdouble t;
  double excited_population = 0.0;

  double reflectance() const { return std::norm(r); }
  double transmittance() const { return std::norm(t); }
};

// r0 = 1 / (1 + 2 Gamma_phi / Gamma_01).
inline double max_reflection(double gamma01, double gamma_phi) {
  if (std::isinf(gamma_phi)) return 0.0;
  return 1.0 / (1.0 + 2.0 * gamma_phi / gamma01);
}

// Resonant reflection, r = -r0 / (1 + Omega^2 / (Gamma_01 gamma_01)).
inline double reflection_on_resonance(double rabi, const Rates& rates) {
  const double r0 = max_reflection(rates.gamma01, rates.gamma_phi);
  return -r0 / (1.0 + rabi * rabi / (rates.gamma01 * rates.decoherence()));
}

// Driven two-level steady state. With delta = f_drive - f01 and every rate in
// the same (ordinary) units,
//   r = -(Gamma/2) (gamma + i delta) / (gamma^2 + delta^2 + Omega^2 gamma / Gamma),
// which is exactly the resonant formula at delta = 0.
inline BlochSteadyState bloch_steady_state(double rabi, double detuning, const Rates& rates) {
  BlochSteadyState s;
  const double big_gamma = rates.gamma01;
  const double gamma = rates.decoherence();
  if (big_gamma <= 0.0) {
    s.r = 0.0;
    s.t = 1.0;
    s.excited_population = rabi > 0.0 ? 0.5 : 0.0;
    return s;
  }
  const double lorentz = gamma * gamma + detuning * detuning;
  const double denom = lorentz + rabi * rabi * gamma / big_gamma;
  s.r = -0.5 * big_gamma * cdouble(gamma, detuning) / denom;
  s.t = 1.0 + s.r;
  const double a = rabi * rabi * gamma / (2.0 * big_gamma * lorentz);
  s.excited_population = std::isinf(a) ? 0.5 : a / (1.0 + 2.0 * a);
  return s;
}

inline BlochSteadyState bloch_steady_state(const DriveSpec& drive, const Rates& rates,
                                           double rabi_per_sqrt_watt = 0.0) {
  return bloch_steady_state(drive.rabi(rabi_per_sqrt_watt), drive.detuning(), rates);
}

// Detuning used as the "off" reference in sweeps: 50 linewidths.
inline double off_resonance_detuning(const Rates& rates) { return 50.0 * rates.decoherence(); }

struct PowerSweepRow {
  double power_w = 0.0;
  double r_on = 0.0;
  double t_on = 0.0;
  double r_off = 0.0;
  double t_off = 0.0;
  double d_r = 0.0;  // R_on - R_off
  double d_t = 0.0;  // T_off - T_on
};

inline std::vector<PowerSweepRow> power_sweep(const DeviceConfig& cfg, const std::vector<double>& powers) {
  const Rates rates = rates_from(cfg.transmon);
  const double off = off_resonance_detuning(rates);
  std::vector<PowerSweepRow> rows;
  rows.reserve(powers.size());
  for (double p : powers) {
    if (!(p > 0.0)) throw ValidationError("power_sweep powers must be positive");
    const double rabi = cfg.rabi_per_sqrt_watt * std::sqrt(p);
    const auto on_state = bloch_steady_state(rabi, 0.0, rates);
    const auto off_state = bloch_steady_state(rabi, off, rates);
    PowerSweepRow row;
    row.power_w = p;
    row.r_on = on_state.reflectance();
    row.t_on = on_state.transmittance();
    row.r_off = off_state.reflectance();
    row.t_off = off_state.transmittance();
    row.d_r = row.r_on - row.r_off;
    row.d_t = row.t_off - row.t_on;
    rows.push_back(row);
  }
  return rows;
}

struct FluxPowerPoint {
  double phi_over_phi0 = 0.0;
  double power_w = 0.0;
  double t_raw = 0.0;   // includes both transducers' insertion loss
  double t_norm = 0.0;  // relative to the off-resonant transmission at the same power
};

struct TransitionOverlay {
  double phi_over_phi0 = 0.0;
  double f01 = 0.0;
  double f02_half = 0.0;
  double f03_third = 0.0;
};

struct FluxPowerMap {
  std::vector<FluxPowerPoint> points;  // flux-major, power-minor
  std::vector<TransitionOverlay> transitions;
};

inline FluxPowerMap flux_power_map(const DeviceConfig& cfg, const std::vector<double>& fluxes,
                                   const std::vector<double>& powers) {
  if (fluxes.empty() || powers.empty()) throw ValidationError("flux_power_map grids must be non-empty");
  const Rates rates = rates_from(cfg.transmon);
  const double off = off_resonance_detuning(rates);
  const double drive_f = cfg.qdt.center_frequency;
  const double insertion = std::pow(cfg.idt_a.insertion_loss * cfg.idt_b.insertion_loss, 2);
  FluxPowerMap map;
  map.points.reserve(fluxes.size() * powers.size());
  for (double phi : fluxes) {
    const auto levels = transmon::level_structure(transmon::FluxBias{phi}, cfg.transmon);
    map.transitions.push_back({phi, levels.f01, levels.f02_half, levels.f03_third});
    const double detuning = drive_f - levels.f01;
    for (double p : powers) {
      if (!(p >= 0.0)) throw ValidationError("flux_power_map powers must be >= 0");
      const double rabi = cfg.rabi_per_sqrt_watt * std::sqrt(p);
      const double t = bloch_steady_state(rabi, detuning, rates).transmittance();
      const double t_off = bloch_steady_state(rabi, off, rates).transmittance();
      map.points.push_back({phi, p, insertion * t, t / t_off});
    }
  }
  return map;
}

}  // namespace sawqed::scattering

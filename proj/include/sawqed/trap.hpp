#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "sawqed/channel.hpp"
#include "sawqed/errors.hpp"
#include "sawqed/scattering.hpp"
#include "sawqed/units.hpp"

namespace sawqed::trap {

using cdouble = std::complex<double>;

enum class Direction { left, right };

inline Direction parse_direction(const std::string& s) {
  if (s == "left") return Direction::left;
  if (s == "right") return Direction::right;
  throw ValidationError("release direction must be 'left' or 'right'");
}

// Two transmons on a delay line. Detunings (f_carrier - f_j, Hz) are sampled on
// the input pulse grid; the pulse is in sqrt(phonons/s) and enters from the left.
struct TrapSchedule {
  std::vector<double> transmon1_detuning;
  std::vector<double> transmon2_detuning;
  double separation = 0.0;      // m
  double sound_velocity = 0.0;  // m/s
  double carrier_phase = 0.0;   // phase picked up by the carrier over one transit, rad
  channel::Signal input_pulse;
  Direction release_direction = Direction::left;
};

struct TrapResult {
  channel::Signal left_out;
  channel::Signal right_out;
  std::vector<double> cavity_energy;  // field between the transmons over input energy
  std::vector<double> excitation;     // |beta_1|^2 + |beta_2|^2 over input energy
  double input_energy = 0.0;
  double transit = 0.0;  // actual (sample-rounded) transit time, s
  bool has_jumps = false;  // a detuning changed by more than kJumpThreshold linewidths in one sample
};

// Largest detuning step per sample regarded as a ramp rather than a jump, in linewidths.
inline constexpr double kJumpThreshold = 10.0;

namespace detail {

// Exact update of d beta/dt = -lambda beta + u(t) over one step with u linear.
inline cdouble exp_step(cdouble beta, cdouble lambda, double h, cdouble u0, cdouble u1) {
  const cdouble z = lambda * h;
  const cdouble e = std::exp(-z);
  cdouble w0;
  cdouble w1;
  if (std::abs(z) < 1e-4) {
    // Series in z: w1 = h (1/2 - z/6 + z^2/24), w0 + w1 = h (1 - z/2 + z^2/6).
    const cdouble sum = h * (1.0 - z / 2.0 + z * z / 6.0);
    w1 = h * (0.5 - z / 6.0 + z * z / 24.0);
    w0 = sum - w1;
  } else {
    const cdouble sum = (1.0 - e) / lambda;
    w1 = sum - (1.0 - e - z * e) / (lambda * z);
    w0 = sum - w1;
  }
  return e * beta + w0 * u0 + w1 * u1;
}

}  // namespace detail

inline void validate(const TrapSchedule& s) {
  if (!(s.separation > 0.0)) throw ValidationError("trap separation must be > 0");
  if (!(s.sound_velocity > 0.0)) throw ValidationError("trap sound velocity must be > 0");
  const std::size_t n = s.input_pulse.size();
  if (n < 2 || !(s.input_pulse.dt > 0.0)) throw ValidationError("trap input pulse needs a grid");
  if (s.transmon1_detuning.size() != n || s.transmon2_detuning.size() != n) {
    throw ValidationError("detuning schedules must be defined on the input grid");
  }
}

// Peak Rabi rate (Hz) the pulse would drive on a transmon with relaxation Gamma_01.
inline double peak_rabi(const channel::Signal& pulse, double gamma01) {
  double peak = 0.0;
  for (const auto& v : pulse.values) peak = std::max(peak, std::abs(v));
  return std::sqrt(2.0 * angular(gamma01)) * peak / kTwoPi;
}

// Both transmons are linear dipoles (weak-excitation limit of the two-level
// atom). Each radiates half its decay into either direction; fields between
// them are delayed by separation / v0.
inline TrapResult simulate_trap(const TrapSchedule& schedule, const scattering::Rates& rates) {
  validate(schedule);
  if (!(rates.gamma01 > 0.0)) throw ValidationError("trap needs Gamma_01 > 0");
  if (peak_rabi(schedule.input_pulse, rates.gamma01) > rates.gamma01 / 10.0 * (1.0 + 1e-12)) {
    throw ValidationError("trap input pulse violates the weak-field condition (peak Rabi <= Gamma_01 / 10)");
  }
  const auto& in = schedule.input_pulse;
  const std::size_t n = in.size();
  const double h = in.dt;
  const double tau = schedule.separation / schedule.sound_velocity;
  const std::size_t m = std::max<std::size_t>(1, channel::delay_samples(tau, h));
  const cdouble hop = std::polar(1.0, schedule.carrier_phase);
  const double big_gamma = angular(rates.gamma01);
  const double gamma = angular(rates.decoherence());
  const cdouble coupling(0.0, -std::sqrt(0.5 * big_gamma));  // emission amplitude into each direction

  TrapResult res;
  res.transit = static_cast<double>(m) * h;
  res.input_energy = in.energy();
  if (!(res.input_energy > 0.0)) throw ValidationError("trap input pulse carries no energy");
  res.left_out = channel::Signal{in.t0, h, std::vector<cdouble>(n, 0.0)};
  res.right_out = channel::Signal{in.t0, h, std::vector<cdouble>(n, 0.0)};
  res.cavity_energy.assign(n, 0.0);
  res.excitation.assign(n, 0.0);

  // Right-going field leaving transmon 1, left-going field leaving transmon 2.
  std::vector<cdouble> right_mid(n, 0.0);
  std::vector<cdouble> left_mid(n, 0.0);
  auto into2 = [&](std::size_t i) { return i >= m ? hop * right_mid[i - m] : cdouble(0.0); };
  auto into1_from_right = [&](std::size_t i) { return i >= m ? hop * left_mid[i - m] : cdouble(0.0); };

  for (std::size_t i = 1; i < n; ++i) {
    const double jump = std::max(std::abs(schedule.transmon1_detuning[i] - schedule.transmon1_detuning[i - 1]),
                                 std::abs(schedule.transmon2_detuning[i] - schedule.transmon2_detuning[i - 1]));
    if (jump > kJumpThreshold * rates.decoherence() && gamma > 0.0) res.has_jumps = true;
  }

  cdouble beta1 = 0.0;
  cdouble beta2 = 0.0;
  auto emit = [&](std::size_t i) {
    right_mid[i] = in.values[i] + coupling * beta1;
    res.left_out.values[i] = into1_from_right(i) + coupling * beta1;
    left_mid[i] = coupling * beta2;
    res.right_out.values[i] = into2(i) + coupling * beta2;
  };
  auto drive1 = [&](std::size_t i) { return coupling * (in.values[i] + into1_from_right(i)); };
  auto drive2 = [&](std::size_t i) { return coupling * into2(i); };

  auto bookkeeping = [&](std::size_t i) {
    double stored = 0.0;
    const std::size_t lo = i + 1 >= m ? i + 1 - m : 0;
    for (std::size_t k = lo; k <= i; ++k) stored += std::norm(right_mid[k]) + std::norm(left_mid[k]);
    res.cavity_energy[i] = stored * h / res.input_energy;
    res.excitation[i] = (std::norm(beta1) + std::norm(beta2)) / res.input_energy;
  };

  emit(0);
  bookkeeping(0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double d1 = 0.5 * (schedule.transmon1_detuning[i] + schedule.transmon1_detuning[i + 1]);
    const double d2 = 0.5 * (schedule.transmon2_detuning[i] + schedule.transmon2_detuning[i + 1]);
    const cdouble lambda1(gamma, -angular(d1));
    const cdouble lambda2(gamma, -angular(d2));
    // Inputs at i + 1 only involve fields emitted at least one transit earlier.
    beta1 = detail::exp_step(beta1, lambda1, h, drive1(i), drive1(i + 1));
    beta2 = detail::exp_step(beta2, lambda2, h, drive2(i), drive2(i + 1));
    emit(i + 1);
    bookkeeping(i + 1);
  }
  return res;
}

// Piecewise-linear detuning profile through (time, detuning) knots; constant
// outside the knot range.
inline std::vector<double> piecewise_linear(const channel::Signal& grid,
                                            const std::vector<std::pair<double, double>>& knots) {
  if (knots.empty()) throw ValidationError("detuning profile needs at least one knot");
  for (std::size_t k = 1; k < knots.size(); ++k) {
    if (knots[k].first < knots[k - 1].first) throw ValidationError("detuning knots must be time-ordered");
  }
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid.time(i);
    if (t <= knots.front().first) {
      out[i] = knots.front().second;
    } else if (t >= knots.back().first) {
      out[i] = knots.back().second;
    } else {
      auto it = std::upper_bound(knots.begin(), knots.end(), t,
                                 [](double v, const std::pair<double, double>& k) { return v < k.first; });
      const auto& b = *it;
      const auto& a = *(it - 1);
      const double span = b.first - a.first;
      out[i] = span > 0.0 ? a.second + (b.second - a.second) * (t - a.first) / span : b.second;
    }
  }
  return out;
}

// Gaussian envelope exp(-(t - center)^2 / (2 sigma^2)) scaled to a peak Rabi
// rate, expressed in sqrt(phonons/s).
inline channel::Signal gaussian_pulse(double duration, double dt, double center, double sigma, double peak_rabi_hz,
                                      double gamma01) {
  auto sig = channel::make_signal(0.0, dt, static_cast<std::size_t>(std::llround(duration / dt)) + 1);
  const double amp = kTwoPi * peak_rabi_hz / std::sqrt(2.0 * angular(gamma01));
  for (std::size_t i = 0; i < sig.size(); ++i) {
    const double x = (sig.time(i) - center) / sigma;
    sig.values[i] = amp * std::exp(-0.5 * x * x);
  }
  return sig;
}

// Timing of a catch-and-release run. Transmon 2 starts resonant and transmon 1
// detuned; transmon 1 is ramped onto resonance once the pulse has passed it,
// then the transmon on the release side is ramped away.
struct CatchReleasePlan {
  double separation = 400e-6;
  double sound_velocity = 2864.0;
  double carrier_frequency = 2.2641e9;
  double dt = 0.2e-9;
  double pulse_sigma = 40e-9;
  double pulse_center = 200e-9;
  double peak_rabi_fraction = 0.1;  // of Gamma_01
  double far_detuning = 1e9;
  double ramp = 10e-9;
  double close_time = 0.0;    // transmon 1 reaches resonance; 0 picks pulse_center + 3 sigma + ramp
  double release_time = 0.0;  // release starts; 0 picks close_time + 2 round trips
  double duration = 0.0;      // 0 picks release_time + 20 / Gamma_01 + 2 transits
  Direction release_direction = Direction::left;
  bool catch_enabled = true;
};

inline TrapSchedule catch_release_schedule(const CatchReleasePlan& plan, const scattering::Rates& rates) {
  const double tau = plan.separation / plan.sound_velocity;
  const double close = plan.close_time > 0.0 ? plan.close_time : plan.pulse_center + 3.0 * plan.pulse_sigma + plan.ramp;
  const double release = plan.release_time > 0.0 ? plan.release_time : close + 4.0 * tau;
  const double duration =
      plan.duration > 0.0 ? plan.duration : release + plan.ramp + 20.0 / angular(rates.gamma01) + 3.0 * tau;
  TrapSchedule s;
  s.separation = plan.separation;
  s.sound_velocity = plan.sound_velocity;
  s.carrier_phase = std::fmod(kTwoPi * plan.carrier_frequency * tau, kTwoPi);
  s.release_direction = plan.release_direction;
  s.input_pulse = gaussian_pulse(duration, plan.dt, plan.pulse_center, plan.pulse_sigma,
                                 plan.peak_rabi_fraction * rates.gamma01, rates.gamma01);
  const double far = plan.far_detuning;
  if (!plan.catch_enabled) {
    s.transmon1_detuning.assign(s.input_pulse.size(), far);
    s.transmon2_detuning.assign(s.input_pulse.size(), 0.0);
    return s;
  }
  s.transmon1_detuning = piecewise_linear(s.input_pulse, {{close - plan.ramp, far}, {close, 0.0}});
  s.transmon2_detuning.assign(s.input_pulse.size(), 0.0);
  auto& released = plan.release_direction == Direction::left ? s.transmon1_detuning : s.transmon2_detuning;
  const auto ramp_away = piecewise_linear(s.input_pulse, {{release, 0.0}, {release + plan.ramp, far}});
  for (std::size_t i = 0; i < released.size(); ++i) {
    if (s.input_pulse.time(i) >= release) released[i] = ramp_away[i];
  }
  return s;
}

inline double energy_between(const channel::Signal& s, double from, double to) {
  double e = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double t = s.time(i);
    if (t >= from && t < to) e += std::norm(s.values[i]);
  }
  return e * s.dt;
}

}  // namespace sawqed::trap

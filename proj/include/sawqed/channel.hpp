#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "sawqed/errors.hpp"
#include "sawqed/idt.hpp"
#include "sawqed/params.hpp"

namespace sawqed::channel {

using cdouble = std::complex<double>;

// Complex envelope about the transducer centre frequency, sampled uniformly.
struct Signal {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<cdouble> values;

  std::size_t size() const { return values.size(); }
  double time(std::size_t i) const { return t0 + dt * static_cast<double>(i); }
  double duration() const { return dt * static_cast<double>(values.size()); }

  // Sum |v|^2 dt.
  double energy() const {
    double e = 0.0;
    for (const auto& v : values) e += std::norm(v);
    return e * dt;
  }
};

// Uniformly sampled frequency-domain data, e.g. an S21 measurement.
struct Spectrum {
  double f0 = 0.0;
  double df = 0.0;
  std::vector<cdouble> values;

  std::size_t size() const { return values.size(); }
  double frequency(std::size_t i) const { return f0 + df * static_cast<double>(i); }
  double unambiguous_time() const { return 1.0 / df; }
};

inline Signal make_signal(double t0, double dt, std::size_t n) {
  if (!(dt > 0.0)) throw ValidationError("signal dt must be > 0");
  return Signal{t0, dt, std::vector<cdouble>(n, 0.0)};
}

inline double transit_delay(double distance, double sound_velocity) { return distance / sound_velocity; }

inline std::size_t delay_samples(double tau, double dt) {
  return static_cast<std::size_t>(std::llround(tau / dt));
}

// Shifts by round(tau / dt) samples, zero-filling the front. A shift longer
// than the trace yields all zeros and sets *fully_truncated.
inline Signal delay(const Signal& sig, double tau, bool* fully_truncated = nullptr) {
  if (!(tau >= 0.0)) throw ValidationError("delay must be >= 0");
  const std::size_t shift = delay_samples(tau, sig.dt);
  Signal out{sig.t0, sig.dt, std::vector<cdouble>(sig.size(), 0.0)};
  if (fully_truncated) *fully_truncated = shift >= sig.size() && sig.size() > 0;
  for (std::size_t i = shift; i < sig.size(); ++i) out.values[i] = sig.values[i - shift];
  return out;
}

namespace detail {

// Integral of the unit triangle max(0, 1 - |s|) from -inf to u.
inline double triangle_cdf(double u) {
  if (u <= -1.0) return 0.0;
  if (u <= 0.0) return 0.5 * (1.0 + u) * (1.0 + u);
  if (u <= 1.0) return 1.0 - 0.5 * (1.0 - u) * (1.0 - u);
  return 1.0;
}

}  // namespace detail

// Sampled impulse response of a transducer: its N taps spaced 1/f0 all carry
// the same baseband phase, so the response is a box of length N/f0. Each
// sample weight integrates the box against linear interpolation between
// samples; the weights are >= 0 and sum to one.
inline std::vector<double> idt_taps(const IdtParams& idt, double dt) {
  const double length = idt::response_length(idt);
  const auto count = static_cast<std::size_t>(std::ceil(length / dt)) + 1;
  std::vector<double> taps(count);
  double total = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const double kk = static_cast<double>(k);
    taps[k] = detail::triangle_cdf(length / dt - kk) - detail::triangle_cdf(-kk);
    total += taps[k];
  }
  for (auto& t : taps) t /= total;
  return taps;
}

// Convolution with the transducer impulse response, scaled by insertion_loss.
inline Signal apply_idt_filter(const Signal& sig, const IdtParams& idt) {
  const double bw = idt::bandwidth(idt.center_frequency, idt.periods);
  if (sig.dt > 1.0 / (10.0 * bw)) {
    throw ValidationError("signal sampled too coarsely for the transducer band (need dt <= 1/(10 BW))");
  }
  const auto taps = idt_taps(idt, sig.dt);
  Signal out{sig.t0, sig.dt, std::vector<cdouble>(sig.size(), 0.0)};
  for (std::size_t i = 0; i < sig.size(); ++i) {
    cdouble acc = 0.0;
    const std::size_t kmax = std::min(taps.size(), i + 1);
    for (std::size_t k = 0; k < kmax; ++k) acc += taps[k] * sig.values[i - k];
    out.values[i] = idt.insertion_loss * acc;
  }
  return out;
}

// Echo train sum_{n=0}^{n_max} g^n sig(t - n tau_rt).
inline Signal multi_transit(const Signal& sig, double loop_gain, double round_trip, int n_max) {
  if (!(loop_gain >= 0.0 && loop_gain < 1.0)) throw ValidationError("loop_gain must lie in [0, 1)");
  if (!(round_trip > 0.0)) throw ValidationError("round trip time must be > 0");
  const std::size_t shift = std::max<std::size_t>(1, delay_samples(round_trip, sig.dt));
  Signal out{sig.t0, sig.dt, std::vector<cdouble>(sig.size(), 0.0)};
  double g = 1.0;
  for (int echo = 0; echo <= n_max; ++echo) {
    const std::size_t s = shift * static_cast<std::size_t>(echo);
    if (s >= sig.size()) break;
    for (std::size_t i = s; i < sig.size(); ++i) out.values[i] += g * sig.values[i - s];
    g *= loop_gain;
  }
  return out;
}

// Round trip between the qubit and IDT B, 2 d_QB / v0.
inline double default_round_trip(const DeviceConfig& cfg) {
  return 2.0 * transit_delay(cfg.geometry.dist_idtB_qubit, cfg.material.sound_velocity);
}

// Echo loop whose gain follows the mirror: out = (1 - g(t)) sig + g(t) out(t - tau_rt).
// Unit gain at DC for any g, and for constant g equal to (1 - g) * multi_transit.
inline Signal gated_multi_transit(const Signal& sig, const std::vector<double>& gain, double round_trip) {
  if (gain.size() != sig.size()) throw ValidationError("gain trace length must match the signal");
  const std::size_t shift = std::max<std::size_t>(1, delay_samples(round_trip, sig.dt));
  Signal out{sig.t0, sig.dt, std::vector<cdouble>(sig.size(), 0.0)};
  for (std::size_t i = 0; i < sig.size(); ++i) {
    const double g = gain[i];
    if (!(g >= 0.0 && g < 1.0)) throw ValidationError("loop gain must lie in [0, 1)");
    // Before the first echo can return the loop holds the initial value.
    const cdouble echo = i >= shift ? out.values[i - shift] : sig.values[0];
    out.values[i] = (1.0 - g) * sig.values[i] + g * echo;
  }
  return out;
}

inline double tukey(double t, double start, double stop, double taper) {
  if (t < start || t > stop) return 0.0;
  const double edge = 0.5 * taper * (stop - start);
  if (edge <= 0.0) return 1.0;
  if (t < start + edge) return 0.5 * (1.0 - std::cos(kPi * (t - start) / edge));
  if (t > stop - edge) return 0.5 * (1.0 - std::cos(kPi * (stop - t) / edge));
  return 1.0;
}

// Transforms to the time domain, keeps [gate_start, gate_stop] under a Tukey
// window and transforms back.
inline Spectrum time_gate(const Spectrum& spec, double gate_start, double gate_stop, double taper = 0.1) {
  if (spec.size() < 2 || !(spec.df > 0.0)) throw ValidationError("spectrum needs >= 2 points and df > 0");
  const double range = spec.unambiguous_time();
  if (!(gate_start >= 0.0 && gate_stop > gate_start && gate_stop <= range * (1.0 + 1e-12))) {
    throw ValidationError("gate window must lie inside [0, 1/df]");
  }
  if (!(taper >= 0.0 && taper <= 1.0)) throw ValidationError("taper fraction must lie in [0, 1]");
  Eigen::FFT<double> fft;
  std::vector<cdouble> time;
  fft.inv(time, spec.values);
  const double dt = range / static_cast<double>(spec.size());
  for (std::size_t i = 0; i < time.size(); ++i) time[i] *= tukey(dt * static_cast<double>(i), gate_start, gate_stop, taper);
  Spectrum out{spec.f0, spec.df, {}};
  fft.fwd(out.values, time);
  return out;
}

// Rising or falling edge of a real trace between two known times. Levels are
// taken at the window ends; the 10 % and 90 % crossings are interpolated.
struct Edge {
  double t10 = 0.0;
  double t90 = 0.0;
  double duration = 0.0;  // |t90 - t10|
};

inline std::optional<double> first_crossing(const std::vector<double>& t, const std::vector<double>& y,
                                            std::size_t from, std::size_t to, double level, bool rising) {
  for (std::size_t i = from + 1; i <= to && i < y.size(); ++i) {
    const bool crossed = rising ? (y[i - 1] < level && y[i] >= level) : (y[i - 1] > level && y[i] <= level);
    if (crossed) {
      const double frac = (level - y[i - 1]) / (y[i] - y[i - 1]);
      return t[i - 1] + frac * (t[i] - t[i - 1]);
    }
  }
  return std::nullopt;
}

inline std::optional<Edge> measure_edge(const std::vector<double>& t, const std::vector<double>& y,
                                        double window_start, double window_stop) {
  auto index_of = [&t](double time) {
    return static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), time) - t.begin());
  };
  const std::size_t a = index_of(window_start);
  const std::size_t b = std::min(index_of(window_stop), t.size() - 1);
  if (a >= b) return std::nullopt;
  const double start_level = y[a];
  const double end_level = y[b];
  const bool rising = end_level > start_level;
  const double span = end_level - start_level;
  const auto c10 = first_crossing(t, y, a, b, start_level + 0.1 * span, rising);
  const auto c90 = first_crossing(t, y, a, b, start_level + 0.9 * span, rising);
  if (!c10 || !c90) return std::nullopt;
  // For a falling edge the 90 % point (of the change) is reached last.
  return Edge{*c10, *c90, std::abs(*c90 - *c10)};
}

// Power-weighted mean arrival time of a signal.
inline double centroid(const Signal& sig) {
  double w = 0.0;
  double tw = 0.0;
  for (std::size_t i = 0; i < sig.size(); ++i) {
    const double p = std::norm(sig.values[i]);
    w += p;
    tw += p * sig.time(i);
  }
  if (w <= 0.0) throw NumericalError("centroid of an all-zero signal");
  return tw / w;
}

}  // namespace sawqed::channel

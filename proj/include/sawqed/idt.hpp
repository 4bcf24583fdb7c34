#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "sawqed/params.hpp"
#include "sawqed/units.hpp"

namespace sawqed::idt {

struct IdtResponse {
  std::vector<double> frequencies;
  std::vector<std::complex<double>> amplitude;
};

// Empirical bandwidth rule, BW = 0.9 f0 / N_p.
inline double bandwidth(double f0, int periods) { return 0.9 * f0 / periods; }

inline double wavelength(double sound_velocity, double f0) { return sound_velocity / f0; }

// Acoustic relaxation rate of a transmon shunted by an N_p-period transducer.
inline double acoustic_coupling(double fq, double k2, int periods) {
  return 0.5 * fq * k2 * periods;
}

// Normalized array factor sin(N pi x) / (N sin(pi x)) with x = (f - f0) / f0.
inline double array_factor(int periods, double x) {
  const double s = std::sin(kPi * x);
  if (std::abs(s) < 1e-12) {
    // Limit at the lattice points x = m: (+-1)^{m (N-1)}.
    const long m = std::lround(x);
    return ((m * (periods - 1)) % 2 == 0) ? 1.0 : -1.0;
  }
  return std::sin(periods * kPi * x) / (periods * s);
}

// Delta-function model: each of the N_p unit cells is one point source. The
// returned amplitude is real (reference plane at the transducer centre).
inline IdtResponse response(const IdtParams& params, const std::vector<double>& frequencies) {
  IdtResponse out;
  out.frequencies = frequencies;
  out.amplitude.reserve(frequencies.size());
  const double f0 = params.center_frequency;
  for (double f : frequencies) {
    out.amplitude.emplace_back(params.insertion_loss * array_factor(params.periods, (f - f0) / f0), 0.0);
  }
  return out;
}

// Same response referenced to the first source, i.e. the transfer function of
// the causal tap train sum_n delta(t - n / f0) / N_p. offset is f - f0.
inline std::complex<double> causal_baseband_response(const IdtParams& params, double offset) {
  const double x = offset / params.center_frequency;
  const double phase = -kPi * (params.periods - 1) * x;
  return params.insertion_loss * array_factor(params.periods, x) * std::polar(1.0, phase);
}

// Duration of the transducer's impulse response, N_p / f0.
inline double response_length(const IdtParams& params) {
  return params.periods / params.center_frequency;
}

}  // namespace sawqed::idt

#pragma once

#include <cmath>
#include <sstream>

#include "sawqed/errors.hpp"
#include "sawqed/params.hpp"
#include "sawqed/units.hpp"

namespace sawqed::transmon {

// External flux through the SQUID loop in units of the flux quantum.
struct FluxBias {
  double phi_over_phi0 = 0.0;
};

struct LevelStructure {
  double f01 = 0.0;
  double f12 = 0.0;
  double anharmonicity = 0.0;  // f12 - f01
  double f02_half = 0.0;
  double f03_third = 0.0;
};

// Symmetric SQUID: E_J(phi) = E_J0 |cos(pi phi / phi0)|.
inline double josephson_energy(FluxBias phi, double ej0) {
  return ej0 * std::abs(std::cos(kPi * phi.phi_over_phi0));
}

inline double transition_f01(FluxBias phi, const TransmonParams& t) {
  const double ej = josephson_energy(phi, t.ej0);
  if (!(ej > t.ec)) {
    std::ostringstream msg;
    msg << "flux " << phi.phi_over_phi0 << " phi0 leaves the transmon regime (E_J = " << ej
        << " Hz <= E_C = " << t.ec << " Hz)";
    throw NumericalError(msg.str());
  }
  return std::sqrt(8.0 * ej * t.ec) - t.ec;
}

inline double max_f01(const TransmonParams& t) { return transition_f01(FluxBias{0.0}, t); }

// Leading anharmonic order: f_{j,j+1} = f01 - j E_C.
inline LevelStructure level_structure(FluxBias phi, const TransmonParams& t) {
  LevelStructure s;
  s.f01 = transition_f01(phi, t);
  s.f12 = s.f01 - t.ec;
  s.anharmonicity = s.f12 - s.f01;
  s.f02_half = (s.f01 + s.f12) / 2.0;
  s.f03_third = (s.f01 + s.f12 + (s.f01 - 2.0 * t.ec)) / 3.0;
  return s;
}

// Bisection on the monotone branch [0, 0.5). Result reproduces target within 1 Hz.
inline FluxBias flux_for_frequency(double target_f01, const TransmonParams& t) {
  const double fmax = max_f01(t);
  if (!(target_f01 > 0.0) || target_f01 > fmax) {
    std::ostringstream msg;
    msg << "target f01 = " << target_f01 << " Hz is unreachable (f01,max = " << fmax << " Hz)";
    throw NumericalError(msg.str());
  }
  // Smallest f01 on the branch is set by E_J -> E_C; targets below it cannot be reached.
  double lo = 0.0;
  double hi = std::acos(t.ec / t.ej0) / kPi;  // E_J(hi) == E_C
  auto f_at = [&t](double x) {
    const double ej = josephson_energy(FluxBias{x}, t.ej0);
    return ej > t.ec ? std::sqrt(8.0 * ej * t.ec) - t.ec : 0.0;
  };
  if (target_f01 < f_at(hi) + 0.5) {
    throw NumericalError("target f01 lies below the transmon-regime branch");
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double f = f_at(mid);
    if (f > target_f01) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (std::abs(f - target_f01) < 1e-3 || hi - lo < 1e-17) break;
  }
  return FluxBias{0.5 * (lo + hi)};
}

}  // namespace sawqed::transmon

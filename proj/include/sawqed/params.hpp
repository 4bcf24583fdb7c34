#pragma once

#include <cmath>
#include <string>

#include "sawqed/errors.hpp"

namespace sawqed {

struct MaterialParams {
  double dielectric_constant = 0.0;   // epsilon_inf, stored only
  double sound_velocity = 0.0;        // m/s
  double electromech_coupling = 0.0;  // K^2 as a fraction, 0.07 % -> 7e-4

  bool operator==(const MaterialParams&) const = default;
};

struct TransmonParams {
  double ej0 = 0.0;                // E_J at zero flux over h, Hz
  double ec = 0.0;                 // E_C over h, Hz
  double squid_area = 0.0;         // m^2, stored only
  double dephasing_rate = 0.0;     // Gamma_phi, Hz
  double acoustic_coupling = 0.0;  // Gamma_ac = Gamma_01, Hz

  bool operator==(const TransmonParams&) const = default;
};

struct IdtParams {
  double center_frequency = 0.0;  // Hz
  int periods = 0;
  double finger_overlap = 0.0;  // m
  double insertion_loss = 1.0;  // amplitude factor in [0, 1]

  bool operator==(const IdtParams&) const = default;
};

struct Geometry {
  double dist_idtA_qubit = 0.0;  // m
  double dist_idtB_qubit = 0.0;  // m

  bool operator==(const Geometry&) const = default;
};

struct DeviceConfig {
  MaterialParams material;
  TransmonParams transmon;
  IdtParams idt_a;
  IdtParams idt_b;
  IdtParams qdt;
  Geometry geometry;
  double rabi_per_sqrt_watt = 0.0;  // k in Omega_p = k sqrt(P), Hz/sqrt(W)

  bool operator==(const DeviceConfig&) const = default;
};

// Relative mismatch allowed between the three transducer centre frequencies.
inline constexpr double kCenterFrequencyTolerance = 1e-3;

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

inline bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace detail

inline void validate(const MaterialParams& m) {
  using detail::require;
  require(std::isfinite(m.dielectric_constant) && m.dielectric_constant > 1.0,
          "material.dielectric_constant must be > 1");
  require(detail::finite_positive(m.sound_velocity), "material.sound_velocity must be > 0");
  require(std::isfinite(m.electromech_coupling) && m.electromech_coupling > 0.0 &&
              m.electromech_coupling < 1.0,
          "material.electromech_coupling must lie in (0, 1)");
}

inline void validate(const TransmonParams& t) {
  using detail::require;
  require(detail::finite_positive(t.ej0), "transmon.ej0 must be > 0");
  require(detail::finite_positive(t.ec), "transmon.ec must be > 0");
  require(t.ej0 / t.ec > 1.0, "transmon.ej0 / transmon.ec must be > 1 (transmon regime)");
  require(std::isfinite(t.squid_area) && t.squid_area >= 0.0, "transmon.squid_area must be >= 0");
  require(std::isfinite(t.dephasing_rate) && t.dephasing_rate >= 0.0,
          "transmon.dephasing_rate must be >= 0");
  require(std::isfinite(t.acoustic_coupling) && t.acoustic_coupling >= 0.0,
          "transmon.acoustic_coupling must be >= 0");
}

inline void validate(const IdtParams& p, const std::string& name) {
  using detail::require;
  require(p.periods >= 1, name + ".periods must be >= 1");
  require(detail::finite_positive(p.center_frequency), name + ".center_frequency must be > 0");
  require(std::isfinite(p.finger_overlap) && p.finger_overlap >= 0.0,
          name + ".finger_overlap must be >= 0");
  require(std::isfinite(p.insertion_loss) && p.insertion_loss >= 0.0 && p.insertion_loss <= 1.0,
          name + ".insertion_loss must lie in [0, 1]");
}

inline void validate(const Geometry& g) {
  detail::require(detail::finite_positive(g.dist_idtA_qubit), "geometry.dist_idtA_qubit must be > 0");
  detail::require(detail::finite_positive(g.dist_idtB_qubit), "geometry.dist_idtB_qubit must be > 0");
}

inline void validate(const DeviceConfig& cfg) {
  validate(cfg.material);
  validate(cfg.transmon);
  validate(cfg.idt_a, "idt_a");
  validate(cfg.idt_b, "idt_b");
  validate(cfg.qdt, "qdt");
  validate(cfg.geometry);
  const double fq = cfg.qdt.center_frequency;
  auto matches = [fq](double f) { return std::abs(f - fq) <= kCenterFrequencyTolerance * fq; };
  detail::require(matches(cfg.idt_a.center_frequency) && matches(cfg.idt_b.center_frequency),
                  "idt_a, idt_b and qdt center frequencies must agree");
  detail::require(detail::finite_positive(cfg.rabi_per_sqrt_watt), "rabi_per_sqrt_watt must be > 0");
}

}  // namespace sawqed

#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "sawqed/scattering.hpp"
#include "test_support.hpp"

using namespace sawqed;
using namespace sawqed::scattering;

namespace {
const Rates kDevice{21e6, 8e6};
}

TEST(MaxReflection, Examples) {
  EXPECT_NEAR(max_reflection(21e6, 8e6), 21.0 / 37.0, 1e-15);
  EXPECT_NEAR(max_reflection(21e6, 8e6), 0.5676, 5e-5);
  EXPECT_EQ(max_reflection(21e6, 0.0), 1.0);
  EXPECT_EQ(max_reflection(21e6, std::numeric_limits<double>::infinity()), 0.0);
  EXPECT_LT(max_reflection(21e6, 1e15), 1e-7);
}

TEST(ReflectionOnResonance, Examples) {
  const double r = reflection_on_resonance(0.0, kDevice);
  EXPECT_NEAR(r, -0.5676, 5e-5);
  EXPECT_NEAR((1 + r) * (1 + r), 0.187, 5e-4);
  const double half = std::sqrt(kDevice.gamma01 * kDevice.decoherence());
  const double rh = reflection_on_resonance(half, kDevice);
  EXPECT_NEAR(rh, -0.2838, 5e-5);
  EXPECT_NEAR((1 + rh) * (1 + rh), 0.513, 5e-4);
  EXPECT_NEAR(reflection_on_resonance(1e12, kDevice), 0.0, 1e-6);
}

TEST(BlochSteadyState, Examples) {
  for (double rabi : {0.0, 1e6, 13e6, 80e6}) {
    const auto s = bloch_steady_state(rabi, 0.0, kDevice);
    const double closed = reflection_on_resonance(rabi, kDevice);
    EXPECT_NEAR(s.r.real(), closed, 1e-12 * std::abs(closed));
    EXPECT_EQ(s.r.imag(), 0.0);
  }
  const auto d = bloch_steady_state(0.0, 18.5e6, kDevice);
  EXPECT_NEAR(std::abs(d.r), 0.5676 / std::sqrt(2.0), 1e-4);
  EXPECT_NEAR(d.reflectance(), 0.161, 5e-4);
  const auto far = bloch_steady_state(1e6, 1e13, kDevice);
  EXPECT_NEAR(std::abs(far.r), 0.0, 1e-5);
  EXPECT_NEAR(std::abs(far.t - 1.0), 0.0, 1e-5);
}

TEST(BlochSteadyState, DriveSpec) {
  const auto by_power = bloch_steady_state(DriveSpec::from_power(4e-14, 3e6), kDevice, 1e14);
  const auto by_rabi = bloch_steady_state(1e14 * std::sqrt(4e-14), 3e6, kDevice);
  EXPECT_EQ(by_power.r, by_rabi.r);
  EXPECT_THROW(DriveSpec::from_power(1e-15).rabi(), ValidationError);
  EXPECT_THROW(DriveSpec::from_rabi(-1.0), ValidationError);
}

TEST(BlochSteadyState, ElasticLimit) {
  const auto s = bloch_steady_state(0.0, 0.0, Rates{21e6, 0.0});
  EXPECT_NEAR(s.reflectance(), 1.0, 1e-6);
  EXPECT_NEAR(s.transmittance(), 0.0, 1e-6);
}

TEST(BlochSteadyState, Properties) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const Rates rates{1e6 + 50e6 * u(rng), 30e6 * u(rng)};
    const double rabi = 100e6 * u(rng) * u(rng);
    const double det = 200e6 * (u(rng) - 0.5);
    const auto s = bloch_steady_state(rabi, det, rates);
    const auto m = bloch_steady_state(rabi, -det, rates);
    EXPECT_EQ(s.t, 1.0 + s.r);
    EXPECT_LE(s.reflectance() + s.transmittance(), 1.0 + 1e-12);
    EXPECT_LE(std::abs(s.r), max_reflection(rates.gamma01, rates.gamma_phi) + 1e-15);
    EXPECT_LE(s.excited_population, 0.5);
    EXPECT_NEAR(std::abs(s.r), std::abs(m.r), 1e-15);
    EXPECT_NEAR(s.r.imag(), -m.r.imag(), 1e-15);
  }
}

TEST(BlochSteadyState, ResonantSaturationMonotone) {
  double prev_t = 0.0;
  double prev_r = 2.0;
  for (double rabi = 0.0; rabi < 2e9; rabi = rabi * 1.2 + 1e4) {
    const auto s = bloch_steady_state(rabi, 0.0, kDevice);
    EXPECT_GE(s.transmittance(), prev_t);
    EXPECT_LE(s.reflectance(), prev_r);
    prev_t = s.transmittance();
    prev_r = s.reflectance();
  }
}

TEST(PowerSweep, Examples) {
  const auto& cfg = fixtures::reference_device();
  const auto rows = power_sweep(cfg, {1e-22, 1e-18, 1e-14, 1e-10, 1e-4});
  EXPECT_NEAR(rows[0].d_t, 0.813, 5e-4);
  EXPECT_NEAR(rows.back().d_t, 0.0, 1e-6);
  EXPECT_NEAR(rows.back().d_r, 0.0, 1e-6);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LE(rows[i].d_t, rows[i - 1].d_t);
  for (const auto& r : rows) {
    EXPECT_NEAR(r.d_t, r.t_off - r.t_on, 1e-15);
    EXPECT_NEAR(r.d_r, r.r_on - r.r_off, 1e-15);
  }
}

TEST(FluxPowerMap, Examples) {
  const auto& cfg = fixtures::reference_device();
  const double phi_res = transmon::flux_for_frequency(cfg.qdt.center_frequency, cfg.transmon).phi_over_phi0;
  const auto map = flux_power_map(cfg, {0.0, phi_res}, {1e-22});
  ASSERT_EQ(map.points.size(), 2u);
  EXPECT_NEAR(map.points[0].t_norm, 1.0, 1e-3);
  EXPECT_NEAR(map.points[1].t_norm, 0.1873, 2e-3);
  EXPECT_NEAR(map.transitions[1].f02_half - map.transitions[1].f01, -64.5e6, 1e-3);
  EXPECT_THROW(flux_power_map(cfg, {0.5}, {1e-18}), NumericalError);
  EXPECT_THROW(flux_power_map(cfg, {}, {1e-18}), ValidationError);
}

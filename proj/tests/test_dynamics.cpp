#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "sawqed/dynamics.hpp"
#include "sawqed/routing.hpp"
#include "test_support.hpp"

using namespace sawqed;
using namespace sawqed::dynamics;

namespace {

const scattering::Rates kDevice{21e6, 8e6};

DensityMatrix evolve_free(DensityMatrix rho, const std::vector<Matrix>& collapse, double duration, int steps) {
  const Matrix h = Matrix::Zero(rho.dim(), rho.dim());
  for (int i = 0; i < steps; ++i) rho = lindblad_step(rho, h, collapse, duration / steps);
  return rho;
}

}  // namespace

TEST(LindbladStep, IdentityWithoutDynamics) {
  Matrix m(2, 2);
  m << 0.7, cdouble(0.1, 0.2), cdouble(0.1, -0.2), 0.3;
  const DensityMatrix rho(m);
  const auto out = evolve_free(rho, {}, 1e-6, 10);
  EXPECT_EQ((out.matrix() - m).cwiseAbs().maxCoeff(), 0.0);
}

TEST(LindbladStep, ExponentialDecay) {
  const TransmonModel model{2, {21e6, 0.0}};
  const double t1 = 1.0 / angular(21e6);
  const auto out = evolve_free(DensityMatrix::basis(2, 1), model.collapse_operators(), t1, 1000);
  EXPECT_NEAR(out.population(1), std::exp(-1.0), 1e-4);
  EXPECT_TRUE(out.is_physical());
}

TEST(LindbladStep, PureDephasing) {
  const double gphi = 8e6;
  Matrix m(2, 2);
  m << 0.5, 0.5, 0.5, 0.5;
  std::vector<Matrix> ops{std::sqrt(2.0 * angular(gphi)) * Matrix::Identity(2, 2)};
  ops[0](0, 0) = 0.0;
  const double t = 30e-9;
  const auto out = evolve_free(DensityMatrix(m), ops, t, 600);
  EXPECT_NEAR(out.population(0), 0.5, 1e-12);
  EXPECT_NEAR(out.population(1), 0.5, 1e-12);
  EXPECT_NEAR(std::abs(out(0, 1)), 0.5 * std::exp(-angular(gphi) * t), 1e-8);
}

TEST(LindbladStep, OversizedStepRejected) {
  const TransmonModel model{2, kDevice};
  const Matrix h = model.hamiltonian(50e6, 0.0, 0.0, 0.0);
  EXPECT_THROW(lindblad_step(DensityMatrix::basis(2, 1), h, model.collapse_operators(), 1.0), NumericalError);
}

TEST(Evolve, SteadyStateMatchesBloch) {
  for (double rabi : {0.5e6, 5e6, 20e6}) {
    for (double det : {0.0, 10e6, -25e6}) {
      const auto sched = DriveSchedule::constant(10.0 / kDevice.gamma01, 1e-9, rabi, det);
      const auto ev = evolve(sched, kDevice, 2);
      const cdouble r = reflection_at(ev.fields, ev.fields.size() - 1);
      const auto ref = scattering::bloch_steady_state(rabi, det, kDevice);
      EXPECT_NEAR(std::abs(r - ref.r), 0.0, 1e-6) << rabi << " " << det;
      const auto& f = ev.fields;
      const std::size_t last = f.size() - 1;
      EXPECT_NEAR(std::abs(f.transmitted[last] - f.incident[last] - f.reflected[last]), 0.0, 1e-9);
      EXPECT_LT(ev.integrity.max_step_trace_drift, kStepTraceDrift);
    }
  }
}

TEST(Evolve, RandomSteadyStateOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const scattering::Rates rates{5e6 + 40e6 * u(rng), 20e6 * u(rng)};
    const double rabi = 0.5e6 + 40e6 * u(rng);
    const double det = 60e6 * (u(rng) - 0.5);
    const auto ref = scattering::bloch_steady_state(rabi, det, rates);
    const TransmonModel model{2, rates};
    EXPECT_NEAR(std::abs(steady_reflection(model, rabi, det) - ref.r), 0.0, 1e-10);
    const auto ev = evolve(DriveSchedule::constant(12.0 / rates.gamma01, 2e-9, rabi, det), rates, 2,
                           EvolveOptions{1, false});
    EXPECT_NEAR(std::abs(reflection_at(ev.fields, ev.fields.size() - 1) - ref.r), 0.0, 1e-6);
    EXPECT_GT(ev.integrity.min_eigenvalue, -1e-9);
    EXPECT_LT(ev.integrity.max_trace_error, 1e-9);
    EXPECT_LT(ev.integrity.max_hermiticity_error, 1e-9);
  }
}

TEST(Evolve, ThreeLevelReducesToTwoLevel) {
  const auto sched = DriveSchedule::constant(400e-9, 1e-9, 2e-1 * kDevice.gamma01, 4e6);
  const auto two = evolve(sched, kDevice, 2);
  const auto three = evolve(sched, kDevice, 3);
  for (std::size_t i = 0; i < two.fields.size(); i += 37) {
    EXPECT_NEAR(std::abs(two.fields.reflected[i] - three.fields.reflected[i]), 0.0,
                1e-8 * std::abs(two.fields.incident[i]));
  }
  for (const auto& rho : three.trajectory) EXPECT_LT(rho.population(2), 1e-10);
}

TEST(Evolve, ScheduleErrors) {
  auto sched = DriveSchedule::constant(100e-9, 1e-9, 1e6, 0.0, 30e6);
  EXPECT_THROW(evolve(sched, kDevice, 2), ValidationError);
  EXPECT_NO_THROW(evolve(sched, kDevice, 3));
  sched.control_rabi.pop_back();
  EXPECT_THROW(evolve(sched, kDevice, 3), ValidationError);
  EXPECT_THROW(evolve(DriveSchedule::constant(100e-9, 1e-9, 1e6, 0.0), {0.0, 1e6}, 2), ValidationError);
}

TEST(Evolve, StepRespectsMaximum) {
  const auto sched = DriveSchedule::constant(50e-9, 1e-9, 1e6, 80e6);
  const auto ev = evolve(sched, kDevice, 2);
  EXPECT_LE(ev.step, 1.0 / (100.0 * 80e6) * (1 + 1e-12));
}

namespace {

double dip_separation(const scattering::Rates& rates, double control) {
  std::vector<double> det;
  for (int i = 0; i <= 2400; ++i) det.push_back(-1.2 * control + i * 2.4 * control / 2400);
  const auto pts = autler_townes_spectrum(rates, 0.2e6, {control}, det);
  std::vector<double> t;
  for (const auto& p : pts) t.push_back(p.transmittance);
  const auto minima = local_minima(det, t);
  if (minima.size() != 2) return 0.0;
  EXPECT_NEAR(minima[0], -minima[1], 1e-6 * control);
  return minima[1] - minima[0];
}

}  // namespace

TEST(AutlerTownes, DipsAtHalfControlRabiWhenResolved) {
  // 50 MHz control with gamma_01 = 2.5 MHz, well inside the dressed-state regime.
  EXPECT_NEAR(dip_separation({5e6, 0.0}, 50e6), 50e6, 0.05 * 50e6);
  EXPECT_NEAR(dip_separation(kDevice, 10.0 * kDevice.decoherence()), 10.0 * kDevice.decoherence(),
              0.05 * 10.0 * kDevice.decoherence());
}

TEST(AutlerTownes, SplittingApproachesControlRabi) {
  double prev = 0.0;
  for (double ratio : {3.0, 5.0, 10.0, 20.0}) {
    const double control = ratio * kDevice.decoherence();
    const double frac = dip_separation(kDevice, control) / control;
    EXPECT_GT(frac, prev);
    EXPECT_LE(frac, 1.0 + 1e-3);
    prev = frac;
  }
  EXPECT_GT(prev, 0.99);
}

TEST(AutlerTownes, NoControlGivesSingleDip) {
  std::vector<double> det;
  for (int i = 0; i <= 200; ++i) det.push_back(-50e6 + i * 0.5e6);
  const auto pts = autler_townes_spectrum(kDevice, 0.2e6, {0.0}, det);
  std::vector<double> t;
  for (const auto& p : pts) t.push_back(p.transmittance);
  const auto minima = local_minima(det, t);
  ASSERT_EQ(minima.size(), 1u);
  EXPECT_NEAR(minima[0], 0.0, 0.1e6);
  EXPECT_NEAR(t[100], 0.187, 2e-3);
}

TEST(Router, PulseTiming) {
  const auto& cfg = fixtures::reference_device();
  const double control = 10.0 * kDevice.decoherence();
  const auto r400 = route_pulse(cfg, 400e-9, control);
  ASSERT_TRUE(r400.rise && r400.fall);
  EXPECT_NEAR(r400.rise->duration, 40e-9, 20e-9);
  EXPECT_NEAR(r400.fall->duration, 160e-9, 80e-9);
  const auto r60 = route_pulse(cfg, 60e-9, control);
  EXPECT_NEAR(r60.peak_transmitted / r400.peak_transmitted, 1.0, 0.1);
}

TEST(Router, TransmitsOnlyDuringPulse) {
  const auto& cfg = fixtures::reference_device();
  const auto r = route_pulse(cfg, 400e-9, 10.0 * kDevice.decoherence());
  const auto& f = r.at_qubit;
  double on = 0.0;
  double off = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double t = f.time(i);
    if (t > r.pulse_start + 200e-9 && t < r.pulse_stop) on = std::max(on, std::norm(f.transmitted[i]));
    if (t < r.pulse_start) off = std::max(off, std::norm(f.transmitted[i]));
  }
  EXPECT_GT(on, 3.0 * off);
}

TEST(SawPulse, ArrivalAndSuppression) {
  const auto& cfg = fixtures::reference_device();
  const double gamma = kDevice.decoherence();
  const auto detuned = saw_pulse(cfg, 100e-9, 2.1e6, 50 * gamma);
  const auto resonant = saw_pulse(cfg, 100e-9, 2.1e6, 0.0);
  EXPECT_NEAR(detuned.arrival_delay, 139.66e-9, 1e-9);
  EXPECT_LT(resonant.transmitted_energy, 0.5 * detuned.transmitted_energy);
  EXPECT_GT(resonant.reflected_energy, 10 * detuned.reflected_energy);
}

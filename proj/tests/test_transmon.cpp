#include <random>

#include <gtest/gtest.h>

#include "sawqed/transmon.hpp"
#include "test_support.hpp"

using namespace sawqed;
using namespace sawqed::transmon;

namespace {
const TransmonParams& tp() { return fixtures::reference_device().transmon; }
}  // namespace

TEST(JosephsonEnergy, Examples) {
  EXPECT_DOUBLE_EQ(josephson_energy({0.0}, 10.7e9), 10.7e9);
  EXPECT_NEAR(josephson_energy({0.5}, 10.7e9), 0.0, 1e-6);
  EXPECT_NEAR(josephson_energy({1.0 / 3.0}, 10.7e9), 5.35e9, 1.0);
}

TEST(TransitionF01, Examples) {
  EXPECT_NEAR(transition_f01({0.0}, tp()), 3.194e9, 1e6);
  EXPECT_NEAR(transition_f01({1.0 / 3.0}, tp()), 2.221e9, 1e6);
  EXPECT_THROW(transition_f01({0.5}, tp()), NumericalError);
}

TEST(TransitionF01, PeriodicAndEven) {
  for (double phi : {0.0, 0.07, 0.21, 0.33, 0.44}) {
    const double f = transition_f01({phi}, tp());
    EXPECT_EQ(f, transition_f01({-phi}, tp()));
    EXPECT_NEAR(f, transition_f01({phi + 1.0}, tp()), 1e-6 * f);
  }
}

TEST(TransitionF01, DecreasingOnHalfPeriod) {
  double prev = transition_f01({0.0}, tp());
  for (int i = 1; i < 470; ++i) {
    const double phi = i * 1e-3;
    const double f = transition_f01({phi}, tp());
    EXPECT_LT(f, prev) << phi;
    prev = f;
  }
}

TEST(LevelStructure, Examples) {
  const auto l = level_structure({0.0}, tp());
  EXPECT_DOUBLE_EQ(l.anharmonicity, -129e6);
  EXPECT_NEAR(l.f12, 3.065e9, 1e6);
  EXPECT_NEAR(l.f02_half - l.f01, -64.5e6, 1e-3);
  const auto l2 = level_structure({0.3}, tp());
  EXPECT_NEAR(l2.f02_half - l2.f01, -64.5e6, 1e-3);
  EXPECT_NEAR(l2.f03_third, l2.f01 - 129e6, 1e-3);
  EXPECT_LT(l2.anharmonicity, 0.0);
}

TEST(FluxForFrequency, Examples) {
  EXPECT_NEAR(flux_for_frequency(max_f01(tp()), tp()).phi_over_phi0, 0.0, 1e-6);
  const auto phi = flux_for_frequency(2.2641e9, tp());
  EXPECT_NEAR(phi.phi_over_phi0, 0.3264, 5e-4);
  EXPECT_NEAR(transition_f01(phi, tp()), 2.2641e9, 1.0);
  EXPECT_THROW(flux_for_frequency(4e9, tp()), NumericalError);
  EXPECT_THROW(flux_for_frequency(0.0, tp()), NumericalError);
}

TEST(FluxForFrequency, RoundTripRandom) {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> dist(1e9, max_f01(tp()));
  for (int i = 0; i < 100; ++i) {
    const double f = dist(rng);
    const auto phi = flux_for_frequency(f, tp());
    EXPECT_GE(phi.phi_over_phi0, 0.0);
    EXPECT_LT(phi.phi_over_phi0, 0.5);
    EXPECT_NEAR(transition_f01(phi, tp()), f, 1.0);
  }
}

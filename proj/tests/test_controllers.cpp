#include <gtest/gtest.h>

#include <cmath>

#include "geofc/controllers.hpp"
#include "geofc/errors.hpp"

using namespace geofc;

namespace {

Datacenter reference_dc() { return {1, 3, 1.0 / 1.1, 15.0, 30.0, 25.0, 0.11}; }

}  // namespace

TEST(LoadCommand, NominalWithoutSignal) {
  auto dc = reference_dc();
  EXPECT_EQ(gfc_load_command(dc, 0.0, 0.0, 75.0), 25.0);
  EXPECT_EQ(olc_load_command(dc, 0.0, 75.0), 25.0);
}

TEST(LoadCommand, ClampsAtLowerBound) {
  // 25 - 3.75 / 0.11 is far below 15.
  EXPECT_EQ(gfc_load_command(reference_dc(), -0.05, 0.0, 75.0), 15.0);
}

TEST(LoadCommand, InteriorValue) {
  auto dc = reference_dc();
  const double w = -0.01;
  const double mu = -0.2;
  const double expected = 25.0 + (75.0 * w - dc.a * mu) / dc.eta;
  EXPECT_NEAR(gfc_load_command(dc, w, mu, 75.0), expected, 1e-12);
}

TEST(LoadCommand, NegativeMuCanRaiseLoadDuringUnderFrequency) {
  // A shortfall price above the local frequency signal pushes the command
  // above nominal even though the grid is short of power.
  Datacenter dc{1, 1, 0.9, 15.0, 30.0, 25.0, 0.11};
  const double w = -0.02;
  const double mu = -3.0;  // a*|mu| = 2.7 > alpha*|w| = 1.5
  const double d = gfc_load_command(dc, w, mu, 75.0);
  EXPECT_GT(d, dc.d_nom);
  EXPECT_LT(olc_load_command(dc, w, 75.0), dc.d_nom);
}

TEST(LoadCommand, DroopOnlyIgnoresEverything) {
  auto dc = reference_dc();
  for (double w : {-0.3, 0.0, 0.2}) {
    for (double mu : {-5.0, 0.0, 2.0}) {
      EXPECT_EQ(load_command(ControllerKind::DroopOnly, dc, w, mu, 75.0), 25.0);
    }
  }
  EXPECT_EQ(droop_only_command(dc), 25.0);
}

TEST(LoadCommand, OlcIgnoresMu) {
  auto dc = reference_dc();
  EXPECT_EQ(load_command(ControllerKind::Olc, dc, -0.001, -7.0, 75.0), olc_load_command(dc, -0.001, 75.0));
  EXPECT_EQ(load_command(ControllerKind::Olc, dc, -0.001, 7.0, 75.0), olc_load_command(dc, -0.001, 75.0));
}

TEST(LoadCommand, MonotoneInOmega) {
  auto dc = reference_dc();
  double prev = gfc_load_command(dc, -1.0, -1.0, 75.0);
  for (double w = -0.999; w <= 1.0; w += 0.001) {
    const double d = gfc_load_command(dc, w, -1.0, 75.0);
    EXPECT_GE(d, prev);
    EXPECT_GE(d, dc.d_min);
    EXPECT_LE(d, dc.d_max);
    prev = d;
  }
}

TEST(MuStep, EulerExample) {
  CloudModel c;
  c.gamma = 0.16;
  c.epsilon = 0.0;
  GfcControllerState st(0.5, 0.0, 0.0);
  EXPECT_NEAR(gfc_mu_step(st, c, -4.0, 0.1), -0.2, 1e-15);
  EXPECT_NEAR(st.mu(), -0.2, 1e-15);
  EXPECT_NEAR(st.time(), 0.1, 1e-15);
}

TEST(MuStep, FixedPointIsStationary) {
  CloudModel c;
  c.gamma = 0.16;
  c.epsilon = 1e-6;
  const double s = -12.5;
  const double mu_star = interdep_marginal(c, s);
  GfcControllerState st(0.5, mu_star, 0.0);
  for (int i = 0; i < 100; ++i) gfc_mu_step(st, c, s, 1e-3);
  EXPECT_NEAR(st.mu(), mu_star, 1e-12);
}

TEST(MuStep, StiffBranchStaysMonotone) {
  // On s > 0 the inverse marginal has slope 1/epsilon; a plain Euler step
  // would overshoot and oscillate.
  CloudModel c;
  c.gamma = 0.16;
  c.epsilon = 1e-6;
  GfcControllerState st(0.04, 0.0, 0.0);
  const double s = 2.0;
  const double mu_star = interdep_marginal(c, s);
  double prev = st.mu();
  for (int i = 0; i < 20000; ++i) {
    gfc_mu_step(st, c, s, 1e-4);
    EXPECT_GE(st.mu(), prev - 1e-18);
    EXPECT_LE(st.mu(), mu_star + 1e-15);
    prev = st.mu();
  }
}

TEST(MuDelay, NoDelayReturnsCurrent) {
  CloudModel c;
  c.gamma = 0.16;
  GfcControllerState st(0.5, 0.0, 0.0);
  gfc_mu_step(st, c, -4.0, 0.1);
  EXPECT_EQ(st.mu_at(st.time()), st.mu());
}

TEST(MuDelay, ZeroOrderHoldOfHistory) {
  CloudModel c;
  c.gamma = 0.16;
  c.epsilon = 0.0;
  GfcControllerState st(0.5, 0.0, 0.5, 2.0);
  std::vector<double> recorded{st.mu()};
  for (int k = 0; k < 20; ++k) recorded.push_back(gfc_mu_step(st, c, -4.0, 0.1));
  // recorded[k] is mu at t = 0.1 k.
  EXPECT_EQ(st.mu_at(2.02), recorded[15]);
  // 1.23 - 0.5 = 0.73 -> latest sample at or before is t = 0.7.
  EXPECT_EQ(st.mu_at(1.23), recorded[7]);
}

TEST(MuDelay, BeforeFirstDelayUsesInitialValue) {
  CloudModel c;
  c.gamma = 0.16;
  GfcControllerState st(0.5, 0.7, 1.0);
  for (int k = 0; k < 3; ++k) gfc_mu_step(st, c, -4.0, 0.1);
  EXPECT_EQ(st.mu_at(0.3), 0.7);
}

TEST(ControllerKind, ParseAndPrint) {
  for (auto k : {ControllerKind::Gfc, ControllerKind::Olc, ControllerKind::DroopOnly}) {
    EXPECT_EQ(parse_controller_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_controller_kind("pid"), InvalidInput);
  EXPECT_EQ(parse_frequency_measurement(to_string(FrequencyMeasurement::Instant)), FrequencyMeasurement::Instant);
}

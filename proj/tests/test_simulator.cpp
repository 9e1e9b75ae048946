#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "geofc/equilibrium.hpp"
#include "geofc/errors.hpp"
#include "geofc/harness/reference.hpp"
#include "geofc/harness/report.hpp"
#include "geofc/simulator.hpp"
#include "support.hpp"

using namespace geofc;

namespace {

// The full reference run is shared by the tests that need it.
const Trajectory& reference_gfc_run() {
  static const Trajectory traj = run(build_reference_scenario(0));
  return traj;
}

Network two_bus_oscillator() {
  std::vector<Bus> buses(2);
  for (int i = 0; i < 2; ++i) {
    buses[i].id = i + 1;
    buses[i].D = 1.0;
    buses[i].M = 5.0;
  }
  return Network(buses, {{1, 2, 100.0}});
}

// Angle difference x = theta_1 - theta_2 of the linearised pair released
// from x0 at rest: x'' + (D/M) x' + (4 pi Y / M) x = 0.
double analytic_difference(double x0, double t) {
  const double D = 1.0;
  const double M = 5.0;
  const double Y = 100.0;
  const double sigma = D / (2.0 * M);
  const double wn2 = 4.0 * std::numbers::pi * Y / M;
  const double wd = std::sqrt(wn2 - sigma * sigma);
  return std::exp(-sigma * t) * x0 * (std::cos(wd * t) + sigma / wd * std::sin(wd * t));
}

// Largest deviation from the analytic solution over samples every 0.02 s.
// The end-point error alone can sit near a sign change and hide the order.
double max_error(double x0, double dt, double t_end) {
  auto net = two_bus_oscillator();
  GridState st{{x0 / 2.0, -x0 / 2.0}, {0.0, 0.0}};
  std::vector<double> p{0.0, 0.0};
  std::vector<double> loads{0.0, 0.0};
  const int n = static_cast<int>(std::llround(t_end / dt));
  const int every = static_cast<int>(std::llround(0.02 / dt));
  double worst = 0.0;
  for (int k = 1; k <= n; ++k) {
    st = rk4_step(net, p, st, loads, dt);
    if (k % every == 0) {
      worst = std::max(worst, std::abs(st.theta[0] - st.theta[1] - analytic_difference(x0, k * dt)));
    }
  }
  return worst;
}

}  // namespace

TEST(Disturbance, Examples) {
  auto sc = build_reference_scenario(0);
  auto p = sc.network.injections();
  auto before = p;
  apply_disturbance(sc.network, p, {5.0, 39, 0.0});
  EXPECT_EQ(p, before);

  double total_before = 0.0;
  for (double x : p) total_before += x;
  apply_disturbance(sc.network, p, {5.0, 39, -400.0});
  double total_after = 0.0;
  for (double x : p) total_after += x;
  EXPECT_NEAR(total_before - total_after, 400.0, 1e-9);

  auto q = before;
  apply_disturbance(sc.network, q, {1.0, 2, -30.0});
  apply_disturbance(sc.network, q, {2.0, 2, -20.0});
  const auto i2 = sc.network.require_index(2);
  EXPECT_DOUBLE_EQ(q[i2], before[i2] - 50.0);

  EXPECT_THROW(apply_disturbance(sc.network, q, {1.0, 99, -1.0}), InvalidInput);
}

TEST(Rk4, ZeroRightHandSideIsIdentity) {
  std::vector<Bus> buses(2);
  buses[0].id = 1;
  buses[1].id = 2;
  Network net(buses, {{1, 2, 10.0}});
  GridState st{{0.25, 0.25}, {0.0, 0.0}};
  std::vector<double> p{0.0, 0.0};
  std::vector<double> loads{0.0, 0.0};
  auto next = rk4_step(net, p, st, loads, 0.01);
  EXPECT_EQ(next.theta, st.theta);
  EXPECT_EQ(next.omega, st.omega);
}

TEST(Rk4, FourthOrderAgainstLinearisedOscillator) {
  // Small amplitude keeps sin x - x far below the integration error.
  const double x0 = 1e-4;
  std::vector<double> errors;
  for (double dt : {0.02, 0.01, 0.005}) errors.push_back(max_error(x0, dt, 2.0));
  EXPECT_GE(errors[0] / errors[1], 8.0) << errors[0] << " " << errors[1];
  EXPECT_GE(errors[1] / errors[2], 8.0) << errors[1] << " " << errors[2];
  EXPECT_LE(errors[2], 1e-4 * x0);
}

TEST(InitialState, IsAFixedPoint) {
  auto sc = build_reference_scenario(0);
  auto st = initial_state(sc.network, sc.cloud);
  auto p = sc.network.injections();
  auto loads = spread_loads(sc.network, sc.cloud, sc.cloud.nominal_loads());
  auto rhs = swing_rhs(sc.network, p, st, loads);
  for (double v : rhs.omega_dot) EXPECT_LE(std::abs(v), 1e-6);
}

TEST(Run, NoEventsStaysAtNominal) {
  auto sc = build_reference_scenario(0);
  sc.events.clear();
  sc.simulation.t_end = 3.0;
  auto traj = run(sc);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    for (double w : traj.states[k].omega) ASSERT_LE(std::abs(w), 1e-8);
    for (std::size_t j = 0; j < sc.cloud.size(); ++j) {
      ASSERT_NEAR(traj.loads[k][j], sc.cloud.datacenters[j].d_nom, 1e-6);
    }
  }
}

TEST(Run, SampleCount) {
  auto sc = build_reference_scenario(0);
  sc.simulation.t_end = 7.0;
  auto traj = run(sc);
  EXPECT_EQ(traj.size(), 701u);
  EXPECT_NEAR(traj.times.back(), 7.0, 1e-9);
  EXPECT_EQ(traj.last_event_time, 5.0);
}

TEST(Run, InvalidScenarioRejected) {
  auto sc = build_reference_scenario(0);
  sc.events.push_back({6.0, 99, -1.0});
  EXPECT_FALSE(validate_scenario(sc).empty());
  EXPECT_THROW(run(sc), ValidationError);
}

TEST(Run, UnbalancedStartRejected) {
  auto sc = build_reference_scenario(0);
  std::vector<Bus> buses = sc.network.buses();
  buses[0].p += 5.0;
  sc.network = Network(buses, sc.network.lines(), sc.network.f0());
  EXPECT_FALSE(validate_scenario(sc).empty());
}

TEST(Detection, ConstantWindowGivesSnapshot) {
  auto sc = build_reference_scenario(0);
  sc.events.clear();
  sc.simulation.t_end = 3.0;
  auto traj = run(sc);
  auto snap = detect_equilibrium(traj, sc.network, sc.cloud, 0, traj.size(), sc.detection);
  ASSERT_TRUE(snap.has_value());
  EXPECT_NEAR(snap->mean_omega(), 0.0, 1e-9);
}

TEST(Detection, TransientWindowGivesNothing) {
  auto sc = build_reference_scenario(0);
  const auto& traj = reference_gfc_run();
  std::size_t begin = 0;
  while (traj.times[begin] < 5.0 - 1e-9) ++begin;
  std::size_t end = begin;
  while (end < traj.size() && traj.times[end] <= 7.0 + 1e-9) ++end;
  EXPECT_FALSE(detect_equilibrium(traj, sc.network, sc.cloud, begin, end, sc.detection).has_value());
}

TEST(Detection, ClosedLoopMatchesOfflineSolution) {
  auto sc = build_reference_scenario(0);
  const auto& traj = reference_gfc_run();
  ASSERT_TRUE(traj.equilibrium.has_value());
  const auto& eq = *traj.equilibrium;
  EXPECT_LE(eq.omega_spread(), sc.detection.tol_sync);
  EXPECT_GE(eq.detected_at, traj.last_event_time);
  auto sol = solve_gfc(instance_after_events(sc));
  EXPECT_LE(equilibrium_gap(eq, sol), 1e-3);
}

TEST(Determinism, TwoRunsAreBitIdentical) {
  auto sc = build_reference_scenario(0);
  sc.simulation.t_end = 6.0;
  auto a = run(sc);
  auto b = run(sc);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    ASSERT_EQ(a.states[k].theta, b.states[k].theta);
    ASSERT_EQ(a.states[k].omega, b.states[k].omega);
    ASSERT_EQ(a.mu_series[k], b.mu_series[k]);
  }
}

TEST(StepSize, DetectedEquilibriumIsStepIndependent) {
  auto sc = geofc::testing::random_small_scenario(3, 3, 2);
  auto a = run(sc);
  sc.simulation.dt /= 2.0;
  auto b = run(sc);
  ASSERT_TRUE(a.equilibrium && b.equilibrium);
  EXPECT_LE(std::abs(a.equilibrium->mean_omega() - b.equilibrium->mean_omega()),
            1e-6 * std::max(1.0, std::abs(b.equilibrium->mean_omega())));
  EXPECT_LE(std::abs(a.equilibrium->mu - b.equilibrium->mu), 1e-6 * std::max(1.0, std::abs(b.equilibrium->mu)));
  for (std::size_t j = 0; j < a.equilibrium->d.size(); ++j) {
    EXPECT_LE(std::abs(a.equilibrium->d[j] - b.equilibrium->d[j]), 1e-6 * std::abs(b.equilibrium->d[j]));
  }
}

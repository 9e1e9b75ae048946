#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "geofc/equilibrium.hpp"
#include "geofc/errors.hpp"
#include "geofc/harness/reference.hpp"
#include "geofc/harness/report.hpp"
#include "support.hpp"

using namespace geofc;
using geofc::testing::grid_minimize;
using geofc::testing::oracle_fleet_cost;
using geofc::testing::oracle_gfc_objective;

namespace {

// One datacenter (a = 1, eta = 1, nominal 0, bounds [-10, 10]) with
// g = s^2/2 on the shortfall side and b = 0; two buses with total
// sensitivity 20 MW/Hz, alpha = 1 and a 10 MW loss.
GfcInstance toy_instance() {
  std::vector<Bus> buses(2);
  buses[0].id = 1;
  buses[0].D = 5.0;
  buses[0].droop_gain = 5.0;
  buses[0].datacenter = 1;
  buses[1].id = 2;
  buses[1].D = 4.0;
  buses[1].droop_gain = 6.0;
  buses[1].p = -10.0;
  CloudModel cloud;
  cloud.gamma = 1.0;
  cloud.epsilon = 0.0;
  cloud.W = 10.0;  // b = W + a d_min = 0
  cloud.datacenters = {{1, 1, 1.0, -10.0, 10.0, 0.0, 1.0}};
  return GfcInstance::from(Network(buses, {{1, 2, 50.0}}), cloud, 1.0);
}

CloudModel motivating(double gamma_cost_convention) {
  // Costs are gamma' ((-s)^+)^2 / 2 with gamma' = 2 gamma for the
  // gamma ((-s)^+)^2 convention of the two-datacenter story.
  CloudModel c;
  c.W = 28.0;
  c.gamma = 2.0 * gamma_cost_convention;
  c.epsilon = 0.0;
  c.datacenters = {{1, 1, 0.9, 0.0, 40.0, 20.0, 2.0}, {2, 2, 0.5, 0.0, 40.0, 20.0, 2.0}};
  return c;
}

GfcInstance reference_instance() { return instance_after_events(build_reference_scenario(0)); }

}  // namespace

TEST(SolveGfc, ZeroDisturbanceIsNominal) {
  auto sc = build_reference_scenario(0);
  auto inst = GfcInstance::from(sc.network, sc.cloud, sc.controller.alpha);
  auto sol = solve_gfc(inst);
  for (std::size_t j = 0; j < sol.d.size(); ++j) EXPECT_NEAR(sol.d[j], sc.cloud.datacenters[j].d_nom, 1e-8);
  EXPECT_NEAR(sol.omega, 0.0, 1e-10);
  EXPECT_NEAR(sol.mu, 0.0, 1e-8);
  EXPECT_NEAR(sol.objective, 0.0, 1e-10);
}

TEST(SolveGfc, ToyInstanceClosedForm) {
  auto sol = solve_gfc(toy_instance());
  // lambda = omega, d = lambda - mu, mu = s = d, balance -10 = 20 omega + d.
  EXPECT_NEAR(sol.omega, -400.0 / 820.0, 1e-9);
  EXPECT_NEAR(sol.d[0], -200.0 / 820.0, 1e-9);
  EXPECT_NEAR(sol.mu, -200.0 / 820.0, 1e-9);
  EXPECT_NEAR(sol.s, -200.0 / 820.0, 1e-9);
  EXPECT_NEAR(sol.lambda, sol.omega, 1e-12);
}

TEST(SolveGfc, ToyInstanceGridOracle) {
  auto inst = toy_instance();
  // Two free coordinates (d, omega) with balance as a penalty-free
  // constraint: omega is eliminated, so search d and compare omega too.
  auto best = grid_minimize([&](const std::vector<double>& d) { return oracle_gfc_objective(inst, d); }, {-10.0},
                            {10.0}, 1e-4);
  auto sol = solve_gfc(inst);
  EXPECT_NEAR(sol.d[0], best.x[0], 1e-4);
  EXPECT_NEAR(sol.omega, (-10.0 - best.x[0]) / 20.0, 1e-5);
}

TEST(SolveGfc, ReferenceSatisfiesKkt) {
  auto inst = reference_instance();
  auto sol = solve_gfc(inst);
  auto r = kkt_residuals(inst, sol);
  EXPECT_LE(r.scaled_max, 1e-9);
  for (std::size_t j = 0; j < sol.d.size(); ++j) {
    EXPECT_GE(sol.d[j], inst.cloud.datacenters[j].d_min);
    EXPECT_LE(sol.d[j], inst.cloud.datacenters[j].d_max);
    EXPECT_GE(sol.kappa_lo[j], 0.0);
    EXPECT_GE(sol.kappa_hi[j], 0.0);
  }
  EXPECT_NEAR(sol.lambda, inst.alpha * sol.omega, 1e-12);
}

TEST(SolveGfc, KktPerturbationSensitivity) {
  auto inst = reference_instance();
  auto sol = solve_gfc(inst);
  // Pick a datacenter strictly inside its bounds.
  std::size_t j = 0;
  while (j < sol.d.size() && (sol.d[j] <= inst.cloud.datacenters[j].d_min + 1e-6 ||
                              sol.d[j] >= inst.cloud.datacenters[j].d_max - 1.0)) {
    ++j;
  }
  ASSERT_LT(j, sol.d.size());
  auto base = kkt_residuals(inst, sol);
  auto moved = sol;
  moved.d[j] += 1.0;
  auto r = kkt_residuals(inst, moved);
  const auto& dc = inst.cloud.datacenters[j];
  EXPECT_NEAR(r.primal_s - base.primal_s, dc.a, 1e-9);
  EXPECT_NEAR(r.stationarity_d[j] - base.stationarity_d[j], dc.eta, 1e-9);
}

TEST(SolveGfc, OlcEquilibriumIsNotOptimal) {
  auto inst = reference_instance();
  auto olc = solve_policy_equilibrium(inst, ControllerKind::Olc);
  assign_bound_multipliers(inst.cloud, olc);
  // With its own mu = 0 the load blocks hold and the shortfall price fails.
  auto r = kkt_residuals(inst, olc);
  EXPECT_GT(std::abs(r.stationarity_s), 1e-3);
  // Pricing the shortfall correctly instead breaks the load blocks.
  auto priced = olc;
  priced.mu = interdep_marginal(inst.cloud, olc.s);
  assign_bound_multipliers(inst.cloud, priced);
  auto q = kkt_residuals(inst, priced);
  EXPECT_NEAR(q.stationarity_s, 0.0, 1e-12);
  double worst_d = 0.0;
  for (double v : q.stationarity_d) worst_d = std::max(worst_d, std::abs(v));
  EXPECT_GT(worst_d, 1e-3);
}

TEST(SolveGfc, UniqueAcrossBrackets) {
  auto inst = reference_instance();
  auto a = solve_gfc(inst);
  SolveOptions wide;
  wide.mu_bracket = std::make_pair(-1000.0, 1000.0);
  auto b = solve_gfc(inst, wide);
  EXPECT_NEAR(a.mu, b.mu, 1e-8);
  EXPECT_NEAR(a.omega, b.omega, 1e-10);
}

TEST(SolveGfc, RandomSmallInstancesMatchGridSearch) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const int n_dc = 1 + static_cast<int>(seed % 3);
    auto sc = geofc::testing::random_small_scenario(seed, 3, n_dc);
    auto inst = instance_after_events(sc);
    std::vector<double> lo;
    std::vector<double> hi;
    for (const auto& dc : inst.cloud.datacenters) {
      lo.push_back(dc.d_min);
      hi.push_back(dc.d_max);
    }
    auto best = grid_minimize([&](const std::vector<double>& d) { return oracle_gfc_objective(inst, d); }, lo, hi,
                              1e-3);
    auto sol = solve_gfc(inst);
    for (int j = 0; j < n_dc; ++j) EXPECT_NEAR(sol.d[j], best.x[j], 2e-3) << "seed " << seed << " dc " << j;
    EXPECT_LE(sol.objective, best.value + 1e-9) << "seed " << seed;
  }
}

TEST(PolicyEquilibrium, DroopOnlyAndOlc) {
  auto inst = reference_instance();
  auto droop = solve_policy_equilibrium(inst, ControllerKind::DroopOnly);
  double dnom = 0.0;
  for (const auto& dc : inst.cloud.datacenters) dnom += dc.d_nom;
  EXPECT_NEAR(droop.omega, (inst.p_total - dnom) / inst.network.total_sensitivity(), 1e-12);
  for (std::size_t j = 0; j < droop.d.size(); ++j) EXPECT_EQ(droop.d[j], inst.cloud.datacenters[j].d_nom);

  auto olc = solve_policy_equilibrium(inst, ControllerKind::Olc);
  EXPECT_EQ(olc.mu, 0.0);
  for (std::size_t j = 0; j < olc.d.size(); ++j) {
    EXPECT_NEAR(olc.d[j], olc_load_command(inst.cloud.datacenters[j], olc.omega, inst.alpha), 1e-9);
  }
}

TEST(FixedReduction, IndependentOnlySplitsEvenly) {
  auto c = motivating(0.0);
  auto r = solve_fixed_reduction(c, -10.0);
  EXPECT_NEAR(r.d[0] - 20.0, -5.0, 1e-9);
  EXPECT_NEAR(r.d[1] - 20.0, -5.0, 1e-9);
}

TEST(FixedReduction, InterdependentCostShiftsToEfficientSite) {
  auto c = motivating(10.0);
  auto r = solve_fixed_reduction(c, -10.0);
  auto oracle = grid_minimize(
      [&](const std::vector<double>& x) { return oracle_fleet_cost(c, {x[0], 30.0 - x[0]}); }, {0.0}, {30.0}, 1e-3);
  EXPECT_NEAR(r.d[0], oracle.x[0], 1e-3);
  EXPECT_NEAR(r.d[0], 22.778, 1e-3);
  EXPECT_NEAR(r.d[1], 7.222, 1e-3);
  EXPECT_NEAR(r.total, 322.2, 0.05);
  EXPECT_NEAR(oracle_fleet_cost(c, {15.0, 15.0}), 540.0, 1e-9);
}

TEST(FixedReduction, InfeasibleRequest) {
  auto c = motivating(10.0);
  EXPECT_THROW(solve_fixed_reduction(c, -41.0), InvalidInput);
  EXPECT_THROW(solve_fixed_reduction(c, 41.0), InvalidInput);
}

TEST(FixedReduction, ThreeSitesMatchGridSearch) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 4; ++trial) {
    CloudModel c;
    c.gamma = 0.1 + U(rng);
    c.epsilon = 1e-6;
    for (int j = 0; j < 3; ++j) {
      Datacenter dc{j + 1, j + 1, 0.4 + 0.5 * U(rng), 10.0, 30.0, 20.0 + 5.0 * U(rng), 0.05 + 0.5 * U(rng)};
      c.W += dc.a * (dc.d_nom - dc.d_min);
      c.datacenters.push_back(dc);
    }
    const double delta = -5.0 - 10.0 * U(rng);
    double nominal = 0.0;
    for (const auto& dc : c.datacenters) nominal += dc.d_nom;
    const double target = nominal + delta;
    auto r = solve_fixed_reduction(c, delta);
    // Eliminate the third load through the equality constraint.
    auto oracle = grid_minimize(
        [&](const std::vector<double>& x) {
          const double d3 = target - x[0] - x[1];
          if (d3 < 10.0 || d3 > 30.0) return 1e300;
          return oracle_fleet_cost(c, {x[0], x[1], d3});
        },
        {10.0, 10.0}, {30.0, 30.0}, 1e-3);
    EXPECT_NEAR(r.d[0], oracle.x[0], 2e-3);
    EXPECT_NEAR(r.d[1], oracle.x[1], 2e-3);
    EXPECT_LE(r.total, oracle.value + 1e-9);
  }
}

TEST(LowerBound, ZeroDisturbance) {
  auto sc = build_reference_scenario(0);
  auto inst = GfcInstance::from(sc.network, sc.cloud, sc.controller.alpha);
  EXPECT_NEAR(lower_bound_cost(inst), 0.0, 1e-9);
}

TEST(LowerBound, NoFeasiblePointOfTheUndampedProblemIsCheaper) {
  auto inst = reference_instance();
  const double lb = lower_bound_cost(inst);
  // Same instance with D zeroed, evaluated at random feasible loads.
  std::vector<Bus> buses = inst.network.buses();
  for (auto& b : buses) b.D = 0.0;
  GfcInstance undamped = inst;
  undamped.network = Network(buses, inst.network.lines(), inst.network.f0());
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> d;
    for (const auto& dc : inst.cloud.datacenters) {
      d.push_back(std::uniform_real_distribution<double>(dc.d_min, dc.d_max)(rng));
    }
    EXPECT_LE(lb, oracle_gfc_objective(undamped, d) + 1e-9);
  }
  auto gfc = solve_gfc(inst);
  EXPECT_LE(lb, oracle_gfc_objective(undamped, gfc.d) + 1e-9);
}

#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "geofc/cloud.hpp"
#include "geofc/controllers.hpp"
#include "geofc/grid.hpp"

namespace geofc {

/// Steady-state problem data: minimise g(s) + sum c_j(d_j) + alpha * sum (D+droop)/2 w^2
/// subject to the excess-compute definition, power balance and load bounds.
struct GfcInstance {
  Network network;
  CloudModel cloud;
  double alpha = 75.0;
  double p_total = 0.0;  ///< sum of frequency-insensitive injections after the disturbance

  /// Instance with p_total taken from the network's own injections.
  static GfcInstance from(Network network, CloudModel cloud, double alpha);
};

struct EquilibriumSolution {
  std::vector<double> d;
  double s = 0.0;
  double omega = 0.0;   ///< synchronised frequency deviation (Hz)
  double mu = 0.0;      ///< $/MW
  double lambda = 0.0;  ///< $/MW, equals alpha * omega
  std::vector<double> kappa_lo;
  std::vector<double> kappa_hi;
  double objective = 0.0;
  double kkt_residual_max = 0.0;
  /// Per-bus frequencies when the point comes from a simulation; empty means
  /// every bus sits at `omega`.
  std::vector<double> bus_omega;
};

/// One entry per optimality condition block.
struct KktResiduals {
  double stationarity_s = 0.0;               ///< g'(s) - mu
  std::vector<double> stationarity_d;        ///< c'_j + mu a_j - lambda - kappa_lo + kappa_hi
  std::vector<double> stationarity_omega;    ///< omega_j - lambda/alpha, per bus
  std::vector<double> slackness_lo;          ///< kappa_lo (d_min - d)
  std::vector<double> slackness_hi;          ///< kappa_hi (d - d_max)
  std::vector<double> dual_lo;               ///< (-kappa_lo)^+
  std::vector<double> dual_hi;               ///< (-kappa_hi)^+
  double primal_s = 0.0;                     ///< sum a d - b - s
  double power_balance = 0.0;                ///< sum (p - (D+droop) w) - sum d
  std::vector<double> bound_lo;              ///< (d_min - d)^+
  std::vector<double> bound_hi;              ///< (d - d_max)^+

  /// Largest residual after dividing each block by its natural scale
  /// (prices by 1 + |lambda| + |mu| max a, powers by 1 + sum |p|, ...).
  double scaled_max = 0.0;
};

struct SolveOptions {
  double tol = 1e-10;
  int max_iter = 200;
  double omega_lo = -10.0;
  double omega_hi = 10.0;
  /// Overrides the default mu bracket (used to probe uniqueness).
  std::optional<std::pair<double, double>> mu_bracket;
};

/// Unique minimiser via nested monotone bisection: outer on mu, inner on the
/// synchronised frequency that balances power for that mu.
EquilibriumSolution solve_gfc(const GfcInstance& instance, const SolveOptions& options = {});

/// Equilibrium reached by a fixed-policy controller: OLC (mu pinned at 0) or
/// droop-only (loads at nominal). GFC forwards to solve_gfc.
EquilibriumSolution solve_policy_equilibrium(const GfcInstance& instance, ControllerKind kind,
                                             const SolveOptions& options = {});

/// Residual of every optimality block for `candidate`. The candidate's
/// kappa vectors are used as given.
KktResiduals kkt_residuals(const GfcInstance& instance, const EquilibriumSolution& candidate);

/// Fills kappa_lo/kappa_hi from the projection structure of the load law:
/// kappa_lo = [c'(d_min) - (lambda - a mu)]^+, kappa_hi = [(lambda - a mu) - c'(d_max)]^+.
void assign_bound_multipliers(const CloudModel& cloud, EquilibriumSolution& candidate);

/// Objective value (alpha-weighted) of a synchronised point.
double gfc_objective(const GfcInstance& instance, const std::vector<double>& d, double omega);

struct FixedReductionResult {
  std::vector<double> d;
  double s = 0.0;
  double mu = 0.0;
  double nu = 0.0;  ///< multiplier of the aggregate-reduction constraint
  double interdependent = 0.0;
  double independent = 0.0;
  double total = 0.0;
};

/// Cheapest way for the fleet to change its aggregate consumption by
/// `delta_total` MW relative to nominal: minimise g(s(d)) + sum c_j(d_j)
/// with sum (d_j - d_nom_j) = delta_total and box bounds.
FixedReductionResult solve_fixed_reduction(const CloudModel& cloud, double delta_total, double tol = 1e-12);

/// Offline optimum with every D_j zeroed (droop retained).
EquilibriumSolution lower_bound(const GfcInstance& instance, const SolveOptions& options = {});
/// Objective of lower_bound().
double lower_bound_cost(const GfcInstance& instance, const SolveOptions& options = {});

}  // namespace geofc

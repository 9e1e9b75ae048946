#pragma once

#include <span>
#include <vector>

#include "geofc/cloud.hpp"
#include "geofc/grid.hpp"
#include "geofc/trajectory.hpp"

namespace geofc {

/// Cost rate ($/s) of an operating point:
///   interdependent  (gamma/2) * ((-sum a_j delta_j)^+)^2 (+ epsilon term)
///   independent     (eta_j/2) * delta_j^2 per datacenter
///   frequency       alpha * sum_j (D_j + droop_j)/2 * omega_j^2
/// with delta_j = d_j - d_nom_j. The interdependent term is evaluated
/// through g(s), so it matches the shortfall form whenever the nominal
/// point has s = 0.
CostBreakdown objective_cost(const Network& network, const CloudModel& cloud, double alpha,
                             std::span<const double> omega, std::span<const double> loads);

/// Anchor for the energy function: a closed-loop equilibrium plus the gains
/// that weight its parts.
struct LyapunovConfig {
  EquilibriumSnapshot reference;
  double beta = 0.5;   ///< mu integrator gain; V1 is dropped when mu is not a state
  double alpha = 1.0;  ///< $/MW-Hz weight applied to the kinetic and potential parts
  bool include_mu = true;
};

/// Closed form of  integral_{ref}^{x} Y (sin u - sin ref) du.
double line_potential(double Y, double x, double ref);

/// V1 = (mu - mu*)^2 / (2 beta)
/// V2 = (alpha/2) sum_j M_j (omega_j - omega*)^2
/// V3 = (alpha/2pi) sum_lines line_potential(Y, theta_ij, theta*_ij)
LyapunovValues lyapunov_energy(const GridState& state, double mu, const LyapunovConfig& config,
                               const Network& network);

/// dV/dt of the closed loop under the continuous control law, evaluated in
/// closed form from the state (no differencing):
///   -sum_j ((alpha w_j - a_j mu) - (alpha w* - a_j mu*)) (d_j - d*_j)
///   -(mu - mu*) ((g')^{-1}(mu) - (g')^{-1}(mu*))
///   -alpha sum_j (D_j + droop_j)(w_j - w*)^2
/// `loads` are the per-datacenter commands at this state.
double lyapunov_derivative(const GridState& state, double mu, std::span<const double> loads,
                           const LyapunovConfig& config, const Network& network, const CloudModel& cloud);

/// True when every line angle difference is strictly inside (-pi/2, pi/2).
bool within_angle_neighborhood(const Network& network, std::span<const double> theta);

/// Fills traj.lyapunov_series against `config`.
void attach_lyapunov_series(Trajectory& traj, const LyapunovConfig& config, const Network& network);

/// Sample times t_k (k >= first index at/after `from_time`) where
/// V(t_{k+1}) - V(t_k) > slack * (t_{k+1} - t_k), skipping pairs outside
/// the angle neighbourhood. Requires traj.lyapunov_series to be filled.
std::vector<double> lyapunov_decrease_check(const Trajectory& traj, const Network& network, double slack,
                                            double from_time = 0.0);

/// Builds the config anchored at the trajectory's detected equilibrium.
/// Throws InvalidInput when no equilibrium was detected.
LyapunovConfig lyapunov_config_for(const Trajectory& traj, double beta, double alpha, bool include_mu);

/// 100 * (1 - cost(a)/cost(b)) over the datacenter part of the equilibrium
/// cost of each trajectory.
double cost_savings(const Trajectory& a, const Trajectory& b, const CloudModel& cloud);
double cost_savings(double dc_cost_a, double dc_cost_b);

}  // namespace geofc

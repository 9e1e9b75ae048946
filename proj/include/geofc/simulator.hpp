#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geofc/cloud.hpp"
#include "geofc/controllers.hpp"
#include "geofc/grid.hpp"
#include "geofc/trajectory.hpp"

namespace geofc {

/// Step change of a bus's frequency-insensitive injection.
struct DisturbanceEvent {
  double time = 0.0;  ///< s
  int bus = 0;
  double delta_p = 0.0;  ///< MW
};

struct SimulationConfig {
  double dt = 1e-3;
  double t_end = 30.0;
  double record_every = 1e-2;
};

/// Thresholds for calling a window of samples an equilibrium.
struct DetectionConfig {
  double tol_omega_dot = 1e-4;  ///< Hz/s
  double tol_sync = 1e-4;       ///< Hz
  double tol_mu_dot = 1e-6;     ///< $/MW/s
  double tol_d_dot = 1e-2;      ///< MW/s
  double window = 2.0;          ///< s
};

struct Scenario {
  Network network;
  CloudModel cloud;
  ControllerConfig controller;
  std::vector<DisturbanceEvent> events;
  SimulationConfig simulation;
  DetectionConfig detection;
};

/// Every violated scenario invariant (network, cloud, cross references,
/// timing, pre-event balance). Empty iff `run` may be called.
std::vector<std::string> validate_scenario(const Scenario& scenario);

/// p_bus += delta_p. Throws InvalidInput for an unknown bus.
void apply_disturbance(const Network& network, std::vector<double>& p, const DisturbanceEvent& event);

/// Classical RK4 step of the swing dynamics with `bus_loads` and `p` frozen.
GridState rk4_step(const Network& network, std::span<const double> p, const GridState& state,
                   std::span<const double> bus_loads, double dt);

/// Per-bus load vector from per-datacenter loads.
std::vector<double> spread_loads(const Network& network, const CloudModel& cloud, std::span<const double> loads);

/// Pre-event operating point: omega = 0, d = d_nom, angles from the power
/// flow of p - d_nom (zero when every injection is already zero).
GridState initial_state(const Network& network, const CloudModel& cloud);

/// Checks the Definition-style equilibrium conditions on samples
/// [begin, end) by finite differences between consecutive samples and
/// returns a snapshot of the last sample when they all hold.
std::optional<EquilibriumSnapshot> detect_equilibrium(const Trajectory& traj, const Network& network,
                                                      const CloudModel& cloud, std::size_t begin,
                                                      std::size_t end, const DetectionConfig& tol);

/// Longest settled tail of the trajectory that starts at or after the last
/// event and spans at least tol.window. detected_at is the start of the
/// tail; the snapshot values come from the final sample.
std::optional<EquilibriumSnapshot> find_settled_equilibrium(const Trajectory& traj, const Network& network,
                                                            const CloudModel& cloud, const DetectionConfig& tol);

/// Integrates the closed loop and fills the trajectory (everything except
/// lyapunov_series). Throws ValidationError for an invalid scenario and
/// SolverError when the state stops being finite.
Trajectory run(const Scenario& scenario);

}  // namespace geofc

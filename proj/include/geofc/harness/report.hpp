#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "geofc/equilibrium.hpp"
#include "geofc/simulator.hpp"

namespace geofc {

struct BaselineComparison {
  ControllerKind kind = ControllerKind::Olc;
  bool settled = false;
  double omega = 0.0;
  double datacenter_cost = 0.0;
  std::optional<double> savings_percent;  ///< of this run relative to the baseline; unset if the baseline cost is ~0
};

struct RunReport {
  std::string digest;
  ControllerKind kind = ControllerKind::Gfc;
  std::optional<EquilibriumSnapshot> equilibrium;
  std::optional<CostBreakdown> cost;       ///< at the detected equilibrium
  std::optional<double> convergence_time;  ///< s from the last event to detection
  std::vector<double> lyapunov_violations;
  double lyapunov_slack = 1e-3;
  /// Offline equilibrium of the same controller, and the largest relative
  /// gap to the detected one over (d, omega, mu, s).
  std::optional<EquilibriumSolution> solver;
  std::optional<double> solver_gap;
  std::optional<double> solver_kkt;  ///< KKT residual of the detected point
  std::vector<BaselineComparison> baselines;
  std::string scenario_text;  ///< fully resolved parameters
};

struct RunResult {
  Trajectory trajectory;
  RunReport report;
};

/// Instance matching the scenario's injections after every event.
GfcInstance instance_after_events(const Scenario& scenario);

/// Largest relative difference |x - y| / max(1, |y|) over d, omega, mu, s.
double equilibrium_gap(const EquilibriumSnapshot& detected, const EquilibriumSolution& solved);

/// KKT residuals of a detected equilibrium for the scenario's instance,
/// with the bound multipliers taken from the projection structure.
KktResiduals snapshot_kkt(const Scenario& scenario, const EquilibriumSnapshot& snap);

/// Datacenter part (interdependent + independent) of the cost of `loads`.
double datacenter_cost(const CloudModel& cloud, const std::vector<double>& loads);

/// Runs the scenario, anchors the energy function at the detected
/// equilibrium and fills the report. Baseline controllers listed in
/// `baselines` are run on the same scenario for comparison.
RunResult run_with_report(const Scenario& scenario, const std::vector<ControllerKind>& baselines = {});

void write_trajectory_csv(const Trajectory& traj, const Network& network, const CloudModel& cloud,
                          std::ostream& out);
void write_trajectory_csv(const Trajectory& traj, const Network& network, const CloudModel& cloud,
                          const std::filesystem::path& path);

std::string report_to_text(const RunReport& report);
void write_report(const RunReport& report, const std::filesystem::path& path);

/// Fields of a written report needed by `compare`.
struct ReportSummary {
  std::string digest;
  std::string controller;
  bool settled = false;
  double omega = 0.0;
  double mu = 0.0;
  double s = 0.0;
  double datacenter_cost = 0.0;
  double total_cost = 0.0;
  std::optional<double> convergence_time;
};
ReportSummary read_report(const std::filesystem::path& path);

/// Shortest round-trip decimal form, identical on every run.
std::string format_double(double x);

}  // namespace geofc

#pragma once

#include <array>
#include <optional>
#include <vector>

#include "geofc/cloud.hpp"
#include "geofc/grid.hpp"

namespace geofc {

/// Closed-loop equilibrium captured from a trajectory.
struct EquilibriumSnapshot {
  std::vector<double> theta;  ///< rad per bus
  std::vector<double> omega;  ///< Hz per bus
  std::vector<double> P;      ///< MW per bus (net injection incl. loads)
  std::vector<double> d;      ///< MW per datacenter
  double s = 0.0;
  double mu = 0.0;
  double detected_at = 0.0;   ///< s; start of the settled tail
  double sampled_at = 0.0;    ///< s; time the values were taken

  double mean_omega() const;
  double omega_spread() const;  ///< max_j |omega_j - mean|
};

struct LyapunovValues {
  double V1 = 0.0;
  double V2 = 0.0;
  double V3 = 0.0;
  double total() const { return V1 + V2 + V3; }
};

/// Recorded time series of one simulation run. All series share the
/// length of `times`; `lyapunov_series` is empty until metrics fills it.
struct Trajectory {
  std::vector<double> times;
  std::vector<GridState> states;
  std::vector<std::vector<double>> loads;  ///< per sample, one entry per datacenter
  std::vector<double> s_series;
  std::vector<double> mu_series;
  std::vector<CostBreakdown> cost_series;
  std::vector<LyapunovValues> lyapunov_series;
  std::optional<EquilibriumSnapshot> equilibrium;

  /// Injection vector in force at the end of the run (after all events).
  std::vector<double> final_injections;
  /// Time of the last disturbance event, 0 when there is none.
  double last_event_time = 0.0;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
};

}  // namespace geofc

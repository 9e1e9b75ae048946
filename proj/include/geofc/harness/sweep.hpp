#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "geofc/harness/scenario_io.hpp"

namespace geofc {

/// Parameter paths accepted by apply_sweep_value:
///   delta_p           every event's delta_p (MW)
///   gamma             cloud.gamma
///   flexibility       X in percent: d_min = d_nom * (1 - X/100), workload
///                     re-derived so s = 0 at nominal
///   alpha             costs.alpha
///   delay             controller.delay (s)
///   beta, action_period, epsilon
/// Long forms such as "cloud.gamma" or "controller.delay" are accepted too.
const std::vector<std::string>& sweep_parameters();

/// Copy of `base` with one parameter set. Throws InvalidInput for an
/// unknown path or a value that breaks the scenario.
Scenario apply_sweep_value(const Scenario& base, const std::string& parameter, double value);

struct SweepRow {
  double value = 0.0;
  ControllerKind kind = ControllerKind::Gfc;
  bool ok = false;
  std::string error;
  double omega = 0.0;
  double mu = 0.0;
  double convergence_time = 0.0;
  double interdependent = 0.0;
  double independent = 0.0;
  double datacenter_cost = 0.0;
  double total_cost = 0.0;
};

struct SweepResult {
  std::string parameter;
  std::vector<SweepRow> rows;  ///< value-major, controllers in the order requested
  const SweepRow* find(double value, ControllerKind kind) const;
};

/// One independent run per (value, controller). Failures are recorded in
/// the row and the sweep continues. `jobs` > 1 runs values on worker
/// threads; results do not depend on it.
SweepResult run_sweep(const Scenario& base, const SweepSpec& spec, const std::vector<ControllerKind>& kinds,
                      unsigned jobs = 1);

void write_sweep_csv(const SweepResult& result, std::ostream& out);
void write_sweep_csv(const SweepResult& result, const std::filesystem::path& path);

}  // namespace geofc

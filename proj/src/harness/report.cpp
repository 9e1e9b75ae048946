#include "geofc/harness/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "geofc/errors.hpp"
#include "geofc/harness/scenario_io.hpp"
#include "geofc/metrics.hpp"

namespace geofc {

using nlohmann::json;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

GfcInstance instance_after_events(const Scenario& sc) {
  auto inst = GfcInstance::from(sc.network, sc.cloud, sc.controller.alpha);
  for (const auto& ev : sc.events) inst.p_total += ev.delta_p;
  return inst;
}

double equilibrium_gap(const EquilibriumSnapshot& detected, const EquilibriumSolution& solved) {
  auto rel = [](double x, double y) { return std::abs(x - y) / std::max(1.0, std::abs(y)); };
  double gap = std::max({rel(detected.mean_omega(), solved.omega), rel(detected.mu, solved.mu), rel(detected.s, solved.s)});
  for (std::size_t j = 0; j < solved.d.size() && j < detected.d.size(); ++j) gap = std::max(gap, rel(detected.d[j], solved.d[j]));
  return gap;
}

KktResiduals snapshot_kkt(const Scenario& sc, const EquilibriumSnapshot& snap) {
  auto inst = instance_after_events(sc);
  EquilibriumSolution cand;
  cand.d = snap.d;
  cand.s = snap.s;
  cand.omega = snap.mean_omega();
  cand.bus_omega = snap.omega;
  cand.mu = snap.mu;
  cand.lambda = sc.controller.alpha * cand.omega;
  assign_bound_multipliers(sc.cloud, cand);
  return kkt_residuals(inst, cand);
}

double datacenter_cost(const CloudModel& cloud, const std::vector<double>& loads) {
  double cost = interdep_cost(cloud, excess_compute(cloud, loads));
  for (std::size_t j = 0; j < cloud.size(); ++j) cost += indep_cost(cloud.datacenters[j], loads[j]);
  return cost;
}

RunResult run_with_report(const Scenario& sc, const std::vector<ControllerKind>& baselines) {
  RunResult out;
  out.trajectory = run(sc);
  auto& traj = out.trajectory;
  auto& rep = out.report;
  rep.digest = scenario_digest(sc);
  rep.kind = sc.controller.kind;
  rep.scenario_text = scenario_to_text(sc);
  rep.equilibrium = traj.equilibrium;
  const bool has_mu = sc.controller.kind == ControllerKind::Gfc;

  if (traj.equilibrium) {
    const auto& eq = *traj.equilibrium;
    rep.convergence_time = eq.detected_at - traj.last_event_time;
    rep.cost = objective_cost(sc.network, sc.cloud, sc.controller.alpha, eq.omega, eq.d);
    auto config = lyapunov_config_for(traj, sc.controller.beta, sc.controller.alpha, has_mu);
    attach_lyapunov_series(traj, config, sc.network);
    rep.lyapunov_violations = lyapunov_decrease_check(traj, sc.network, rep.lyapunov_slack, traj.last_event_time);
    rep.solver_kkt = snapshot_kkt(sc, eq).scaled_max;
  }
  try {
    rep.solver = solve_policy_equilibrium(instance_after_events(sc), sc.controller.kind);
    if (traj.equilibrium) rep.solver_gap = equilibrium_gap(*traj.equilibrium, *rep.solver);
  } catch (const Error&) {
    rep.solver.reset();
  }

  for (auto kind : baselines) {
    Scenario other = sc;
    other.controller.kind = kind;
    auto traj_b = run(other);
    BaselineComparison cmp;
    cmp.kind = kind;
    cmp.settled = traj_b.equilibrium.has_value();
    if (cmp.settled) {
      cmp.omega = traj_b.equilibrium->mean_omega();
      cmp.datacenter_cost = datacenter_cost(sc.cloud, traj_b.equilibrium->d);
      if (traj.equilibrium) {
        const double own = datacenter_cost(sc.cloud, traj.equilibrium->d);
        // Droop-only keeps loads at nominal, so its cost is zero up to rounding.
        if (cmp.datacenter_cost > 1e-12 * std::max(1.0, own)) {
          cmp.savings_percent = cost_savings(own, cmp.datacenter_cost);
        }
      }
    }
    rep.baselines.push_back(cmp);
  }
  return out;
}

void write_trajectory_csv(const Trajectory& traj, const Network& network, const CloudModel& cloud,
                          std::ostream& out) {
  out << "t";
  for (const auto& b : network.buses()) out << ",omega_" << b.id;
  for (const auto& b : network.buses()) out << ",theta_" << b.id;
  for (const auto& dc : cloud.datacenters) out << ",d_" << dc.id;
  out << ",s,mu,cost_interdep,cost_indep_total,cost_freq,V1,V2,V3\n";
  const bool has_v = traj.lyapunov_series.size() == traj.size();
  std::string line;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    line = format_double(traj.times[k]);
    auto put = [&line](double x) {
      line += ',';
      line += format_double(x);
    };
    for (double w : traj.states[k].omega) put(w);
    for (double th : traj.states[k].theta) put(th);
    for (double d : traj.loads[k]) put(d);
    put(traj.s_series[k]);
    put(traj.mu_series[k]);
    const auto& c = traj.cost_series[k];
    put(c.interdependent);
    put(c.independent());
    put(c.frequency);
    if (has_v) {
      put(traj.lyapunov_series[k].V1);
      put(traj.lyapunov_series[k].V2);
      put(traj.lyapunov_series[k].V3);
    } else {
      line += ",nan,nan,nan";
    }
    line += '\n';
    out << line;
  }
}

void write_trajectory_csv(const Trajectory& traj, const Network& network, const CloudModel& cloud,
                          const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_trajectory_csv(traj, network, cloud, out);
  if (!out) throw Error("write failed for " + path.string());
}

namespace {

json cost_json(const CostBreakdown& c) {
  return {{"interdependent", c.interdependent},
          {"independent", c.independent_per_dc},
          {"independent_total", c.independent()},
          {"frequency", c.frequency},
          {"datacenter", c.datacenter()},
          {"total", c.total}};
}

}  // namespace

std::string report_to_text(const RunReport& rep) {
  json doc;
  doc["digest"] = rep.digest;
  doc["controller"] = std::string(to_string(rep.kind));
  if (rep.equilibrium) {
    const auto& e = *rep.equilibrium;
    doc["equilibrium"] = {{"detected_at", e.detected_at},
                          {"sampled_at", e.sampled_at},
                          {"omega_mean", e.mean_omega()},
                          {"omega_spread", e.omega_spread()},
                          {"omega", e.omega},
                          {"theta", e.theta},
                          {"P", e.P},
                          {"d", e.d},
                          {"s", e.s},
                          {"mu", e.mu}};
  } else {
    doc["equilibrium"] = nullptr;
  }
  doc["cost"] = rep.cost ? cost_json(*rep.cost) : json(nullptr);
  doc["convergence_time"] = rep.convergence_time ? json(*rep.convergence_time) : json(nullptr);
  doc["lyapunov"] = {{"slack", rep.lyapunov_slack}, {"violations", rep.lyapunov_violations}};
  if (rep.solver) {
    doc["solver"] = {{"omega", rep.solver->omega},
                     {"mu", rep.solver->mu},
                     {"s", rep.solver->s},
                     {"d", rep.solver->d},
                     {"objective", rep.solver->objective},
                     {"gap", rep.solver_gap ? json(*rep.solver_gap) : json(nullptr)},
                     {"detected_kkt", rep.solver_kkt ? json(*rep.solver_kkt) : json(nullptr)}};
  } else {
    doc["solver"] = nullptr;
  }
  json base = json::array();
  for (const auto& b : rep.baselines) {
    base.push_back({{"controller", std::string(to_string(b.kind))},
                    {"settled", b.settled},
                    {"omega", b.omega},
                    {"datacenter_cost", b.datacenter_cost},
                    {"savings_percent", b.savings_percent ? json(*b.savings_percent) : json(nullptr)}});
  }
  doc["baselines"] = base;
  doc["scenario"] = json::parse(rep.scenario_text);
  return doc.dump(2) + "\n";
}

void write_report(const RunReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << report_to_text(report);
  if (!out) throw Error("write failed for " + path.string());
}

ReportSummary read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open report " + path.string());
  json doc;
  try {
    doc = json::parse(in);
    ReportSummary s;
    s.digest = doc.at("digest").get<std::string>();
    s.controller = doc.at("controller").get<std::string>();
    const auto& eq = doc.at("equilibrium");
    s.settled = !eq.is_null();
    if (s.settled) {
      s.omega = eq.at("omega_mean").get<double>();
      s.mu = eq.at("mu").get<double>();
      s.s = eq.at("s").get<double>();
      s.datacenter_cost = doc.at("cost").at("datacenter").get<double>();
      s.total_cost = doc.at("cost").at("total").get<double>();
    }
    if (!doc.at("convergence_time").is_null()) s.convergence_time = doc.at("convergence_time").get<double>();
    return s;
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": not a run report (" + e.what() + ")");
  }
}

}  // namespace geofc

#include "geofc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include "geofc/errors.hpp"
#include "geofc/metrics.hpp"

namespace geofc {

namespace {

bool is_multiple(double value, double step) {
  double ratio = value / step;
  return std::abs(ratio - std::round(ratio)) <= 1e-6 * std::max(1.0, ratio);
}

std::size_t steps_for(double value, double step) { return static_cast<std::size_t>(std::llround(value / step)); }

bool all_finite(const GridState& s) {
  auto finite = [](double x) { return std::isfinite(x); };
  return std::all_of(s.theta.begin(), s.theta.end(), finite) && std::all_of(s.omega.begin(), s.omega.end(), finite);
}

std::vector<std::size_t> dc_bus_indices(const Network& network, const CloudModel& cloud) {
  std::vector<std::size_t> idx;
  idx.reserve(cloud.size());
  for (const auto& dc : cloud.datacenters) idx.push_back(network.require_index(dc.bus));
  return idx;
}

}  // namespace

std::vector<std::string> validate_scenario(const Scenario& sc) {
  std::vector<std::string> diags = validate_network(sc.network);
  auto cloud_diags = validate_cloud(sc.cloud);
  diags.insert(diags.end(), cloud_diags.begin(), cloud_diags.end());

  std::set<int> dc_buses;
  std::set<int> dc_ids;
  for (const auto& dc : sc.cloud.datacenters) {
    std::string label = "datacenter " + std::to_string(dc.id);
    if (!sc.network.index_of(dc.bus)) diags.push_back(label + ": bus " + std::to_string(dc.bus) + " does not exist");
    if (!dc_buses.insert(dc.bus).second) diags.push_back(label + ": bus " + std::to_string(dc.bus) + " already hosts a datacenter");
    dc_ids.insert(dc.id);
  }
  for (const auto& b : sc.network.buses()) {
    if (!b.datacenter) continue;
    auto it = std::find_if(sc.cloud.datacenters.begin(), sc.cloud.datacenters.end(),
                           [&](const Datacenter& dc) { return dc.id == *b.datacenter; });
    if (it == sc.cloud.datacenters.end() || it->bus != b.id) {
      diags.push_back("bus " + std::to_string(b.id) + ": datacenter link " + std::to_string(*b.datacenter) +
                      " does not match a datacenter on this bus");
    }
  }

  const auto& sim = sc.simulation;
  if (!(sim.dt > 0.0) || !std::isfinite(sim.dt)) diags.emplace_back("simulation.dt must be > 0");
  if (!(sim.t_end > 0.0) || !std::isfinite(sim.t_end)) diags.emplace_back("simulation.t_end must be > 0");
  if (!(sim.record_every >= sim.dt) || !std::isfinite(sim.record_every)) {
    diags.emplace_back("simulation.record_every must be >= dt");
  }
  if (sim.dt > 0.0 && sim.record_every >= sim.dt && !is_multiple(sim.record_every, sim.dt)) {
    diags.emplace_back("simulation.record_every must be a whole number of steps");
  }
  if (sim.dt > 0.0 && sim.t_end > 0.0 && !is_multiple(sim.t_end, sim.dt)) {
    diags.emplace_back("simulation.t_end must be a whole number of steps");
  }

  const auto& ctl = sc.controller;
  if (!(ctl.beta > 0.0) || !std::isfinite(ctl.beta)) diags.emplace_back("controller.beta must be > 0");
  if (!(ctl.delay >= 0.0) || !std::isfinite(ctl.delay)) diags.emplace_back("controller.delay must be >= 0");
  if (!std::isfinite(ctl.mu0)) diags.emplace_back("controller.mu0 must be finite");
  if (!(ctl.alpha >= 0.0) || !std::isfinite(ctl.alpha)) diags.emplace_back("costs.alpha must be >= 0");
  if (!(ctl.action_period >= 0.0) || !std::isfinite(ctl.action_period)) {
    diags.emplace_back("controller.action_period must be >= 0");
  } else if (ctl.action_period > 0.0 && sim.dt > 0.0 && !is_multiple(ctl.action_period, sim.dt)) {
    diags.emplace_back("controller.action_period must be a whole number of steps");
  }

  double prev = -INFINITY;
  for (std::size_t i = 0; i < sc.events.size(); ++i) {
    const auto& ev = sc.events[i];
    std::string label = "event " + std::to_string(i);
    if (!sc.network.index_of(ev.bus)) diags.push_back(label + ": bus " + std::to_string(ev.bus) + " does not exist");
    if (!(ev.time >= 0.0 && ev.time <= sim.t_end)) diags.push_back(label + ": time outside [0, t_end]");
    if (!std::isfinite(ev.delta_p)) diags.push_back(label + ": delta_p is not finite");
    if (ev.time < prev) diags.push_back(label + ": events must be sorted by time");
    prev = ev.time;
  }

  const auto& det = sc.detection;
  if (!(det.window > 0.0) || !(det.tol_omega_dot > 0.0) || !(det.tol_sync > 0.0) || !(det.tol_mu_dot > 0.0) ||
      !(det.tol_d_dot > 0.0)) {
    diags.emplace_back("detection tolerances and window must be > 0");
  }

  if (diags.empty()) {
    double scale = 1.0;
    double balance = 0.0;
    for (const auto& b : sc.network.buses()) {
      balance += b.p;
      scale += std::abs(b.p);
    }
    for (const auto& dc : sc.cloud.datacenters) balance -= dc.d_nom;
    if (std::abs(balance) > 1e-9 * scale) {
      std::ostringstream msg;
      msg << "pre-event injections do not balance nominal datacenter load (mismatch " << balance << " MW)";
      diags.push_back(msg.str());
    }
  }
  return diags;
}

void apply_disturbance(const Network& network, std::vector<double>& p, const DisturbanceEvent& event) {
  if (p.size() != network.size()) throw InvalidInput("apply_disturbance: dimension mismatch");
  p[network.require_index(event.bus)] += event.delta_p;
}

GridState rk4_step(const Network& network, std::span<const double> p, const GridState& state,
                   std::span<const double> bus_loads, double dt) {
  if (!(dt > 0.0)) throw InvalidInput("rk4_step: dt must be > 0");
  const std::size_t n = network.size();
  auto k1 = swing_rhs(network, p, state, bus_loads);
  auto shifted = [&](const SwingDerivative& k, double h) {
    GridState s = state;
    for (std::size_t j = 0; j < n; ++j) {
      s.theta[j] += h * k.theta_dot[j];
      s.omega[j] += h * k.omega_dot[j];
    }
    return s;
  };
  auto k2 = swing_rhs(network, p, shifted(k1, 0.5 * dt), bus_loads);
  auto k3 = swing_rhs(network, p, shifted(k2, 0.5 * dt), bus_loads);
  auto k4 = swing_rhs(network, p, shifted(k3, dt), bus_loads);
  GridState next = state;
  for (std::size_t j = 0; j < n; ++j) {
    next.theta[j] += dt / 6.0 * (k1.theta_dot[j] + 2.0 * k2.theta_dot[j] + 2.0 * k3.theta_dot[j] + k4.theta_dot[j]);
    next.omega[j] += dt / 6.0 * (k1.omega_dot[j] + 2.0 * k2.omega_dot[j] + 2.0 * k3.omega_dot[j] + k4.omega_dot[j]);
  }
  if (!all_finite(next)) throw SolverError("rk4_step: state became non-finite");
  return next;
}

std::vector<double> spread_loads(const Network& network, const CloudModel& cloud, std::span<const double> loads) {
  if (loads.size() != cloud.size()) throw InvalidInput("spread_loads: dimension mismatch");
  std::vector<double> bus_loads(network.size(), 0.0);
  for (std::size_t j = 0; j < cloud.size(); ++j) {
    bus_loads[network.require_index(cloud.datacenters[j].bus)] += loads[j];
  }
  return bus_loads;
}

GridState initial_state(const Network& network, const CloudModel& cloud) {
  GridState state = GridState::flat(network.size());
  auto target = network.injections();
  auto bus_loads = spread_loads(network, cloud, cloud.nominal_loads());
  bool flat = true;
  for (std::size_t j = 0; j < target.size(); ++j) {
    target[j] -= bus_loads[j];
    if (target[j] != 0.0) flat = false;
  }
  if (!flat) state.theta = solve_angles(network, target);
  return state;
}

std::optional<EquilibriumSnapshot> detect_equilibrium(const Trajectory& traj, const Network& network,
                                                      const CloudModel& cloud, std::size_t begin,
                                                      std::size_t end, const DetectionConfig& tol) {
  if (end > traj.size() || begin >= end) return std::nullopt;
  const std::size_t n = network.size();
  for (std::size_t k = begin; k < end; ++k) {
    const auto& w = traj.states[k].omega;
    double mean = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(n);
    for (double wj : w) {
      if (std::abs(wj - mean) > tol.tol_sync) return std::nullopt;
    }
    if (k + 1 >= end) break;
    double h = traj.times[k + 1] - traj.times[k];
    const auto& w_next = traj.states[k + 1].omega;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(w_next[j] - w[j]) > tol.tol_omega_dot * h) return std::nullopt;
    }
    if (std::abs(traj.mu_series[k + 1] - traj.mu_series[k]) > tol.tol_mu_dot * h) return std::nullopt;
    for (std::size_t j = 0; j < cloud.size(); ++j) {
      if (std::abs(traj.loads[k + 1][j] - traj.loads[k][j]) > tol.tol_d_dot * h) return std::nullopt;
    }
  }
  const std::size_t last = end - 1;
  EquilibriumSnapshot snap;
  snap.theta = traj.states[last].theta;
  snap.omega = traj.states[last].omega;
  snap.d = traj.loads[last];
  snap.s = traj.s_series[last];
  snap.mu = traj.mu_series[last];
  snap.detected_at = traj.times[begin];
  snap.sampled_at = traj.times[last];
  auto bus_loads = spread_loads(network, cloud, snap.d);
  const auto& p = traj.final_injections.empty() ? network.injections() : traj.final_injections;
  snap.P.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    snap.P[j] = p[j] - network.buses()[j].sensitivity() * snap.omega[j] - bus_loads[j];
  }
  return snap;
}

std::optional<EquilibriumSnapshot> find_settled_equilibrium(const Trajectory& traj, const Network& network,
                                                            const CloudModel& cloud, const DetectionConfig& tol) {
  if (traj.size() < 2) return std::nullopt;
  // Walk backwards from the end while each sample and its successor pass.
  std::size_t first = traj.size() - 1;
  while (first > 0 && traj.times[first - 1] >= traj.last_event_time &&
         detect_equilibrium(traj, network, cloud, first - 1, first + 1, tol)) {
    --first;
  }
  if (traj.times.back() - traj.times[first] < tol.window - 1e-9) return std::nullopt;
  return detect_equilibrium(traj, network, cloud, first, traj.size(), tol);
}

Trajectory run(const Scenario& sc) {
  if (auto diags = validate_scenario(sc); !diags.empty()) {
    std::string msg = "invalid scenario:";
    for (const auto& d : diags) msg += "\n  " + d;
    throw ValidationError(msg);
  }
  const Network& net = sc.network;
  const CloudModel& cloud = sc.cloud;
  const ControllerConfig& ctl = sc.controller;
  const auto& sim = sc.simulation;
  const std::size_t n_steps = steps_for(sim.t_end, sim.dt);
  const std::size_t stride = steps_for(sim.record_every, sim.dt);
  const std::size_t period = ctl.action_period > 0.0 ? steps_for(ctl.action_period, sim.dt) : 1;
  const auto dc_bus = dc_bus_indices(net, cloud);
  const bool use_mu = ctl.kind == ControllerKind::Gfc;

  std::vector<double> p = net.injections();
  GridState state = initial_state(net, cloud);
  std::optional<GfcControllerState> mu_state;
  if (use_mu) {
    // Keep enough history for the delayed read plus one action period.
    mu_state.emplace(ctl.beta, ctl.mu0, ctl.delay, std::max(1.0, 2.0 * ctl.action_period));
  }

  std::vector<double> loads = cloud.nominal_loads();
  std::vector<double> bus_loads = spread_loads(net, cloud, loads);
  std::vector<double> theta_at_action(cloud.size());
  for (std::size_t j = 0; j < cloud.size(); ++j) theta_at_action[j] = state.theta[dc_bus[j]];

  Trajectory traj;
  const std::size_t n_rows = n_steps / stride + 1;
  traj.times.reserve(n_rows);
  traj.states.reserve(n_rows);
  traj.loads.reserve(n_rows);
  traj.s_series.reserve(n_rows);
  traj.mu_series.reserve(n_rows);
  traj.cost_series.reserve(n_rows);

  std::size_t next_event = 0;
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * sim.dt;
    while (next_event < sc.events.size() && sc.events[next_event].time <= t + 0.5 * sim.dt) {
      apply_disturbance(net, p, sc.events[next_event]);
      traj.last_event_time = t;
      ++next_event;
    }

    if (k % period == 0) {
      double mu_seen = use_mu ? mu_state->mu_at(t) : 0.0;
      for (std::size_t j = 0; j < cloud.size(); ++j) {
        double omega = state.omega[dc_bus[j]];
        if (period > 1 && k > 0 && ctl.measurement == FrequencyMeasurement::SlotAverage) {
          double span = static_cast<double>(period) * sim.dt;
          omega = (state.theta[dc_bus[j]] - theta_at_action[j]) / (2.0 * std::numbers::pi * span);
        }
        theta_at_action[j] = state.theta[dc_bus[j]];
        loads[j] = load_command(ctl.kind, cloud.datacenters[j], omega, mu_seen, ctl.alpha);
      }
      bus_loads = spread_loads(net, cloud, loads);
    }
    const double s = excess_compute(cloud, loads);

    if (k % stride == 0) {
      traj.times.push_back(t);
      traj.states.push_back(state);
      traj.loads.push_back(loads);
      traj.s_series.push_back(s);
      traj.mu_series.push_back(use_mu ? mu_state->mu() : 0.0);
      traj.cost_series.push_back(objective_cost(net, cloud, ctl.alpha, state.omega, loads));
    }
    if (k == n_steps) break;

    try {
      state = rk4_step(net, p, state, bus_loads, sim.dt);
    } catch (const SolverError&) {
      std::ostringstream msg;
      msg << "integration blew up at t = " << t << " s";
      throw SolverError(msg.str());
    }
    if (use_mu) gfc_mu_step(*mu_state, cloud, s, sim.dt);
  }
  traj.final_injections = p;
  traj.equilibrium = find_settled_equilibrium(traj, net, cloud, sc.detection);
  return traj;
}

}  // namespace geofc

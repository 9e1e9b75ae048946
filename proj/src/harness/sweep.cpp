#include "geofc/harness/sweep.hpp"

#include <atomic>
#include <fstream>
#include <thread>

#include "geofc/errors.hpp"
#include "geofc/harness/report.hpp"
#include "geofc/metrics.hpp"

namespace geofc {

const std::vector<std::string>& sweep_parameters() {
  static const std::vector<std::string> names{"delta_p", "gamma", "flexibility", "alpha",
                                              "delay",   "beta",  "action_period", "epsilon"};
  return names;
}

namespace {

std::string canonical(const std::string& p) {
  if (p == "events.delta_p" || p == "simulation.events.delta_p") return "delta_p";
  if (p == "cloud.gamma") return "gamma";
  if (p == "cloud.epsilon") return "epsilon";
  if (p == "costs.alpha") return "alpha";
  if (p == "controller.delay") return "delay";
  if (p == "controller.beta") return "beta";
  if (p == "controller.action_period") return "action_period";
  return p;
}

}  // namespace

Scenario apply_sweep_value(const Scenario& base, const std::string& parameter, double value) {
  Scenario sc = base;
  const std::string p = canonical(parameter);
  if (p == "delta_p") {
    if (sc.events.empty()) throw InvalidInput("sweep delta_p: scenario has no events");
    for (auto& ev : sc.events) ev.delta_p = value;
  } else if (p == "gamma") {
    sc.cloud.gamma = value;
  } else if (p == "epsilon") {
    sc.cloud.epsilon = value;
  } else if (p == "flexibility") {
    if (!(value >= 0.0 && value <= 100.0)) throw InvalidInput("sweep flexibility: value must be in [0, 100]");
    double W = 0.0;
    for (auto& dc : sc.cloud.datacenters) {
      dc.d_min = dc.d_nom * (1.0 - value / 100.0);
      W += dc.a * (dc.d_nom - dc.d_min);
    }
    sc.cloud.W = W;
  } else if (p == "alpha") {
    sc.controller.alpha = value;
  } else if (p == "delay") {
    sc.controller.delay = value;
  } else if (p == "beta") {
    sc.controller.beta = value;
  } else if (p == "action_period") {
    sc.controller.action_period = value;
  } else {
    std::string known;
    for (const auto& n : sweep_parameters()) known += (known.empty() ? "" : ", ") + n;
    throw InvalidInput("unknown sweep parameter '" + parameter + "' (supported: " + known + ")");
  }
  if (auto diags = validate_scenario(sc); !diags.empty()) {
    throw InvalidInput("sweep " + parameter + " = " + format_double(value) + " gives an invalid scenario: " +
                       diags.front());
  }
  return sc;
}

const SweepRow* SweepResult::find(double value, ControllerKind kind) const {
  for (const auto& r : rows) {
    if (r.value == value && r.kind == kind) return &r;
  }
  return nullptr;
}

namespace {

SweepRow evaluate(const Scenario& base, const std::string& parameter, double value, ControllerKind kind) {
  SweepRow row;
  row.value = value;
  row.kind = kind;
  try {
    Scenario sc = apply_sweep_value(base, parameter, value);
    sc.controller.kind = kind;
    auto traj = run(sc);
    if (!traj.equilibrium) {
      row.error = "no equilibrium detected";
      return row;
    }
    const auto& eq = *traj.equilibrium;
    auto cost = objective_cost(sc.network, sc.cloud, sc.controller.alpha, eq.omega, eq.d);
    row.ok = true;
    row.omega = eq.mean_omega();
    row.mu = eq.mu;
    row.convergence_time = eq.detected_at - traj.last_event_time;
    row.interdependent = cost.interdependent;
    row.independent = cost.independent();
    row.datacenter_cost = cost.datacenter();
    row.total_cost = cost.total;
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

}  // namespace

SweepResult run_sweep(const Scenario& base, const SweepSpec& spec, const std::vector<ControllerKind>& kinds,
                      unsigned jobs) {
  // Reject a bad path once, before any work is scheduled.
  if (!spec.values.empty()) (void)apply_sweep_value(base, spec.parameter, spec.values.front());
  SweepResult result;
  result.parameter = canonical(spec.parameter);
  const std::size_t n = spec.values.size() * kinds.size();
  result.rows.resize(n);
  auto task = [&](std::size_t i) {
    result.rows[i] = evaluate(base, spec.parameter, spec.values[i / kinds.size()], kinds[i % kinds.size()]);
  };
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return result;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < std::min<std::size_t>(jobs, n); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) task(i);
    });
  }
  pool.clear();
  return result;
}

void write_sweep_csv(const SweepResult& result, std::ostream& out) {
  out << result.parameter
      << ",controller,ok,omega,mu,convergence_time,cost_interdep,cost_indep_total,cost_datacenter,cost_total,error\n";
  for (const auto& r : result.rows) {
    out << format_double(r.value) << ',' << to_string(r.kind) << ',' << (r.ok ? 1 : 0) << ',';
    if (r.ok) {
      out << format_double(r.omega) << ',' << format_double(r.mu) << ',' << format_double(r.convergence_time) << ','
          << format_double(r.interdependent) << ',' << format_double(r.independent) << ','
          << format_double(r.datacenter_cost) << ',' << format_double(r.total_cost) << ',';
    } else {
      out << ",,,,,,,";
    }
    std::string err = r.error;
    for (char& c : err) {
      if (c == ',' || c == '\n') c = ';';
    }
    out << err << '\n';
  }
}

void write_sweep_csv(const SweepResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_sweep_csv(result, out);
}

}  // namespace geofc

#include "geofc/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "geofc/errors.hpp"
#include "geofc/metrics.hpp"

namespace geofc {

GfcInstance GfcInstance::from(Network network, CloudModel cloud, double alpha) {
  GfcInstance inst{std::move(network), std::move(cloud), alpha, 0.0};
  for (const auto& b : inst.network.buses()) inst.p_total += b.p;
  return inst;
}

namespace {

/// Bisection for the root of a nonincreasing function on [lo, hi].
/// Requires f(lo) >= 0 >= f(hi).
double bisect_decreasing(const std::function<double(double)>& f, double lo, double hi, int max_iter) {
  for (int it = 0; it < max_iter; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    double value = f(mid);
    if (value == 0.0) return mid;
    if (value > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double load_at(const Datacenter& dc, double price) {
  return std::clamp(indep_marginal_inverse(dc, price), dc.d_min, dc.d_max);
}

struct Balance {
  double omega;
  std::vector<double> d;
};

/// For a fixed mu, the synchronised frequency that balances generation and load.
Balance balance_for_mu(const GfcInstance& inst, double mu, const SolveOptions& opt) {
  const auto& dcs = inst.cloud.datacenters;
  const double K = inst.network.total_sensitivity();
  auto mismatch = [&](double omega) {
    double total = inst.p_total - K * omega;
    for (const auto& dc : dcs) total -= load_at(dc, inst.alpha * omega - dc.a * mu);
    return total;
  };
  if (mismatch(opt.omega_lo) < 0.0 || mismatch(opt.omega_hi) > 0.0) {
    std::ostringstream msg;
    msg << "power balance has no root in omega bracket [" << opt.omega_lo << ", " << opt.omega_hi << "] Hz";
    throw SolverError(msg.str());
  }
  Balance out;
  out.omega = bisect_decreasing(mismatch, opt.omega_lo, opt.omega_hi, std::max(opt.max_iter, 200));
  out.d.reserve(dcs.size());
  for (const auto& dc : dcs) out.d.push_back(load_at(dc, inst.alpha * out.omega - dc.a * mu));
  return out;
}

EquilibriumSolution finish(const GfcInstance& inst, double mu, Balance balance) {
  EquilibriumSolution sol;
  sol.d = std::move(balance.d);
  sol.omega = balance.omega;
  sol.mu = mu;
  sol.lambda = inst.alpha * sol.omega;
  sol.s = excess_compute(inst.cloud, sol.d);
  assign_bound_multipliers(inst.cloud, sol);
  sol.objective = gfc_objective(inst, sol.d, sol.omega);
  sol.kkt_residual_max = kkt_residuals(inst, sol).scaled_max;
  return sol;
}

void check_instance(const GfcInstance& inst) {
  if (!(inst.network.total_sensitivity() > 0.0)) {
    throw InvalidInput("instance: sum of D + droop must be > 0 for the power balance to be solvable");
  }
  if (!std::isfinite(inst.p_total) || !std::isfinite(inst.alpha)) throw InvalidInput("instance: non-finite data");
}

std::pair<double, double> default_mu_bracket(const CloudModel& cloud) {
  double s_lo = -cloud.W;
  double s_hi = -cloud.W;
  double reach_lo = cloud.W;
  double reach_hi = 0.0;
  for (const auto& dc : cloud.datacenters) {
    s_hi += dc.a * (dc.d_max - dc.d_min);
    reach_lo += dc.a * dc.d_max;
    reach_hi += dc.a * (dc.d_max - dc.d_min);
  }
  double lo = interdep_marginal(cloud, std::min(-reach_lo, s_lo - 1.0));
  double hi = interdep_marginal(cloud, std::max(reach_hi, s_hi + 1.0));
  return {lo, hi};
}

/// Outer root: r(mu) = s(d(mu)) - (g')^{-1}(mu), nonincreasing in mu.
template <typename ExcessOf>
double solve_mu(const CloudModel& cloud, std::pair<double, double> bracket, int max_iter, ExcessOf excess_of) {
  if (interdep_vanishes(cloud)) return 0.0;
  auto residual = [&](double mu) { return excess_of(mu) - interdep_marginal_inverse(cloud, mu); };
  auto [lo, hi] = bracket;
  for (int widen = 0; widen < 60 && residual(lo) < 0.0; ++widen) lo = 2.0 * lo - 1.0;
  if (residual(lo) < 0.0) throw SolverError("mu bracket: lower end does not bound the root");
  double r_hi = residual(hi);
  if (r_hi > 0.0) {
    if (cloud.epsilon == 0.0 && hi >= 0.0) {
      // Flat g on s >= 0: the multiplier sits at the kink.
      return 0.0;
    }
    for (int widen = 0; widen < 60 && r_hi > 0.0; ++widen) {
      hi = 2.0 * hi + 1.0;
      r_hi = residual(hi);
    }
    if (r_hi > 0.0) throw SolverError("mu bracket: upper end does not bound the root");
  }
  return bisect_decreasing(residual, lo, hi, max_iter);
}

}  // namespace

double gfc_objective(const GfcInstance& instance, const std::vector<double>& d, double omega) {
  std::vector<double> w(instance.network.size(), omega);
  return objective_cost(instance.network, instance.cloud, instance.alpha, w, d).total;
}

void assign_bound_multipliers(const CloudModel& cloud, EquilibriumSolution& sol) {
  const auto& dcs = cloud.datacenters;
  sol.kappa_lo.assign(dcs.size(), 0.0);
  sol.kappa_hi.assign(dcs.size(), 0.0);
  for (std::size_t j = 0; j < dcs.size(); ++j) {
    double signal = sol.lambda - dcs[j].a * sol.mu;
    sol.kappa_lo[j] = std::max(0.0, indep_marginal(dcs[j], dcs[j].d_min) - signal);
    sol.kappa_hi[j] = std::max(0.0, signal - indep_marginal(dcs[j], dcs[j].d_max));
  }
}

EquilibriumSolution solve_gfc(const GfcInstance& instance, const SolveOptions& options) {
  check_instance(instance);
  if (!(options.tol > 0.0)) throw InvalidInput("solve_gfc: tol must be > 0");
  auto bracket = options.mu_bracket.value_or(default_mu_bracket(instance.cloud));
  double mu = solve_mu(instance.cloud, bracket, options.max_iter, [&](double m) {
    return excess_compute(instance.cloud, balance_for_mu(instance, m, options).d);
  });
  auto sol = finish(instance, mu, balance_for_mu(instance, mu, options));
  if (!(sol.kkt_residual_max <= options.tol)) {
    std::ostringstream msg;
    msg << "solve_gfc: KKT residual " << sol.kkt_residual_max << " above tolerance " << options.tol;
    throw SolverError(msg.str());
  }
  return sol;
}

EquilibriumSolution solve_policy_equilibrium(const GfcInstance& instance, ControllerKind kind,
                                             const SolveOptions& options) {
  switch (kind) {
    case ControllerKind::Gfc:
      return solve_gfc(instance, options);
    case ControllerKind::Olc: {
      check_instance(instance);
      auto sol = finish(instance, 0.0, balance_for_mu(instance, 0.0, options));
      // mu is pinned rather than tracking g'(s); report the actual marginal.
      return sol;
    }
    case ControllerKind::DroopOnly: {
      check_instance(instance);
      Balance b;
      b.d = instance.cloud.nominal_loads();
      double total_d = std::accumulate(b.d.begin(), b.d.end(), 0.0);
      b.omega = (instance.p_total - total_d) / instance.network.total_sensitivity();
      return finish(instance, 0.0, std::move(b));
    }
  }
  throw InvalidInput("unknown controller kind");
}

KktResiduals kkt_residuals(const GfcInstance& instance, const EquilibriumSolution& c) {
  const auto& cloud = instance.cloud;
  const auto& dcs = cloud.datacenters;
  const auto& buses = instance.network.buses();
  if (c.d.size() != dcs.size() || c.kappa_lo.size() != dcs.size() || c.kappa_hi.size() != dcs.size()) {
    throw InvalidInput("kkt_residuals: candidate does not match the datacenter count");
  }
  if (!c.bus_omega.empty() && c.bus_omega.size() != buses.size()) {
    throw InvalidInput("kkt_residuals: per-bus frequencies do not match the bus count");
  }
  KktResiduals r;
  double max_a = 0.0;
  double span = 0.0;
  for (const auto& dc : dcs) {
    max_a = std::max(max_a, dc.a);
    span = std::max(span, dc.d_max - dc.d_min);
  }
  const double price_scale = 1.0 + std::abs(c.lambda) + std::abs(c.mu) * max_a;
  double power_scale = 1.0;
  for (const auto& b : buses) power_scale += std::abs(b.p);
  const double compute_scale = 1.0 + std::abs(cloud.offset());
  double worst = 0.0;
  auto track = [&worst](double value, double scale) { worst = std::max(worst, std::abs(value) / scale); };

  r.stationarity_s = interdep_marginal(cloud, c.s) - c.mu;
  track(r.stationarity_s, price_scale);

  for (std::size_t j = 0; j < dcs.size(); ++j) {
    const auto& dc = dcs[j];
    double stat = indep_marginal(dc, c.d[j]) + c.mu * dc.a - c.lambda - c.kappa_lo[j] + c.kappa_hi[j];
    r.stationarity_d.push_back(stat);
    track(stat, price_scale);
    r.slackness_lo.push_back(c.kappa_lo[j] * (dc.d_min - c.d[j]));
    r.slackness_hi.push_back(c.kappa_hi[j] * (c.d[j] - dc.d_max));
    track(r.slackness_lo.back(), price_scale * (1.0 + span));
    track(r.slackness_hi.back(), price_scale * (1.0 + span));
    r.dual_lo.push_back(std::max(0.0, -c.kappa_lo[j]));
    r.dual_hi.push_back(std::max(0.0, -c.kappa_hi[j]));
    track(r.dual_lo.back(), price_scale);
    track(r.dual_hi.back(), price_scale);
    r.bound_lo.push_back(std::max(0.0, dc.d_min - c.d[j]));
    r.bound_hi.push_back(std::max(0.0, c.d[j] - dc.d_max));
    track(r.bound_lo.back(), 1.0 + span);
    track(r.bound_hi.back(), 1.0 + span);
  }

  double balance = instance.p_total;
  for (std::size_t j = 0; j < buses.size(); ++j) {
    double w = c.bus_omega.empty() ? c.omega : c.bus_omega[j];
    double stat = instance.alpha != 0.0 ? w - c.lambda / instance.alpha : w - c.omega;
    r.stationarity_omega.push_back(stat);
    track(stat, 1.0);
    balance -= buses[j].sensitivity() * w;
  }
  for (double dj : c.d) balance -= dj;
  r.power_balance = balance;
  track(balance, power_scale);

  r.primal_s = excess_compute(cloud, c.d) - c.s;
  track(r.primal_s, compute_scale);

  r.scaled_max = worst;
  return r;
}

FixedReductionResult solve_fixed_reduction(const CloudModel& cloud, double delta_total, double tol) {
  const auto& dcs = cloud.datacenters;
  if (dcs.empty()) throw InvalidInput("solve_fixed_reduction: no datacenters");
  double lo_total = 0.0;
  double hi_total = 0.0;
  for (const auto& dc : dcs) {
    lo_total += dc.d_min - dc.d_nom;
    hi_total += dc.d_max - dc.d_nom;
  }
  if (!(delta_total >= lo_total - tol && delta_total <= hi_total + tol)) {
    std::ostringstream msg;
    msg << "solve_fixed_reduction: change " << delta_total << " MW outside feasible range [" << lo_total << ", "
        << hi_total << "]";
    throw InvalidInput(msg.str());
  }

  // Inner: aggregate multiplier nu so that the loads hit the requested total.
  auto loads_for = [&](double mu) {
    double nu_lo = 0.0;
    double nu_hi = 0.0;
    bool first = true;
    for (const auto& dc : dcs) {
      double lo = indep_marginal(dc, dc.d_min) + dc.a * mu;
      double hi = indep_marginal(dc, dc.d_max) + dc.a * mu;
      nu_lo = first ? lo : std::min(nu_lo, lo);
      nu_hi = first ? hi : std::max(nu_hi, hi);
      first = false;
    }
    nu_lo -= 1.0;
    nu_hi += 1.0;
    auto shortfall = [&](double nu) {
      double total = delta_total;
      for (const auto& dc : dcs) total -= load_at(dc, nu - dc.a * mu) - dc.d_nom;
      return total;
    };
    double nu = bisect_decreasing(shortfall, nu_lo, nu_hi, 400);
    std::vector<double> d;
    d.reserve(dcs.size());
    for (const auto& dc : dcs) d.push_back(load_at(dc, nu - dc.a * mu));
    return std::make_pair(nu, d);
  };

  double mu = solve_mu(cloud, default_mu_bracket(cloud), 400,
                       [&](double m) { return excess_compute(cloud, loads_for(m).second); });
  auto [nu, d] = loads_for(mu);
  FixedReductionResult res;
  res.d = std::move(d);
  res.mu = mu;
  res.nu = nu;
  res.s = excess_compute(cloud, res.d);
  res.interdependent = interdep_cost(cloud, res.s);
  for (std::size_t j = 0; j < dcs.size(); ++j) res.independent += indep_cost(dcs[j], res.d[j]);
  res.total = res.interdependent + res.independent;
  return res;
}

EquilibriumSolution lower_bound(const GfcInstance& instance, const SolveOptions& options) {
  std::vector<Bus> buses = instance.network.buses();
  for (auto& b : buses) b.D = 0.0;
  GfcInstance relaxed{Network(std::move(buses), instance.network.lines(), instance.network.f0()), instance.cloud,
                      instance.alpha, instance.p_total};
  return solve_gfc(relaxed, options);
}

double lower_bound_cost(const GfcInstance& instance, const SolveOptions& options) {
  return lower_bound(instance, options).objective;
}

}  // namespace geofc

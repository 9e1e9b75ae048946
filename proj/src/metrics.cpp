#include "geofc/metrics.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "geofc/controllers.hpp"
#include "geofc/errors.hpp"

namespace geofc {

double EquilibriumSnapshot::mean_omega() const {
  if (omega.empty()) return 0.0;
  return std::accumulate(omega.begin(), omega.end(), 0.0) / static_cast<double>(omega.size());
}

double EquilibriumSnapshot::omega_spread() const {
  double mean = mean_omega();
  double spread = 0.0;
  for (double w : omega) spread = std::max(spread, std::abs(w - mean));
  return spread;
}

CostBreakdown objective_cost(const Network& network, const CloudModel& cloud, double alpha,
                             std::span<const double> omega, std::span<const double> loads) {
  if (omega.size() != network.size() || loads.size() != cloud.size()) {
    throw InvalidInput("objective_cost: dimension mismatch");
  }
  CostBreakdown cost;
  cost.interdependent = interdep_cost(cloud, excess_compute(cloud, loads));
  cost.independent_per_dc.reserve(cloud.size());
  for (std::size_t j = 0; j < cloud.size(); ++j) {
    cost.independent_per_dc.push_back(indep_cost(cloud.datacenters[j], loads[j]));
  }
  const auto& buses = network.buses();
  double freq = 0.0;
  for (std::size_t j = 0; j < buses.size(); ++j) freq += 0.5 * buses[j].sensitivity() * omega[j] * omega[j];
  cost.frequency = alpha * freq;
  cost.total = cost.interdependent + cost.independent() + cost.frequency;
  return cost;
}

double line_potential(double Y, double x, double ref) {
  return Y * (std::cos(ref) - std::cos(x) - std::sin(ref) * (x - ref));
}

LyapunovValues lyapunov_energy(const GridState& state, double mu, const LyapunovConfig& config,
                               const Network& network) {
  const auto& ref = config.reference;
  const std::size_t n = network.size();
  if (state.theta.size() != n || state.omega.size() != n || ref.theta.size() != n) {
    throw InvalidInput("lyapunov_energy: dimension mismatch");
  }
  LyapunovValues v;
  if (config.include_mu) {
    double dmu = mu - ref.mu;
    v.V1 = dmu * dmu / (2.0 * config.beta);
  }
  double w_star = ref.mean_omega();
  const auto& buses = network.buses();
  for (std::size_t j = 0; j < n; ++j) {
    double dw = state.omega[j] - w_star;
    v.V2 += 0.5 * buses[j].M * dw * dw;
  }
  v.V2 *= config.alpha;
  const auto& lines = network.lines();
  const auto& ends = network.line_ends();
  for (std::size_t e = 0; e < lines.size(); ++e) {
    auto [a, b] = ends[e];
    v.V3 += line_potential(lines[e].Y, state.theta[a] - state.theta[b], ref.theta[a] - ref.theta[b]);
  }
  v.V3 *= config.alpha / (2.0 * std::numbers::pi);
  return v;
}

double lyapunov_derivative(const GridState& state, double mu, std::span<const double> loads,
                           const LyapunovConfig& config, const Network& network, const CloudModel& cloud) {
  const auto& ref = config.reference;
  if (loads.size() != cloud.size() || ref.d.size() != cloud.size()) {
    throw InvalidInput("lyapunov_derivative: dimension mismatch");
  }
  double w_star = ref.mean_omega();
  double mu_ref = config.include_mu ? ref.mu : 0.0;
  double mu_now = config.include_mu ? mu : 0.0;
  double rate = 0.0;
  for (std::size_t j = 0; j < cloud.size(); ++j) {
    const auto& dc = cloud.datacenters[j];
    std::size_t bus = network.require_index(dc.bus);
    double signal = config.alpha * state.omega[bus] - dc.a * mu_now;
    double signal_ref = config.alpha * w_star - dc.a * mu_ref;
    rate -= (signal - signal_ref) * (loads[j] - ref.d[j]);
  }
  if (config.include_mu) {
    rate -= (mu - ref.mu) * (interdep_marginal_inverse(cloud, mu) - interdep_marginal_inverse(cloud, ref.mu));
  }
  const auto& buses = network.buses();
  for (std::size_t j = 0; j < buses.size(); ++j) {
    double dw = state.omega[j] - w_star;
    rate -= config.alpha * buses[j].sensitivity() * dw * dw;
  }
  return rate;
}

bool within_angle_neighborhood(const Network& network, std::span<const double> theta) {
  for (auto [a, b] : network.line_ends()) {
    if (std::abs(theta[a] - theta[b]) >= std::numbers::pi / 2) return false;
  }
  return true;
}

void attach_lyapunov_series(Trajectory& traj, const LyapunovConfig& config, const Network& network) {
  traj.lyapunov_series.clear();
  traj.lyapunov_series.reserve(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    traj.lyapunov_series.push_back(lyapunov_energy(traj.states[k], traj.mu_series[k], config, network));
  }
}

std::vector<double> lyapunov_decrease_check(const Trajectory& traj, const Network& network, double slack,
                                            double from_time) {
  if (traj.lyapunov_series.size() != traj.size()) {
    throw InvalidInput("lyapunov_decrease_check: trajectory has no energy series");
  }
  std::vector<double> violations;
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    if (traj.times[k] < from_time) continue;
    if (!within_angle_neighborhood(network, traj.states[k].theta) ||
        !within_angle_neighborhood(network, traj.states[k + 1].theta)) {
      continue;
    }
    double h = traj.times[k + 1] - traj.times[k];
    double rise = traj.lyapunov_series[k + 1].total() - traj.lyapunov_series[k].total();
    if (rise > slack * h) violations.push_back(traj.times[k]);
  }
  return violations;
}

LyapunovConfig lyapunov_config_for(const Trajectory& traj, double beta, double alpha, bool include_mu) {
  if (!traj.equilibrium) throw InvalidInput("no equilibrium detected; cannot anchor the energy function");
  LyapunovConfig config;
  config.reference = *traj.equilibrium;
  config.beta = beta;
  config.alpha = alpha;
  config.include_mu = include_mu;
  return config;
}

namespace {

double equilibrium_dc_cost(const Trajectory& traj, const CloudModel& cloud) {
  if (!traj.equilibrium) throw InvalidInput("cost_savings: trajectory has no detected equilibrium");
  const auto& d = traj.equilibrium->d;
  double cost = interdep_cost(cloud, excess_compute(cloud, d));
  for (std::size_t j = 0; j < cloud.size(); ++j) cost += indep_cost(cloud.datacenters[j], d[j]);
  return cost;
}

}  // namespace

double cost_savings(double dc_cost_a, double dc_cost_b) {
  if (dc_cost_b == 0.0) throw InvalidInput("cost_savings: baseline cost is zero");
  return 100.0 * (1.0 - dc_cost_a / dc_cost_b);
}

double cost_savings(const Trajectory& a, const Trajectory& b, const CloudModel& cloud) {
  return cost_savings(equilibrium_dc_cost(a, cloud), equilibrium_dc_cost(b, cloud));
}

}  // namespace geofc

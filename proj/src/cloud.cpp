#include "geofc/cloud.hpp"

#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "geofc/errors.hpp"

namespace geofc {

double CloudModel::offset() const {
  double b = W;
  for (const auto& dc : datacenters) b += dc.a * dc.d_min;
  return b;
}

std::vector<double> CloudModel::nominal_loads() const {
  std::vector<double> d;
  d.reserve(datacenters.size());
  for (const auto& dc : datacenters) d.push_back(dc.d_nom);
  return d;
}

double CostBreakdown::independent() const {
  return std::accumulate(independent_per_dc.begin(), independent_per_dc.end(), 0.0);
}

double processing_rate(const Datacenter& dc, double d_j) { return dc.a * (d_j - dc.d_min); }

double excess_compute(const CloudModel& cloud, std::span<const double> d) {
  if (d.size() != cloud.size()) {
    throw InvalidInput("excess_compute: expected " + std::to_string(cloud.size()) + " loads, got " +
                       std::to_string(d.size()));
  }
  double total = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) total += cloud.datacenters[j].a * d[j];
  return total - cloud.offset();
}

double interdep_cost(const CloudModel& cloud, double s) {
  double shortfall = std::max(0.0, -s);
  return 0.5 * cloud.gamma * shortfall * shortfall + 0.5 * cloud.epsilon * s * s;
}

double interdep_marginal(const CloudModel& cloud, double s) {
  return -cloud.gamma * std::max(0.0, -s) + cloud.epsilon * s;
}

bool interdep_vanishes(const CloudModel& cloud) { return cloud.gamma == 0.0 && cloud.epsilon == 0.0; }

double interdep_marginal_inverse(const CloudModel& cloud, double mu) {
  if (interdep_vanishes(cloud)) {
    throw ConfigError("interdependent marginal has no inverse when gamma = epsilon = 0");
  }
  // g' is piecewise linear: slope gamma + epsilon on s < 0, epsilon on s >= 0.
  if (mu >= 0.0) return cloud.epsilon > 0.0 ? mu / cloud.epsilon : 0.0;
  return mu / (cloud.gamma + cloud.epsilon);
}

double interdep_inverse_slope(const CloudModel& cloud, double mu) {
  if (interdep_vanishes(cloud)) return 0.0;
  if (mu >= 0.0) return cloud.epsilon > 0.0 ? 1.0 / cloud.epsilon : 0.0;
  return 1.0 / (cloud.gamma + cloud.epsilon);
}

double indep_cost(const Datacenter& dc, double d_j) {
  double dev = d_j - dc.d_nom;
  return 0.5 * dc.eta * dev * dev;
}

double indep_marginal(const Datacenter& dc, double d_j) { return dc.eta * (d_j - dc.d_nom); }

double indep_marginal_inverse(const Datacenter& dc, double x) { return dc.d_nom + x / dc.eta; }

std::vector<std::string> validate_cloud(const CloudModel& cloud) {
  std::vector<std::string> diags;
  std::set<int> ids;
  std::set<int> buses;
  for (const auto& dc : cloud.datacenters) {
    std::string label = "datacenter " + std::to_string(dc.id);
    if (!ids.insert(dc.id).second) diags.push_back(label + ": duplicate datacenter id");
    if (!buses.insert(dc.bus).second) diags.push_back(label + ": bus " + std::to_string(dc.bus) + " already hosts a datacenter");
    if (!(dc.a > 0.0) || !std::isfinite(dc.a)) diags.push_back(label + ": efficiency a must be > 0");
    if (!(dc.eta > 0.0) || !std::isfinite(dc.eta)) diags.push_back(label + ": eta must be > 0");
    if (!std::isfinite(dc.d_min) || !std::isfinite(dc.d_max) || !std::isfinite(dc.d_nom)) {
      diags.push_back(label + ": power bounds must be finite");
    } else {
      if (dc.d_min > dc.d_max) diags.push_back(label + ": d_min exceeds d_max");
      if (dc.d_nom < dc.d_min || dc.d_nom > dc.d_max) diags.push_back(label + ": d_nom outside [d_min, d_max]");
    }
  }
  if (!std::isfinite(cloud.W)) diags.emplace_back("cloud: workload W is not finite");
  if (!(cloud.gamma >= 0.0)) diags.emplace_back("cloud: gamma must be >= 0");
  if (!(cloud.epsilon >= 0.0)) diags.emplace_back("cloud: epsilon must be >= 0");
  if (cloud.gamma + cloud.epsilon <= 0.0) diags.emplace_back("cloud: gamma + epsilon must be > 0");
  return diags;
}

}  // namespace geofc

#pragma once

#include <span>
#include <string>
#include <vector>

namespace geofc {

/// A datacenter converting electrical power into computational power.
struct Datacenter {
  int id = 0;
  int bus = 0;
  double a = 1.0;       ///< compute-MW per electrical MW
  double d_min = 0.0;   ///< MW
  double d_max = 0.0;   ///< MW
  double d_nom = 0.0;   ///< MW
  double eta = 1.0;     ///< independent-cost curvature ($/MW^2)
};

/// The datacenter fleet plus the shared (interdependent) cost.
///
/// g(s) = (gamma/2) * ((-s)^+)^2 + (epsilon/2) * s^2, where s is the excess
/// computational power. epsilon > 0 keeps g strictly convex on s > 0 so its
/// marginal has a true inverse; epsilon = 0 is allowed and uses the
/// pseudo-inverse (0 for mu >= 0).
struct CloudModel {
  std::vector<Datacenter> datacenters;
  double W = 0.0;  ///< workload rate (compute-MW)
  double gamma = 0.0;
  double epsilon = 1e-6;

  std::size_t size() const { return datacenters.size(); }
  /// b = W + sum_j a_j * d_min_j
  double offset() const;
  std::vector<double> nominal_loads() const;
};

struct CostBreakdown {
  double interdependent = 0.0;
  std::vector<double> independent_per_dc;
  double frequency = 0.0;
  double total = 0.0;

  double independent() const;
  /// Cost borne by the datacenter fleet (interdependent + independent).
  double datacenter() const { return interdependent + independent(); }
};

/// r_j = a_j * (d_j - d_min_j)
double processing_rate(const Datacenter& dc, double d_j);

/// s = sum_j a_j d_j - b
double excess_compute(const CloudModel& cloud, std::span<const double> d);

double interdep_cost(const CloudModel& cloud, double s);
double interdep_marginal(const CloudModel& cloud, double s);
/// Root of g'(x) = mu. Throws ConfigError when gamma = epsilon = 0.
double interdep_marginal_inverse(const CloudModel& cloud, double mu);
/// Largest slope of the inverse marginal, i.e. 1 / min g''. Used for step-size control.
double interdep_inverse_slope(const CloudModel& cloud, double mu);
/// True when g is identically zero (no interdependent cost at all).
bool interdep_vanishes(const CloudModel& cloud);

/// c_j(d) = (eta_j / 2) * (d - d_nom_j)^2
double indep_cost(const Datacenter& dc, double d_j);
double indep_marginal(const Datacenter& dc, double d_j);
/// d_nom + x / eta, not clamped to the datacenter's bounds.
double indep_marginal_inverse(const Datacenter& dc, double x);

/// Every violated Datacenter/CloudModel invariant (bus presence is checked
/// against the network by the harness).
std::vector<std::string> validate_cloud(const CloudModel& cloud);

}  // namespace geofc

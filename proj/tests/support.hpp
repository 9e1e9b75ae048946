#pragma once

// Independent oracles and fixtures shared by the unit and acceptance tests.
// Nothing here calls the solvers under test: minimisers come from plain grid
// search and closed forms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "geofc/cloud.hpp"
#include "geofc/equilibrium.hpp"
#include "geofc/simulator.hpp"

namespace geofc::testing {

// Shortfall-only interdependent cost written out by hand so the oracle does
// not share code with cloud.cpp.
inline double oracle_g(double gamma, double epsilon, double s) {
  const double short_fall = s < 0.0 ? -s : 0.0;
  return 0.5 * gamma * short_fall * short_fall + 0.5 * epsilon * s * s;
}

inline double oracle_excess(const CloudModel& cloud, const std::vector<double>& d) {
  double s = -cloud.W;
  for (std::size_t j = 0; j < d.size(); ++j) {
    const auto& dc = cloud.datacenters[j];
    s += dc.a * (d[j] - dc.d_min);
  }
  return s;
}

inline double oracle_fleet_cost(const CloudModel& cloud, const std::vector<double>& d) {
  double c = oracle_g(cloud.gamma, cloud.epsilon, oracle_excess(cloud, d));
  for (std::size_t j = 0; j < d.size(); ++j) {
    const auto& dc = cloud.datacenters[j];
    c += 0.5 * dc.eta * (d[j] - dc.d_nom) * (d[j] - dc.d_nom);
  }
  return c;
}

// Steady-state objective with omega eliminated through power balance.
inline double oracle_gfc_objective(const GfcInstance& inst, const std::vector<double>& d) {
  double K = 0.0;
  for (const auto& b : inst.network.buses()) K += b.D + b.droop_gain;
  double load = 0.0;
  for (double x : d) load += x;
  const double omega = (inst.p_total - load) / K;
  return oracle_fleet_cost(inst.cloud, d) + inst.alpha * 0.5 * K * omega * omega;
}

struct GridMin {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
};

// Coarse-to-fine grid search of a convex function over a box: each pass
// scans a lattice and shrinks the box around the best point. The final
// lattice spacing is `resolution`.
inline GridMin grid_minimize(const std::function<double(const std::vector<double>&)>& f, std::vector<double> lo,
                             std::vector<double> hi, double resolution, int points_per_axis = 41) {
  const std::size_t k = lo.size();
  GridMin best;
  std::vector<double> lo0 = lo;
  std::vector<double> hi0 = hi;
  while (true) {
    double step = 0.0;
    for (std::size_t i = 0; i < k; ++i) step = std::max(step, (hi[i] - lo[i]) / (points_per_axis - 1));
    step = std::max(step, resolution);
    std::vector<int> counts(k);
    for (std::size_t i = 0; i < k; ++i) counts[i] = static_cast<int>(std::floor((hi[i] - lo[i]) / step + 1e-9)) + 1;
    std::vector<int> idx(k, 0);
    std::vector<double> x(k);
    while (true) {
      for (std::size_t i = 0; i < k; ++i) x[i] = std::min(hi[i], lo[i] + idx[i] * step);
      const double v = f(x);
      if (v < best.value) {
        best.value = v;
        best.x = x;
      }
      std::size_t i = 0;
      while (i < k && ++idx[i] == counts[i]) idx[i++] = 0;
      if (i == k) break;
    }
    if (step <= resolution) break;
    for (std::size_t i = 0; i < k; ++i) {
      lo[i] = std::max(lo0[i], best.x[i] - 2.0 * step);
      hi[i] = std::min(hi0[i], best.x[i] + 2.0 * step);
      // Snap to the resolution lattice anchored at the original box.
      lo[i] = lo0[i] + std::floor((lo[i] - lo0[i]) / resolution) * resolution;
    }
  }
  return best;
}

// Small connected network with 1..n_dc datacenters. Injections balance the
// nominal loads so the pre-event state is an equilibrium; one loss event.
inline Scenario random_small_scenario(std::uint64_t seed, int n_bus, int n_dc) {
  std::mt19937_64 rng(seed);
  auto U = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  std::vector<Bus> buses;
  for (int i = 0; i < n_bus; ++i) {
    Bus b;
    b.id = i + 1;
    b.D = U(1.0, 2.0);
    b.droop_gain = U(10.0, 30.0);
    b.M = U(2.0, 5.0);
    buses.push_back(b);
  }
  std::vector<Line> lines;
  for (int i = 1; i < n_bus; ++i) lines.push_back({i, i + 1, U(50.0, 200.0)});
  if (n_bus >= 3) lines.push_back({1, n_bus, U(50.0, 200.0)});

  CloudModel cloud;
  cloud.gamma = U(0.1, 0.3);
  cloud.epsilon = 1e-6;
  double load_total = 0.0;
  for (int j = 0; j < n_dc; ++j) {
    Datacenter dc;
    dc.id = j + 1;
    dc.bus = (j % n_bus) + 1;
    dc.d_nom = U(10.0, 30.0);
    dc.d_min = dc.d_nom * U(0.5, 0.8);
    dc.d_max = dc.d_nom * U(1.1, 1.4);
    dc.a = U(0.5, 0.9);
    dc.eta = U(0.05, 0.2);
    cloud.W += dc.a * (dc.d_nom - dc.d_min);
    buses[dc.bus - 1].datacenter = dc.id;
    load_total += dc.d_nom;
    cloud.datacenters.push_back(dc);
  }
  // Spread generation unevenly so lines carry flow.
  std::vector<double> share(n_bus);
  double share_sum = 0.0;
  for (auto& s : share) share_sum += (s = U(0.2, 1.0));
  double assigned = 0.0;
  for (int i = 0; i < n_bus; ++i) {
    buses[i].p = i + 1 < n_bus ? load_total * share[i] / share_sum : load_total - assigned;
    assigned += buses[i].p;
  }

  Scenario sc;
  sc.network = Network(std::move(buses), std::move(lines));
  sc.cloud = cloud;
  sc.controller.kind = ControllerKind::Gfc;
  sc.controller.alpha = U(10.0, 75.0);
  sc.controller.beta = 0.5;
  sc.events.push_back({1.0, static_cast<int>(U(1.0, n_bus + 0.999)), -U(5.0, 20.0)});
  sc.simulation.dt = 1e-3;
  sc.simulation.t_end = 40.0;
  sc.simulation.record_every = 1e-2;
  return sc;
}

// Least-squares line fit, returns R^2.
inline double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (syy == 0.0) return 1.0;
  return sxy * sxy / (sxx * syy);
}

}  // namespace geofc::testing

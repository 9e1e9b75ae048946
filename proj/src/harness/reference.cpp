#include "geofc/harness/reference.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <random>

#include "geofc/errors.hpp"

namespace geofc {

namespace {

// New England 39-bus system: branch reactances (p.u. on 100 MVA), base
// case active loads and generator dispatch (MW), machine inertia constants.
struct Branch {
  int from;
  int to;
  double x;
};

constexpr std::array<Branch, 46> kBranches{{
    {1, 2, 0.0411},  {1, 39, 0.0250},  {2, 3, 0.0151},   {2, 25, 0.0086},  {2, 30, 0.0181},  {3, 4, 0.0213},
    {3, 18, 0.0133}, {4, 5, 0.0128},   {4, 14, 0.0129},  {5, 6, 0.0026},   {5, 8, 0.0112},   {6, 7, 0.0092},
    {6, 11, 0.0082}, {6, 31, 0.0250},  {7, 8, 0.0046},   {8, 9, 0.0363},   {9, 39, 0.0250},  {10, 11, 0.0043},
    {10, 13, 0.0043}, {10, 32, 0.0200}, {12, 11, 0.0435}, {12, 13, 0.0435}, {13, 14, 0.0101}, {14, 15, 0.0217},
    {15, 16, 0.0094}, {16, 17, 0.0089}, {16, 19, 0.0195}, {16, 21, 0.0135}, {16, 24, 0.0059}, {17, 18, 0.0082},
    {17, 27, 0.0173}, {19, 20, 0.0138}, {19, 33, 0.0142}, {20, 34, 0.0180}, {21, 22, 0.0140}, {22, 23, 0.0096},
    {22, 35, 0.0143}, {23, 24, 0.0350}, {23, 36, 0.0272}, {25, 26, 0.0323}, {25, 37, 0.0232}, {26, 27, 0.0147},
    {26, 28, 0.0474}, {26, 29, 0.0625}, {28, 29, 0.0151}, {29, 38, 0.0156},
}};

constexpr std::array<double, 39> kLoad{
    97.6, 0.0,   322.0, 500.0, 0.0,   0.0,   233.8, 522.0, 6.5,   0.0,   0.0,   8.53, 0.0,
    0.0,  320.0, 329.0, 0.0,   158.0, 0.0,   680.0, 274.0, 0.0,   247.5, 308.6, 224.0, 139.0,
    281.0, 206.0, 283.5, 0.0,  9.2,   0.0,   0.0,   0.0,   0.0,   0.0,   0.0,   0.0,   1104.0,
};

constexpr int kFirstMachine = 30;
constexpr std::array<double, 10> kDispatch{250.0, 677.871, 650.0, 632.0, 508.0, 650.0, 560.0, 540.0, 830.0, 1000.0};
constexpr std::array<double, 10> kInertiaH{4.2, 3.03, 3.58, 2.86, 2.6, 3.48, 2.64, 2.43, 3.45, 50.0};

// Top 53 bits give every double in [0, 1) with equal spacing.
double unit_from_bits(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

// Moves the draws so their sample mean is exactly `mean`, shrinking the
// spread only if the shift would leave [lo, hi].
std::vector<double> recentre(std::vector<double> v, double mean, double lo, double hi) {
  double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double scale = 1.0;
  for (double x : v) {
    double dev = x - m;
    if (dev > 0.0) scale = std::min(scale, (hi - mean) / dev);
    if (dev < 0.0) scale = std::min(scale, (lo - mean) / dev);
  }
  for (double& x : v) x = mean + scale * (x - m);
  return v;
}

}  // namespace

const std::vector<int>& reference_datacenter_buses() {
  static const std::vector<int> buses{3, 4, 7, 8, 15, 16, 18, 20, 21, 23};
  return buses;
}

double uniform_from_bits(std::uint64_t bits, double lo, double hi) {
  // lo + (hi - lo) * u can round up to hi for u just below 1.
  const double x = lo + (hi - lo) * unit_from_bits(bits);
  return x < hi ? x : std::nextafter(hi, lo);
}

Scenario build_reference_scenario(std::uint64_t seed, const ReferenceOptions& o) {
  const auto& dc_buses = reference_datacenter_buses();
  const double base_load = std::accumulate(kLoad.begin(), kLoad.end(), 0.0);
  const double scale = o.total_demand / base_load;
  const double dispatch_total = std::accumulate(kDispatch.begin(), kDispatch.end(), 0.0);

  std::vector<Bus> buses;
  buses.reserve(kLoad.size());
  for (int id = 1; id <= static_cast<int>(kLoad.size()); ++id) {
    Bus b;
    b.id = id;
    b.D = o.bus_D;
    b.M = o.load_bus_M;
    double demand = kLoad[static_cast<std::size_t>(id - 1)] * scale;
    if (std::find(dc_buses.begin(), dc_buses.end(), id) != dc_buses.end()) {
      // The datacenter's nominal draw is part of the bus demand.
      demand -= o.dc_nominal;
      b.datacenter = id;
    }
    b.p = -demand;
    if (id >= kFirstMachine) {
      auto g = static_cast<std::size_t>(id - kFirstMachine);
      double rating = o.machine_mva * scale;
      b.p += o.total_demand * kDispatch[g] / dispatch_total;
      b.droop_gain = droop_gain_from_per_unit(rating, o.droop_R, 60.0);
      b.M = 2.0 * kInertiaH[g] * rating / 60.0;
    }
    buses.push_back(b);
  }
  // Remove rounding drift so the pre-event point balances exactly.
  double mismatch = 0.0;
  for (const auto& b : buses) mismatch += b.p;
  mismatch -= o.dc_nominal * static_cast<double>(dc_buses.size());
  buses.back().p -= mismatch;

  std::vector<Line> lines;
  lines.reserve(kBranches.size());
  for (const auto& br : kBranches) lines.push_back({br.from, br.to, o.line_base_mva / br.x});

  std::mt19937_64 rng(seed);
  std::vector<double> inv_a(dc_buses.size());
  std::vector<double> eta(dc_buses.size());
  for (std::size_t j = 0; j < dc_buses.size(); ++j) {
    inv_a[j] = uniform_from_bits(rng(), o.inv_a_lo, o.inv_a_hi);
    eta[j] = uniform_from_bits(rng(), o.eta_lo, o.eta_hi);
  }
  inv_a = recentre(std::move(inv_a), o.inv_a_mean, o.inv_a_lo, o.inv_a_hi);
  double eta_sum = std::accumulate(eta.begin(), eta.end(), 0.0);
  for (double& e : eta) e *= o.eta_mean * static_cast<double>(eta.size()) / eta_sum;

  CloudModel cloud;
  cloud.gamma = o.gamma;
  cloud.epsilon = o.epsilon;
  for (std::size_t j = 0; j < dc_buses.size(); ++j) {
    Datacenter dc;
    dc.id = dc_buses[j];
    dc.bus = dc_buses[j];
    dc.a = 1.0 / inv_a[j];
    dc.d_min = o.dc_min;
    dc.d_max = o.dc_max;
    dc.d_nom = o.dc_nominal;
    dc.eta = eta[j];
    cloud.datacenters.push_back(dc);
  }
  // Workload sized so the fleet has no excess compute at nominal.
  cloud.W = 0.0;
  for (const auto& dc : cloud.datacenters) cloud.W += dc.a * (dc.d_nom - dc.d_min);

  Scenario sc;
  sc.network = Network(std::move(buses), std::move(lines), 60.0);
  sc.cloud = std::move(cloud);
  sc.controller.kind = ControllerKind::Gfc;
  sc.controller.alpha = o.alpha;
  sc.controller.beta = o.beta;
  sc.events.push_back({o.event_time, o.event_bus, o.event_delta_p});
  sc.simulation = {o.dt, o.t_end, o.record_every};
  return sc;
}

}  // namespace geofc

#pragma once

#include <cstdint>
#include <vector>

#include "geofc/simulator.hpp"

namespace geofc {

/// Knobs of the reference 39-bus instance. Defaults define the canonical
/// scenario; tests and sweeps override single fields.
struct ReferenceOptions {
  double total_demand = 14000.0;   ///< MW, datacenters included
  double dc_nominal = 25.0;        ///< MW per datacenter
  double dc_min = 15.0;
  double dc_max = 30.0;
  double inv_a_lo = 1.1;
  double inv_a_hi = 2.1;
  double inv_a_mean = 1.8;
  double eta_lo = 0.07;
  double eta_hi = 0.15;
  double eta_mean = 0.11;
  double gamma = 0.16;
  double epsilon = 1e-6;
  double alpha = 75.0;
  double beta = 0.04;
  double droop_R = 0.05;
  double machine_mva = 1000.0;     ///< machine base before demand scaling
  double load_bus_M = 0.1;         ///< MW*s/Hz on buses without a machine
  double bus_D = 1.0;              ///< MW/Hz on every bus
  double line_base_mva = 100.0;    ///< Y = base / x
  double event_time = 5.0;
  int event_bus = 39;
  double event_delta_p = -400.0;
  double dt = 1e-4;
  double t_end = 120.0;
  double record_every = 1e-2;
};

/// Datacenter buses of the reference instance.
const std::vector<int>& reference_datacenter_buses();

/// Deterministic in `seed`: the same seed and options give the same scenario.
Scenario build_reference_scenario(std::uint64_t seed, const ReferenceOptions& options = {});

/// Uniform draw on [lo, hi) from the top 53 bits of one 64-bit output, so
/// the sequence does not depend on the standard library's distributions.
double uniform_from_bits(std::uint64_t bits, double lo, double hi);

}  // namespace geofc

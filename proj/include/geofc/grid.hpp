#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace geofc {

/// One bus of the lossless network. Power in MW, frequency deviation in Hz.
struct Bus {
  int id = 0;
  double p = 0.0;           ///< frequency-insensitive injection (MW)
  double D = 1.0;           ///< frequency sensitivity (MW/Hz), > 0
  double droop_gain = 0.0;  ///< governor droop 1/R expressed in MW/Hz, >= 0
  double M = 1.0;           ///< inertia (MW*s/Hz), > 0
  std::optional<int> datacenter;  ///< id of the datacenter attached here, if any

  double sensitivity() const { return D + droop_gain; }
};

/// Directed line; Y is the maximum transferable power |V_j||V_k|/x_jk.
struct Line {
  int from = 0;
  int to = 0;
  double Y = 0.0;
};

/// Immutable bus/line topology. Endpoint indices are resolved once at
/// construction so the hot flow evaluation never searches ids.
class Network {
 public:
  Network() = default;
  Network(std::vector<Bus> buses, std::vector<Line> lines, double f0 = 60.0);

  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Line>& lines() const { return lines_; }
  double f0() const { return f0_; }
  std::size_t size() const { return buses_.size(); }

  std::optional<std::size_t> index_of(int bus_id) const;
  /// Throws InvalidInput for unknown ids.
  std::size_t require_index(int bus_id) const;

  /// Resolved (from, to) indices; only meaningful when endpoints_resolved().
  const std::vector<std::pair<std::size_t, std::size_t>>& line_ends() const { return ends_; }
  bool endpoints_resolved() const { return resolved_; }

  /// Per-bus frequency-insensitive injections in bus order.
  std::vector<double> injections() const;
  double total_sensitivity() const;
  double total_line_capacity() const;

 private:
  std::vector<Bus> buses_;
  std::vector<Line> lines_;
  double f0_ = 60.0;
  std::unordered_map<int, std::size_t> index_;
  std::vector<std::pair<std::size_t, std::size_t>> ends_;
  bool resolved_ = false;
};

/// Angles (rad) and frequency deviations (Hz) per bus.
struct GridState {
  std::vector<double> theta;
  std::vector<double> omega;

  static GridState flat(std::size_t n) { return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)}; }
};

struct SwingDerivative {
  std::vector<double> theta_dot;  ///< rad/s
  std::vector<double> omega_dot;  ///< Hz/s
};

/// Net real power flowing out of every bus for the given angles.
std::vector<double> net_flow(const Network& network, std::span<const double> theta);

/// Allocation-free variant used by the integrator; `out` must have bus count entries.
void net_flow_into(const Network& network, std::span<const double> theta, std::span<double> out);

/// P_j = p_j - D_j*omega_j - d_j - droop_gain_j*omega_j
double power_injection(const Bus& bus, double omega_j, double d_j);

/// Right-hand side of the swing dynamics. `bus_loads` holds the controllable
/// load per bus (zero where there is no datacenter); `p` overrides the
/// buses' own injections (used by the simulator after disturbances).
SwingDerivative swing_rhs(const Network& network, const GridState& state, std::span<const double> bus_loads);
SwingDerivative swing_rhs(const Network& network, std::span<const double> p, const GridState& state,
                          std::span<const double> bus_loads);

/// Every violated Bus/Line/Network invariant, one message each. Empty iff valid.
std::vector<std::string> validate_network(const Network& network);

/// Per-unit droop R on a machine rated `rated_mw` -> MW/Hz gain.
double droop_gain_from_per_unit(double rated_mw, double R, double f0);

/// Angles with theta[0] = 0 such that net_flow(theta) equals `target`
/// (which must sum to zero). Newton iteration on the sine flows; throws
/// SolverError when it does not converge or a line exceeds pi/2.
std::vector<double> solve_angles(const Network& network, std::span<const double> target, double tol = 1e-10);

}  // namespace geofc

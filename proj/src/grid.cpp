#include "geofc/grid.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include "geofc/errors.hpp"

namespace geofc {

Network::Network(std::vector<Bus> buses, std::vector<Line> lines, double f0)
    : buses_(std::move(buses)), lines_(std::move(lines)), f0_(f0) {
  for (std::size_t i = 0; i < buses_.size(); ++i) index_.emplace(buses_[i].id, i);
  resolved_ = true;
  ends_.reserve(lines_.size());
  for (const auto& line : lines_) {
    auto from = index_of(line.from);
    auto to = index_of(line.to);
    if (!from || !to) {
      resolved_ = false;
      ends_.emplace_back(0, 0);
      continue;
    }
    ends_.emplace_back(*from, *to);
  }
}

std::optional<std::size_t> Network::index_of(int bus_id) const {
  auto it = index_.find(bus_id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Network::require_index(int bus_id) const {
  auto idx = index_of(bus_id);
  if (!idx) throw InvalidInput("unknown bus id " + std::to_string(bus_id));
  return *idx;
}

std::vector<double> Network::injections() const {
  std::vector<double> p;
  p.reserve(buses_.size());
  for (const auto& b : buses_) p.push_back(b.p);
  return p;
}

double Network::total_sensitivity() const {
  double total = 0.0;
  for (const auto& b : buses_) total += b.sensitivity();
  return total;
}

double Network::total_line_capacity() const {
  double total = 0.0;
  for (const auto& l : lines_) total += l.Y;
  return total;
}

void net_flow_into(const Network& network, std::span<const double> theta, std::span<double> out) {
  if (theta.size() != network.size() || out.size() != network.size()) {
    throw InvalidInput("net_flow: angle vector has " + std::to_string(theta.size()) + " entries, network has " +
                       std::to_string(network.size()) + " buses");
  }
  if (!network.endpoints_resolved()) throw InvalidInput("net_flow: line references an unknown bus");
  std::fill(out.begin(), out.end(), 0.0);
  const auto& lines = network.lines();
  const auto& ends = network.line_ends();
  for (std::size_t e = 0; e < lines.size(); ++e) {
    auto [j, k] = ends[e];
    double flow = lines[e].Y * std::sin(theta[j] - theta[k]);
    out[j] += flow;
    out[k] -= flow;
  }
}

std::vector<double> net_flow(const Network& network, std::span<const double> theta) {
  std::vector<double> out(network.size());
  net_flow_into(network, theta, out);
  return out;
}

double power_injection(const Bus& bus, double omega_j, double d_j) {
  return bus.p - bus.D * omega_j - d_j - bus.droop_gain * omega_j;
}

SwingDerivative swing_rhs(const Network& network, const GridState& state, std::span<const double> bus_loads) {
  auto p = network.injections();
  return swing_rhs(network, p, state, bus_loads);
}

SwingDerivative swing_rhs(const Network& network, std::span<const double> p, const GridState& state,
                          std::span<const double> bus_loads) {
  const std::size_t n = network.size();
  if (state.theta.size() != n || state.omega.size() != n || bus_loads.size() != n || p.size() != n) {
    throw InvalidInput("swing_rhs: dimension mismatch");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(state.theta[j]) || !std::isfinite(state.omega[j])) {
      throw InvalidInput("swing_rhs: non-finite state at bus " + std::to_string(network.buses()[j].id));
    }
  }
  SwingDerivative out{std::vector<double>(n), std::vector<double>(n)};
  net_flow_into(network, state.theta, out.omega_dot);
  const auto& buses = network.buses();
  for (std::size_t j = 0; j < n; ++j) {
    const auto& b = buses[j];
    double injection = p[j] - b.sensitivity() * state.omega[j] - bus_loads[j];
    out.omega_dot[j] = (injection - out.omega_dot[j]) / b.M;
    out.theta_dot[j] = 2.0 * std::numbers::pi * state.omega[j];
  }
  return out;
}

namespace {

bool connected(const Network& network) {
  const std::size_t n = network.size();
  if (n <= 1) return true;
  std::vector<std::vector<std::size_t>> adj(n);
  for (auto [a, b] : network.line_ends()) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  std::size_t count = 1;
  while (!stack.empty()) {
    auto v = stack.back();
    stack.pop_back();
    for (auto w : adj[v]) {
      if (!seen[w]) {
        seen[w] = true;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count == n;
}

}  // namespace

std::vector<std::string> validate_network(const Network& network) {
  std::vector<std::string> diags;
  auto bus_label = [](const Bus& b) { return "bus " + std::to_string(b.id); };

  if (network.size() == 0) diags.emplace_back("network has no buses");
  if (!(network.f0() > 0.0) || !std::isfinite(network.f0())) diags.emplace_back("nominal frequency f0 must be > 0");

  std::set<int> ids;
  for (const auto& b : network.buses()) {
    if (!ids.insert(b.id).second) diags.push_back(bus_label(b) + ": duplicate bus id");
    if (!std::isfinite(b.p)) diags.push_back(bus_label(b) + ": injection p is not finite");
    if (!(b.D > 0.0) || !std::isfinite(b.D)) diags.push_back(bus_label(b) + ": D must be > 0");
    if (!(b.M > 0.0) || !std::isfinite(b.M)) diags.push_back(bus_label(b) + ": inertia M must be > 0");
    if (!(b.droop_gain >= 0.0) || !std::isfinite(b.droop_gain)) {
      diags.push_back(bus_label(b) + ": droop_gain must be >= 0");
    }
  }

  std::set<std::pair<int, int>> seen_pairs;
  for (const auto& l : network.lines()) {
    std::string label = "line " + std::to_string(l.from) + "->" + std::to_string(l.to);
    if (!(l.Y > 0.0) || !std::isfinite(l.Y)) diags.push_back(label + ": Y must be > 0");
    if (l.from == l.to) diags.push_back(label + ": self-loop");
    if (!network.index_of(l.from) || !network.index_of(l.to)) {
      diags.push_back(label + ": endpoint references an unknown bus");
    }
    if (!seen_pairs.insert({l.from, l.to}).second) diags.push_back(label + ": duplicate directed line");
  }

  if (network.endpoints_resolved() && network.size() > 0 && !connected(network)) {
    diags.emplace_back("network graph is not connected");
  }
  return diags;
}

double droop_gain_from_per_unit(double rated_mw, double R, double f0) {
  if (!(R > 0.0) || !(f0 > 0.0)) throw InvalidInput("droop conversion needs R > 0 and f0 > 0");
  return rated_mw / (R * f0);
}

std::vector<double> solve_angles(const Network& network, std::span<const double> target, double tol) {
  const std::size_t n = network.size();
  if (target.size() != n) throw InvalidInput("solve_angles: dimension mismatch");
  std::vector<double> theta(n, 0.0);
  if (n <= 1) return theta;

  double imbalance = std::accumulate(target.begin(), target.end(), 0.0);
  double scale = 1.0;
  for (double t : target) scale += std::abs(t);
  if (std::abs(imbalance) > 1e-9 * scale) {
    std::ostringstream msg;
    msg << "solve_angles: target injections do not balance (sum " << imbalance << " MW)";
    throw InvalidInput(msg.str());
  }

  const auto& lines = network.lines();
  const auto& ends = network.line_ends();
  const Eigen::Index m = static_cast<Eigen::Index>(n - 1);  // bus 0 is the angle reference
  std::vector<double> flow(n);
  for (int iter = 0; iter < 100; ++iter) {
    net_flow_into(network, theta, flow);
    Eigen::VectorXd mismatch(m);
    double worst = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
      mismatch[static_cast<Eigen::Index>(j - 1)] = target[j] - flow[j];
      worst = std::max(worst, std::abs(target[j] - flow[j]));
    }
    if (worst <= tol * scale) {
      for (std::size_t e = 0; e < lines.size(); ++e) {
        auto [a, b] = ends[e];
        if (std::abs(theta[a] - theta[b]) >= std::numbers::pi / 2) {
          throw SolverError("solve_angles: line " + std::to_string(lines[e].from) + "->" +
                            std::to_string(lines[e].to) + " operates beyond pi/2");
        }
      }
      return theta;
    }
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t e = 0; e < lines.size(); ++e) {
      auto [a, b] = ends[e];
      double k = lines[e].Y * std::cos(theta[a] - theta[b]);
      auto ia = static_cast<Eigen::Index>(a) - 1;
      auto ib = static_cast<Eigen::Index>(b) - 1;
      if (ia >= 0) jac(ia, ia) += k;
      if (ib >= 0) jac(ib, ib) += k;
      if (ia >= 0 && ib >= 0) {
        jac(ia, ib) -= k;
        jac(ib, ia) -= k;
      }
    }
    Eigen::VectorXd step = jac.partialPivLu().solve(mismatch);
    if (!step.allFinite()) break;
    // Damp large angle moves so Newton stays inside the monotone region.
    double largest = step.cwiseAbs().maxCoeff();
    double damp = largest > 0.5 ? 0.5 / largest : 1.0;
    for (std::size_t j = 1; j < n; ++j) theta[j] += damp * step[static_cast<Eigen::Index>(j - 1)];
  }
  throw SolverError("solve_angles: power flow did not converge");
}

}  // namespace geofc

#include "geofc/controllers.hpp"

#include <algorithm>
#include <cmath>

#include "geofc/errors.hpp"

namespace geofc {

std::string_view to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::Gfc:
      return "gfc";
    case ControllerKind::Olc:
      return "olc";
    case ControllerKind::DroopOnly:
      return "droop";
  }
  return "unknown";
}

ControllerKind parse_controller_kind(std::string_view text) {
  if (text == "gfc") return ControllerKind::Gfc;
  if (text == "olc") return ControllerKind::Olc;
  if (text == "droop") return ControllerKind::DroopOnly;
  throw InvalidInput("unknown controller kind '" + std::string(text) + "' (expected gfc, olc or droop)");
}

std::string_view to_string(FrequencyMeasurement m) {
  return m == FrequencyMeasurement::Instant ? "instant" : "slot_average";
}

FrequencyMeasurement parse_frequency_measurement(std::string_view text) {
  if (text == "instant") return FrequencyMeasurement::Instant;
  if (text == "slot_average") return FrequencyMeasurement::SlotAverage;
  throw InvalidInput("unknown frequency measurement '" + std::string(text) + "' (expected instant or slot_average)");
}

double gfc_load_command(const Datacenter& dc, double omega_j, double mu_seen, double alpha) {
  double unclamped = indep_marginal_inverse(dc, alpha * omega_j - dc.a * mu_seen);
  return std::clamp(unclamped, dc.d_min, dc.d_max);
}

double olc_load_command(const Datacenter& dc, double omega_j, double alpha) {
  return gfc_load_command(dc, omega_j, 0.0, alpha);
}

double droop_only_command(const Datacenter& dc) { return dc.d_nom; }

double load_command(ControllerKind kind, const Datacenter& dc, double omega_j, double mu_seen, double alpha) {
  switch (kind) {
    case ControllerKind::Gfc:
      return gfc_load_command(dc, omega_j, mu_seen, alpha);
    case ControllerKind::Olc:
      return olc_load_command(dc, omega_j, alpha);
    case ControllerKind::DroopOnly:
      return droop_only_command(dc);
  }
  return dc.d_nom;
}

GfcControllerState::GfcControllerState(double beta, double mu0, double delay, double retention)
    : beta_(beta), delay_(delay), retention_(retention), mu_(mu0) {
  if (!(beta > 0.0)) throw InvalidInput("controller beta must be > 0");
  if (!(delay >= 0.0)) throw InvalidInput("controller delay must be >= 0");
  if (!std::isfinite(mu0)) throw InvalidInput("controller mu0 must be finite");
  history_.push_back({0.0, mu0});
}

GfcControllerState::GfcControllerState(const ControllerConfig& config)
    : GfcControllerState(config.beta, config.mu0, config.delay) {}

double GfcControllerState::mu_at(double t) const {
  if (t < 0.0) throw InvalidInput("mu_at: negative time");
  double target = t - delay_;
  double slack = 1e-9 * std::max(1.0, std::abs(t));
  const auto& front = history_.front();
  if (target < front.time - slack) {
    if (pruned_) throw InvalidInput("mu_at: requested time precedes the retained mu history");
    return front.mu;
  }
  // Latest sample with time <= target.
  auto it = std::upper_bound(history_.begin(), history_.end(), target + slack,
                             [](double value, const Sample& s) { return value < s.time; });
  return std::prev(it)->mu;
}

void GfcControllerState::prune() {
  double keep_from = time_ - delay_ - retention_;
  while (history_.size() >= 2 && history_[1].time <= keep_from) {
    history_.pop_front();
    pruned_ = true;
  }
}

double gfc_mu_step(GfcControllerState& state, const CloudModel& cloud, double s_measured, double dt) {
  if (!(dt > 0.0)) throw InvalidInput("gfc_mu_step: dt must be > 0");
  if (!std::isfinite(s_measured)) throw InvalidInput("gfc_mu_step: non-finite excess compute");
  double mu = state.mu_;
  if (interdep_vanishes(cloud)) {
    // g == 0: the integrator only sees the measured s.
    mu += state.beta_ * s_measured * dt;
  } else {
    double remaining = dt;
    while (remaining > 0.0) {
      double slope = interdep_inverse_slope(cloud, mu);
      double h = remaining;
      if (slope > 0.0) h = std::min(remaining, 0.5 / (state.beta_ * slope));
      mu += state.beta_ * (s_measured - interdep_marginal_inverse(cloud, mu)) * h;
      remaining -= h;
      if (remaining < 1e-15 * dt) break;
    }
  }
  state.mu_ = mu;
  state.time_ += dt;
  state.history_.push_back({state.time_, mu});
  state.prune();
  return mu;
}

}  // namespace geofc

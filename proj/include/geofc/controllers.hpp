#pragma once

#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "geofc/cloud.hpp"

namespace geofc {

enum class ControllerKind { Gfc, Olc, DroopOnly };

std::string_view to_string(ControllerKind kind);
/// Accepts "gfc", "olc", "droop" (case-sensitive). Throws InvalidInput otherwise.
ControllerKind parse_controller_kind(std::string_view text);

/// How a datacenter reads its local frequency at an actuation instant.
///  - Instant: the bus frequency deviation at that moment.
///  - SlotAverage: phase advance over the preceding action period divided by
///    its length (what a zero-crossing meter reports). Only differs from
///    Instant when action_period > 0.
enum class FrequencyMeasurement { Instant, SlotAverage };

std::string_view to_string(FrequencyMeasurement m);
FrequencyMeasurement parse_frequency_measurement(std::string_view text);

struct ControllerConfig {
  ControllerKind kind = ControllerKind::Gfc;
  double beta = 0.5;            ///< mu integrator gain
  double mu0 = 0.0;             ///< initial auxiliary variable ($/MW)
  double delay = 0.0;           ///< broadcast delay of mu (s)
  double action_period = 0.0;   ///< actuation timeslot (s); 0 = every integration step
  double alpha = 75.0;          ///< frequency-cost weight ($/MW-Hz)
  FrequencyMeasurement measurement = FrequencyMeasurement::SlotAverage;
};

/// Load command of the interdependent-cost law:
/// clamp(d_nom + (alpha*omega - a*mu) / eta, d_min, d_max).
double gfc_load_command(const Datacenter& dc, double omega_j, double mu_seen, double alpha);
/// Same law with mu pinned at zero (independent costs only).
double olc_load_command(const Datacenter& dc, double omega_j, double alpha);
double droop_only_command(const Datacenter& dc);

double load_command(ControllerKind kind, const Datacenter& dc, double omega_j, double mu_seen, double alpha);

/// State of the broadcast auxiliary variable mu, owned by one simulation run.
class GfcControllerState {
 public:
  struct Sample {
    double time;
    double mu;
  };

  GfcControllerState(double beta, double mu0, double delay, double retention = 1.0);
  explicit GfcControllerState(const ControllerConfig& config);

  double mu() const { return mu_; }
  double time() const { return time_; }
  double beta() const { return beta_; }
  double delay() const { return delay_; }
  const std::deque<Sample>& history() const { return history_; }

  /// mu as seen by the datacenters at time t: mu(t - delay), zero-order hold
  /// over the recorded samples, mu(0) before the first delay has elapsed.
  double mu_at(double t) const;

  friend double gfc_mu_step(GfcControllerState& state, const CloudModel& cloud, double s_measured, double dt);

 private:
  void prune();

  double beta_;
  double delay_;
  double retention_;
  double mu_;
  double time_ = 0.0;
  bool pruned_ = false;
  std::deque<Sample> history_;
};

/// Explicit-Euler step of d(mu)/dt = beta * (s - (g')^{-1}(mu)). The step is
/// split into substeps no longer than 0.5 / (beta * slope of (g')^{-1}) so
/// the explicit update stays monotone on the stiff epsilon branch; the fixed
/// point mu = g'(s) is unaffected. Returns the new mu.
double gfc_mu_step(GfcControllerState& state, const CloudModel& cloud, double s_measured, double dt);

}  // namespace geofc

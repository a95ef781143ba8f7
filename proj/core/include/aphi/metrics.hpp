#pragma once

// Summary numbers over a SimLog.

#include <optional>
#include <string>
#include <vector>

#include "aphi/sim_engine.hpp"

namespace aphi {

struct MetricsOptions {
  // Logged thrusts within this distance outside [t_min, t_max] still count as
  // in bounds. Raw thrusts are always checked against the exact bounds.
  double thrust_tolerance = 0.05;
  double settle_radius = 0.05;  // m
  double settle_hold = 1.0;     // s
  double steady_window = 1.0;   // s, tail used for steady-state error
};

struct MetricsReport {
  std::size_t rows = 0;
  Vec6 rms_error = Vec6::Zero();        // q - q_d
  Vec6 max_overshoot = Vec6::Zero();    // max |q - q_d|
  Vec6 steady_state_error = Vec6::Zero();  // mean |q_d - q| over the tail
  double thrust_min = 0.0;
  double thrust_max = 0.0;
  double raw_thrust_min = 0.0;
  double raw_thrust_max = 0.0;
  std::size_t violation_steps = 0;
  std::size_t raw_violation_steps = 0;
  std::size_t relaxed_steps = 0;
  std::size_t error_steps = 0;
  std::optional<double> last_relaxed_time;
  double h_min = 0.0;
  double max_contact_force = 0.0;
  double final_position_error = 0.0;  // |p - p_t| on the last row
  std::optional<double> breakaway_time;
  std::optional<double> resettling_time;  // relative to breakaway
  std::optional<double> cart_goal_time;
  bool aborted = false;
  std::string abort_reason;
};

MetricsReport compute_metrics(const SimLog& log, const MetricsOptions& opt = {});

/// First time t >= t0 from which |p - p_t| < radius holds for `hold` seconds.
std::optional<double> settle_time(const SimLog& log, double t0, double radius,
                                  double hold);

/// Flat `key = value` pairs in a fixed order.
std::vector<std::pair<std::string, std::string>> metrics_fields(
    const MetricsReport& m);

}  // namespace aphi

#pragma once

#include <string>
#include <string_view>

#include "aphi/augmented_state.hpp"
#include "aphi/dynamics.hpp"
#include "aphi/observer.hpp"

namespace aphi {

struct ControllerGains {
  Vec6 kp = (Vec6() << 6.0, 6.0, 8.0, 70.0, 70.0, 55.0).finished();
  Vec6 kd = (Vec6() << 4.0, 4.0, 5.0, 30.0, 30.0, 15.0).finished();

  void validate() const;

  bool operator==(const ControllerGains&) const = default;
};

enum class ControllerVariant {
  kNoFilter,
  kDirectClamp,
  kSafetyFilter,
};

/// Canonical names: "no_filter", "direct_clamp", "safety_filter".
std::string to_string(ControllerVariant variant);
/// Accepts the canonical names and the short CLI forms none|clamp|filter.
ControllerVariant parse_controller_variant(std::string_view name);

/// tau = M_hat (K_d e_dot + K_p e) + C_hat + G_hat - d_hat, e = q_d - q.
GeneralizedWrench control_wrench(const Vec6& q, const Vec6& q_dot,
                                 const Vec6& q_d, const Vec6& q_d_dot,
                                 const GeneralizedWrench& d_hat,
                                 const VehicleParams& nominal,
                                 const ControllerGains& gains);

/// Observer estimate, control law and allocation composed over x.
ThrustVector commanded_thrusts(const AugmentedState& x,
                               const VehicleParams& nominal,
                               const Allocation& alloc,
                               const ControllerGains& gains,
                               const ObserverGains& obs_gains);

struct ClampedThrust {
  ThrustVector raw;
  ThrustVector clamped;
};

/// Second baseline: track q_t directly (q_d_dot := 0) and saturate each motor.
ClampedThrust baseline_direct_clamp(const Vec6& q, const Vec6& q_dot,
                                    const Vec6& q_t,
                                    const GeneralizedWrench& d_hat,
                                    const VehicleParams& nominal,
                                    const Allocation& alloc,
                                    const ControllerGains& gains, double t_min,
                                    double t_max);

}  // namespace aphi

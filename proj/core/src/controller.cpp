#include "aphi/controller.hpp"

namespace aphi {

void ControllerGains::validate() const {
  if (!(kp.array() > 0.0).all())
    throw ValidationError("ControllerGains: kp diagonal entries > 0");
  if (!(kd.array() > 0.0).all())
    throw ValidationError("ControllerGains: kd diagonal entries > 0");
}

std::string to_string(ControllerVariant variant) {
  switch (variant) {
    case ControllerVariant::kNoFilter: return "no_filter";
    case ControllerVariant::kDirectClamp: return "direct_clamp";
    case ControllerVariant::kSafetyFilter: return "safety_filter";
  }
  return "unknown";
}

ControllerVariant parse_controller_variant(std::string_view name) {
  if (name == "no_filter" || name == "none") return ControllerVariant::kNoFilter;
  if (name == "direct_clamp" || name == "clamp")
    return ControllerVariant::kDirectClamp;
  if (name == "safety_filter" || name == "filter")
    return ControllerVariant::kSafetyFilter;
  throw ValidationError("ControllerVariant: unknown controller '" +
                        std::string(name) +
                        "' (expected none|clamp|filter)");
}

GeneralizedWrench control_wrench(const Vec6& q, const Vec6& q_dot,
                                 const Vec6& q_d, const Vec6& q_d_dot,
                                 const GeneralizedWrench& d_hat,
                                 const VehicleParams& nominal,
                                 const ControllerGains& gains) {
  const Vec3 phi = q.tail<3>();
  const Vec6 accel = gains.kd.cwiseProduct(q_d_dot - q_dot) +
                     gains.kp.cwiseProduct(q_d - q);
  return {mass_matrix(phi, nominal) * accel +
          coriolis_vector(phi, q_dot.tail<3>(), nominal) +
          gravity_vector(nominal) - d_hat.w};
}

ThrustVector commanded_thrusts(const AugmentedState& x,
                               const VehicleParams& nominal,
                               const Allocation& alloc,
                               const ControllerGains& gains,
                               const ObserverGains& obs_gains) {
  const GeneralizedWrench d_hat =
      disturbance_estimate(x.observer(), x.q_dot, x.phi(), nominal, obs_gains);
  const GeneralizedWrench tau =
      control_wrench(x.q, x.q_dot, x.q_d, x.q_d_dot, d_hat, nominal, gains);
  return wrench_to_thrust(tau, x.phi(), alloc);
}

ClampedThrust baseline_direct_clamp(const Vec6& q, const Vec6& q_dot,
                                    const Vec6& q_t,
                                    const GeneralizedWrench& d_hat,
                                    const VehicleParams& nominal,
                                    const Allocation& alloc,
                                    const ControllerGains& gains, double t_min,
                                    double t_max) {
  const GeneralizedWrench tau_t =
      control_wrench(q, q_dot, q_t, Vec6::Zero(), d_hat, nominal, gains);
  ClampedThrust out;
  out.raw = wrench_to_thrust(tau_t, q.tail<3>(), alloc);
  out.clamped.T = out.raw.T.cwiseMax(t_min).cwiseMin(t_max);
  return out;
}

}  // namespace aphi

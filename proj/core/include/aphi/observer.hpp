#pragma once

// Lumped-disturbance observer built from two first-order filters: zeta tracks
// q_dot and chi tracks M_hat^-1 tau.

#include "aphi/dynamics.hpp"
#include "aphi/types.hpp"

namespace aphi {

struct ObserverState {
  Vec6 zeta = Vec6::Zero();
  Vec6 chi = Vec6::Zero();
};

struct ObserverGains {
  Vec6 gamma_zeta = (Vec6() << 1.0, 1.0, 1.0, 0.10, 0.10, 0.50).finished();
  Vec6 gamma_chi = (Vec6() << 1.0, 1.0, 1.0, 0.10, 0.10, 0.50).finished();
  Vec6 mu = (Vec6() << 0.95, 0.95, 0.95, 0.80, 0.80, 0.95).finished();

  /// mu^-1 Gamma_zeta as a diagonal.
  Vec6 zeta_rate() const { return gamma_zeta.cwiseQuotient(mu); }
  /// mu^-1 Gamma_chi as a diagonal.
  Vec6 chi_rate() const { return gamma_chi.cwiseQuotient(mu); }

  void validate() const;

  bool operator==(const ObserverGains&) const = default;
};

struct ObserverRates {
  Vec6 zeta_dot;
  Vec6 chi_dot;
};

GeneralizedWrench disturbance_estimate(const ObserverState& obs,
                                       const Vec6& q_dot, const Vec3& phi,
                                       const VehicleParams& nominal,
                                       const ObserverGains& gains);

ObserverRates observer_rates(const ObserverState& obs, const Vec6& q_dot,
                             const GeneralizedWrench& tau, const Vec3& phi,
                             const VehicleParams& nominal,
                             const ObserverGains& gains);

/// Start-up state for which the estimate is exactly zero: zeta = q_dot and
/// chi = M_hat^-1 (C_hat + G_hat).
ObserverState initial_observer_state(const PlantState& plant,
                                     const VehicleParams& nominal);

}  // namespace aphi

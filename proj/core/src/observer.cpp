#include "aphi/observer.hpp"

#include <Eigen/LU>

namespace aphi {

void ObserverGains::validate() const {
  if (!(gamma_zeta.array() > 0.0).all())
    throw ValidationError("ObserverGains: gamma_zeta diagonal entries > 0");
  if (!(gamma_chi.array() > 0.0).all())
    throw ValidationError("ObserverGains: gamma_chi diagonal entries > 0");
  if (!((mu.array() > 0.0) && (mu.array() < 1.0)).all())
    throw ValidationError("ObserverGains: 0 < mu_i < 1");
}

GeneralizedWrench disturbance_estimate(const ObserverState& obs,
                                       const Vec6& q_dot, const Vec3& phi,
                                       const VehicleParams& nominal,
                                       const ObserverGains& gains) {
  const Vec6 filtered =
      gains.zeta_rate().cwiseProduct(obs.zeta - q_dot) + obs.chi;
  return {-mass_matrix(phi, nominal) * filtered +
          coriolis_vector(phi, q_dot.tail<3>(), nominal) +
          gravity_vector(nominal)};
}

ObserverRates observer_rates(const ObserverState& obs, const Vec6& q_dot,
                             const GeneralizedWrench& tau, const Vec3& phi,
                             const VehicleParams& nominal,
                             const ObserverGains& gains) {
  const Vec6 accel = mass_matrix(phi, nominal).partialPivLu().solve(tau.w);
  return {-gains.zeta_rate().cwiseProduct(obs.zeta - q_dot),
          -gains.chi_rate().cwiseProduct(obs.chi - accel)};
}

ObserverState initial_observer_state(const PlantState& plant,
                                     const VehicleParams& nominal) {
  const Vec3 phi = plant.phi();
  const Vec6 bias =
      coriolis_vector(phi, plant.phi_dot(), nominal) + gravity_vector(nominal);
  return {plant.q_dot, mass_matrix(phi, nominal).partialPivLu().solve(bias)};
}

}  // namespace aphi

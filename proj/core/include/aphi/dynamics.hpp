#pragma once

// Euler-Lagrange model of a fully actuated hexarotor carrying a rigid arm.
//
// Generalized coordinates are q = [p; phi] with p the body origin in the world
// frame and phi = [roll; pitch; yaw] ZYX Euler angles, R = Rz(yaw) Ry(pitch)
// Rx(roll). Body angular velocity is omega = Q(phi) phi_dot.

#include "aphi/types.hpp"

namespace aphi {

/// Pitch may not come closer than this to +-pi/2.
inline constexpr double kSingularityMargin = 1e-6;

struct VehicleParams {
  double m = 3.50;
  Mat3 J = Vec3(0.035, 0.035, 0.045).asDiagonal();
  double L = 0.275;
  double alpha = 0.26179938779914941;  // 15 deg
  double k_f = 0.016;
  double g = 9.81;

  double p1() const;
  double p2() const;

  /// Throws ValidationError naming the first violated invariant.
  void validate() const;

  bool operator==(const VehicleParams&) const = default;
};

struct PlantState {
  Vec6 q = Vec6::Zero();
  Vec6 q_dot = Vec6::Zero();

  Vec3 p() const { return q.head<3>(); }
  Vec3 phi() const { return q.tail<3>(); }
  Vec3 phi_dot() const { return q_dot.tail<3>(); }
};

/// Throws SingularAttitude if pitch is within kSingularityMargin of +-pi/2.
void check_attitude(const Vec3& phi);

Mat3 rotation_matrix(const Vec3& phi);
/// dR/dphi_axis.
Mat3 rotation_matrix_partial(const Vec3& phi, int axis);

Mat3 euler_rate_map(const Vec3& phi);
/// dQ/dphi_axis.
Mat3 euler_rate_map_partial(const Vec3& phi, int axis);
/// dQ/dt along phi_dot.
Mat3 euler_rate_map_dot(const Vec3& phi, const Vec3& phi_dot);

/// B(phi) = blkdiag{R, Q^T}.
Mat6 input_map(const Vec3& phi);
/// B(phi)^-1 = blkdiag{R^T, Q^-T}.
Mat6 input_map_inverse(const Vec3& phi);

Mat6 mass_matrix(const Vec3& phi, const VehicleParams& params);
Vec6 coriolis_vector(const Vec3& phi, const Vec3& phi_dot,
                     const VehicleParams& params);
Vec6 gravity_vector(const VehicleParams& params);

/// The constant thrust-to-body-wrench map Xi.
Mat6 allocation_matrix(const VehicleParams& params);

/// Xi together with its inverse. Construction throws NonInvertibleAllocation
/// when the condition number exceeds 1e12.
class Allocation {
 public:
  explicit Allocation(const VehicleParams& params);

  const Mat6& matrix() const { return xi_; }
  const Mat6& inverse() const { return xi_inv_; }
  double condition_number() const { return cond_; }

 private:
  Mat6 xi_;
  Mat6 xi_inv_;
  double cond_;
};

GeneralizedWrench thrust_to_wrench(const ThrustVector& thrust, const Vec3& phi,
                                   const Allocation& alloc);
GeneralizedWrench thrust_to_wrench(const ThrustVector& thrust, const Vec3& phi,
                                   const VehicleParams& params);

ThrustVector wrench_to_thrust(const GeneralizedWrench& tau, const Vec3& phi,
                              const Allocation& alloc);
ThrustVector wrench_to_thrust(const GeneralizedWrench& tau, const Vec3& phi,
                              const VehicleParams& params);

/// q_ddot = M^-1 (tau + tau_ext - C - G).
Vec6 forward_dynamics(const PlantState& state, const GeneralizedWrench& tau,
                      const GeneralizedWrench& tau_ext,
                      const VehicleParams& params);

/// Kinetic plus gravitational potential energy.
double total_energy(const PlantState& state, const VehicleParams& params);

Mat3 skew(const Vec3& v);

}  // namespace aphi

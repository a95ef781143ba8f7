#pragma once

// Thrust-limit safety filter.
//
// Each motor thrust T_i(x) gets a barrier h_i = (half range)^2 - (T_i - mid)^2
// which is nonnegative exactly when T_m <= T_i <= T_M. The filter chooses the
// desired acceleration q_dd_d closest to the target acceleration subject to
//
//   L_f h_i + L_g h_i q_dd_d + beta_hat_i + gamma_i h_i >= sigma_i,
//
// where beta_hat estimates the disturbance-dependent part of h_dot that the
// model cannot see.

#include "aphi/augmented_state.hpp"
#include "aphi/controller.hpp"
#include "aphi/dynamics.hpp"
#include "aphi/observer.hpp"
#include "aphi/qp_solver.hpp"

namespace aphi {

struct BarrierConfig {
  double t_min = 1.0;
  double t_max = 15.0;
  Vec6 gamma = Vec6::Constant(10.0);
  Vec6 k_beta = Vec6::Constant(10.1);
  Vec6 sigma = Vec6::Constant(15.0);

  double midpoint() const { return 0.5 * (t_max + t_min); }
  double half_range() const { return 0.5 * (t_max - t_min); }

  void validate() const;

  bool operator==(const BarrierConfig&) const = default;
};

struct ResidualState {
  Vec6 xi = Vec6::Zero();
};

struct TargetGenConfig {
  Vec6 k_a = (Vec6() << 1.0, 1.0, 1.0, 5.0, 5.0, 1.0).finished();
  double delta_min = 1.0;
  double delta_max = 5.0;
  double k_dp = 0.5;

  void validate() const;

  bool operator==(const TargetGenConfig&) const = default;
};

/// Everything the filter needs to evaluate T(x) and its derivatives.
struct SafetyModel {
  SafetyModel(const VehicleParams& nominal, const ControllerGains& gains,
              const ObserverGains& obs, const BarrierConfig& barrier);

  VehicleParams nominal;
  Allocation alloc;
  ControllerGains gains;
  ObserverGains obs;
  BarrierConfig barrier;
};

Vec6 barrier_values(const ThrustVector& thrust, const BarrierConfig& cfg);

/// T(x): observer estimate, control law and allocation composed.
ThrustVector thrust_of_state(const AugmentedState& x, const SafetyModel& model);

/// Closed-loop drift f(x) of x_dot = f(x) + g q_dd_d + rho(x, d_tilde).
Vec36 drift(const AugmentedState& x, const ControllerGains& gains,
            const ObserverGains& obs);

/// J_a(phi) = Xi^-1 B^-1(phi) M_hat(phi).
Mat6 actuation_jacobian(const Vec3& phi, const SafetyModel& model);
/// dJ_a/dphi_axis.
Mat6 actuation_jacobian_partial(const Vec3& phi, int axis,
                                const SafetyModel& model);

/// dT/dx, blocks ordered as x.
Mat6x36 thrust_state_jacobian(const AugmentedState& x, const SafetyModel& model);

struct LieDerivatives {
  ThrustVector thrust;  // T(x)
  Vec6 h;               // barrier values at T(x)
  Vec6 lf;              // L_f h_i
  Mat6 lg;              // row i is L_g h_i
};

LieDerivatives lie_derivatives(const AugmentedState& x, const SafetyModel& model);

/// beta_hat_i = k_beta_i h_i - xi_i.
Vec6 residual_estimate(const Vec6& h, const ResidualState& res,
                       const BarrierConfig& cfg);

/// xi_dot_i = k_beta_i (L_f h_i + L_g h_i q_dd_d + beta_hat_i).
Vec6 residual_state_rate(const LieDerivatives& lie, const ResidualState& res,
                         const Vec6& q_dd_d, const BarrierConfig& cfg);

/// xi(t0) = k_beta h(x(t0)), so beta_hat starts at zero.
ResidualState initial_residual_state(const Vec6& h, const BarrierConfig& cfg);

/// beta_i = dh_i/dx rho(x, d_tilde) with d_tilde = d - d_hat; only available
/// when the true lumped disturbance is known (simulation diagnostics).
Vec6 residual_true(const AugmentedState& x, const Vec6& d_tilde,
                   const SafetyModel& model);

/// Per-axis damping ratio, saturating from delta_min to delta_max as
/// |q_d - q_t| grows.
Vec6 damping_ratio(const Vec6& q_t, const Vec6& q_d, const TargetGenConfig& cfg);

/// Critically-shaped second-order pull of q_d toward q_t.
Vec6 target_acceleration(const Vec6& q_t, const Vec6& q_d, const Vec6& q_d_dot,
                         const TargetGenConfig& cfg);

/// A = -[L_g h_1; ...; L_g h_6], b = gamma h + L_f h + beta_hat - sigma.
QpProblem assemble_qp(const LieDerivatives& lie, const Vec6& beta_hat,
                      const Vec6& q_dd_t, const BarrierConfig& cfg);

struct FilterOutput {
  Vec6 q_dd_d;
  Vec6 q_dd_t;
  QpStatus status = QpStatus::kOptimal;
  double slack_norm = 0.0;
  LieDerivatives lie;
  Vec6 beta_hat;
};

/// One control-rate evaluation: target acceleration, QP assembly and solve.
/// An infeasible QP is relaxed with slacks and flagged, never thrown.
FilterOutput filter_step(const AugmentedState& x, const ResidualState& res,
                         const Vec6& q_t, const SafetyModel& model,
                         const TargetGenConfig& gen);

}  // namespace aphi

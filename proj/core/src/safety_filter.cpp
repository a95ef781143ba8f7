#include "aphi/safety_filter.hpp"

#include <cmath>

#include <Eigen/LU>

namespace aphi {

void BarrierConfig::validate() const {
  if (!(t_min < t_max)) throw ValidationError("BarrierConfig: t_min < t_max");
  if (!(gamma.array() > 0.0).all())
    throw ValidationError("BarrierConfig: gamma_i > 0");
  if (!(k_beta.array() > gamma.array()).all())
    throw ValidationError("BarrierConfig: k_beta_i > gamma_i");
  if (!(sigma.array() > 0.0).all())
    throw ValidationError("BarrierConfig: sigma_i > 0");
}

void TargetGenConfig::validate() const {
  if (!(k_a.array() > 0.0).all())
    throw ValidationError("TargetGenConfig: k_a_i > 0");
  if (!(delta_min > 0.0 && delta_min <= delta_max))
    throw ValidationError("TargetGenConfig: 0 < delta_min <= delta_max");
  if (!(k_dp >= 0.0)) throw ValidationError("TargetGenConfig: k_dp >= 0");
}

SafetyModel::SafetyModel(const VehicleParams& nominal_,
                         const ControllerGains& gains_,
                         const ObserverGains& obs_,
                         const BarrierConfig& barrier_)
    : nominal(nominal_),
      alloc(nominal_),
      gains(gains_),
      obs(obs_),
      barrier(barrier_) {}

Vec6 barrier_values(const ThrustVector& thrust, const BarrierConfig& cfg) {
  const double half = cfg.half_range();
  return (Vec6::Constant(half * half).array() -
          (thrust.T.array() - cfg.midpoint()).square())
      .matrix();
}

ThrustVector thrust_of_state(const AugmentedState& x, const SafetyModel& model) {
  return commanded_thrusts(x, model.nominal, model.alloc, model.gains,
                           model.obs);
}

namespace {

// K_d e_dot + K_p e: the nominal closed-loop acceleration.
Vec6 nominal_accel(const AugmentedState& x, const ControllerGains& gains) {
  return gains.kd.cwiseProduct(x.q_d_dot - x.q_dot) +
         gains.kp.cwiseProduct(x.q_d - x.q);
}

}  // namespace

Vec36 drift(const AugmentedState& x, const ControllerGains& gains,
            const ObserverGains& obs) {
  const Vec6 accel = nominal_accel(x, gains);
  const Vec6 zeta_term = obs.zeta_rate().cwiseProduct(x.zeta - x.q_dot);
  Vec36 f;
  f << x.q_dot, accel, -zeta_term,
      obs.chi_rate().cwiseProduct(accel + zeta_term), x.q_d_dot, Vec6::Zero();
  return f;
}

Mat6 actuation_jacobian(const Vec3& phi, const SafetyModel& model) {
  // B^-1 M_hat = blkdiag{m_hat R^T, J_hat Q}
  Mat6 blk = Mat6::Zero();
  blk.topLeftCorner<3, 3>() = model.nominal.m * rotation_matrix(phi).transpose();
  blk.bottomRightCorner<3, 3>() = model.nominal.J * euler_rate_map(phi);
  return model.alloc.inverse() * blk;
}

Mat6 actuation_jacobian_partial(const Vec3& phi, int axis,
                                const SafetyModel& model) {
  Mat6 blk = Mat6::Zero();
  blk.topLeftCorner<3, 3>() =
      model.nominal.m * rotation_matrix_partial(phi, axis).transpose();
  blk.bottomRightCorner<3, 3>() =
      model.nominal.J * euler_rate_map_partial(phi, axis);
  return model.alloc.inverse() * blk;
}

Mat6x36 thrust_state_jacobian(const AugmentedState& x,
                              const SafetyModel& model) {
  const Vec3 phi = x.phi();
  const Mat6 ja = actuation_jacobian(phi, model);
  const Vec6 zr = model.obs.zeta_rate();
  const auto& kp = model.gains.kp;
  const auto& kd = model.gains.kd;

  // T = J_a(phi) v with v = K_d e_dot + K_p e + mu^-1 Gamma_zeta (zeta - q_dot)
  // + chi, so dT/dphi_i = (dJ_a/dphi_i) v = (dJ_a/dphi_i) J_a^-1 T.
  const Vec6 v = nominal_accel(x, model.gains) +
                 zr.cwiseProduct(x.zeta - x.q_dot) + x.chi;

  Mat6x36 jac;
  Mat6 dq = -ja * kp.asDiagonal();
  for (int i = 0; i < 3; ++i)
    dq.col(3 + i) += actuation_jacobian_partial(phi, i, model) * v;
  jac.block<6, 6>(0, 0) = dq;
  jac.block<6, 6>(0, 6) = -ja * (kd + zr).asDiagonal();
  jac.block<6, 6>(0, 12) = ja * zr.asDiagonal();
  jac.block<6, 6>(0, 18) = ja;
  jac.block<6, 6>(0, 24) = ja * kp.asDiagonal();
  jac.block<6, 6>(0, 30) = ja * kd.asDiagonal();
  return jac;
}

LieDerivatives lie_derivatives(const AugmentedState& x,
                               const SafetyModel& model) {
  LieDerivatives out;
  out.thrust = thrust_of_state(x, model);
  out.h = barrier_values(out.thrust, model.barrier);
  const Vec6 scale =
      -2.0 * (out.thrust.T.array() - model.barrier.midpoint()).matrix();
  const Mat6x36 jac = thrust_state_jacobian(x, model);
  out.lf = scale.cwiseProduct(jac * drift(x, model.gains, model.obs));
  out.lg = scale.asDiagonal() *
           (actuation_jacobian(x.phi(), model) * model.gains.kd.asDiagonal());
  return out;
}

Vec6 residual_estimate(const Vec6& h, const ResidualState& res,
                       const BarrierConfig& cfg) {
  return cfg.k_beta.cwiseProduct(h) - res.xi;
}

Vec6 residual_state_rate(const LieDerivatives& lie, const ResidualState& res,
                         const Vec6& q_dd_d, const BarrierConfig& cfg) {
  const Vec6 beta_hat = residual_estimate(lie.h, res, cfg);
  return cfg.k_beta.cwiseProduct(lie.lf + lie.lg * q_dd_d + beta_hat);
}

ResidualState initial_residual_state(const Vec6& h, const BarrierConfig& cfg) {
  return {cfg.k_beta.cwiseProduct(h)};
}

Vec6 residual_true(const AugmentedState& x, const Vec6& d_tilde,
                   const SafetyModel& model) {
  const ThrustVector thrust = thrust_of_state(x, model);
  const Vec6 scale =
      -2.0 * (thrust.T.array() - model.barrier.midpoint()).matrix();
  // rho enters only the q_dot rows: M_hat^-1 d_tilde.
  const Vec6 rho = mass_matrix(x.phi(), model.nominal).partialPivLu().solve(d_tilde);
  const Mat6 dT_dqdot = -actuation_jacobian(x.phi(), model) *
                        (model.gains.kd + model.obs.zeta_rate()).asDiagonal();
  return scale.cwiseProduct(dT_dqdot * rho);
}

Vec6 damping_ratio(const Vec6& q_t, const Vec6& q_d,
                   const TargetGenConfig& cfg) {
  const Eigen::Array<double, 6, 1> gap = cfg.k_dp * (q_d - q_t).array().abs();
  return (cfg.delta_min +
          (gap / (1.0 + gap)) * (cfg.delta_max - cfg.delta_min))
      .matrix();
}

Vec6 target_acceleration(const Vec6& q_t, const Vec6& q_d, const Vec6& q_d_dot,
                         const TargetGenConfig& cfg) {
  const Vec6 delta = damping_ratio(q_t, q_d, cfg);
  return (-2.0 * cfg.k_a.array() * delta.array() * q_d_dot.array() -
          cfg.k_a.array().square() * (q_d - q_t).array())
      .matrix();
}

QpProblem assemble_qp(const LieDerivatives& lie, const Vec6& beta_hat,
                      const Vec6& q_dd_t, const BarrierConfig& cfg) {
  QpProblem qp;
  qp.u_t = q_dd_t;
  qp.A = -lie.lg;
  qp.b = cfg.gamma.cwiseProduct(lie.h) + lie.lf + beta_hat - cfg.sigma;
  return qp;
}

FilterOutput filter_step(const AugmentedState& x, const ResidualState& res,
                         const Vec6& q_t, const SafetyModel& model,
                         const TargetGenConfig& gen) {
  FilterOutput out;
  out.q_dd_t = target_acceleration(q_t, x.q_d, x.q_d_dot, gen);
  out.lie = lie_derivatives(x, model);
  out.beta_hat = residual_estimate(out.lie.h, res, model.barrier);
  const QpProblem qp = assemble_qp(out.lie, out.beta_hat, out.q_dd_t, model.barrier);
  const QpSolution sol = solve_with_relaxation(qp);
  out.q_dd_d = sol.u;
  out.status = sol.status;
  out.slack_norm = sol.slack_norm;
  return out;
}

}  // namespace aphi

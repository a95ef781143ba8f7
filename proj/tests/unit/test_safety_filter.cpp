#include <cmath>
#include <random>

#include <Eigen/LU>
#include <gtest/gtest.h>

#include "aphi/safety_filter.hpp"
#include "oracles.hpp"

namespace aphi {
namespace {

using testing::fd_jacobian;
using testing::max_rel_err;
using testing::random_state;

SafetyModel default_model() { return SafetyModel({}, {}, {}, {}); }

Vec6 h_of(const AugmentedState& x, const SafetyModel& m) {
  return barrier_values(thrust_of_state(x, m), m.barrier);
}

// x_dot = f(x) + g u with d_tilde = 0; u only drives the q_d_dot rows.
Vec36 closed_loop_rate(const Vec36& v, const Vec6& u, const SafetyModel& m) {
  Vec36 r = drift(AugmentedState::from_vector(v), m.gains, m.obs);
  r.tail<6>() += u;
  return r;
}

Vec36 rk4(const Vec36& v, const Vec6& u, double dt, const SafetyModel& m) {
  const Vec36 k1 = closed_loop_rate(v, u, m);
  const Vec36 k2 = closed_loop_rate(v + 0.5 * dt * k1, u, m);
  const Vec36 k3 = closed_loop_rate(v + 0.5 * dt * k2, u, m);
  const Vec36 k4 = closed_loop_rate(v + dt * k3, u, m);
  return v + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
}

// State with every thrust at the given values and zero tracking error.
AugmentedState state_with_thrusts(const Vec6& thrusts, const Vec3& phi,
                                  const SafetyModel& m) {
  AugmentedState x;
  x.q << 0.1, -0.2, 1.0, phi;
  x.q_d = x.q;
  x.chi = actuation_jacobian(phi, m).partialPivLu().solve(thrusts);
  return x;
}

TEST(BarrierValues, TableExamples) {
  const BarrierConfig cfg;
  const Vec6 h =
      barrier_values(ThrustVector{(Vec6() << 8, 1, 15, 16, 0, 4).finished()}, cfg);
  EXPECT_DOUBLE_EQ(h[0], 49.0);
  EXPECT_DOUBLE_EQ(h[1], 0.0);
  EXPECT_DOUBLE_EQ(h[2], 0.0);
  EXPECT_DOUBLE_EQ(h[3], -15.0);
  EXPECT_DOUBLE_EQ(h[4], -15.0);
  EXPECT_DOUBLE_EQ(h[5], 33.0);
}

TEST(BarrierValues, NonnegativeExactlyInsideBounds) {
  const BarrierConfig cfg;
  for (double t = -5.0; t <= 20.0; t += 0.125) {
    const double h = barrier_values(ThrustVector{Vec6::Constant(t)}, cfg)[0];
    EXPECT_EQ(h >= 0.0, t >= cfg.t_min && t <= cfg.t_max) << t;
  }
}

TEST(ThrustStateJacobian, MatchesFiniteDifferences) {
  const SafetyModel m = default_model();
  std::mt19937_64 rng(41);
  auto t_of = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return thrust_of_state(AugmentedState::from_vector(v), m).T;
  };
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const AugmentedState x = random_state(rng);
    const Mat6x36 jac = thrust_state_jacobian(x, m);
    const Eigen::MatrixXd fd = fd_jacobian(t_of, x.to_vector(), 1e-6);
    worst = std::max(worst, max_rel_err(jac, fd, 1e-7));
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(ThrustStateJacobian, MatchesFiniteDifferencesAtHover) {
  const SafetyModel m = default_model();
  const AugmentedState x = state_with_thrusts(
      Vec6::Constant(5.9243679423967), Vec3::Zero(), m);
  auto t_of = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return thrust_of_state(AugmentedState::from_vector(v), m).T;
  };
  const Eigen::MatrixXd fd = fd_jacobian(t_of, x.to_vector(), 1e-6);
  EXPECT_LT(max_rel_err(thrust_state_jacobian(x, m), fd, 1e-7), 1e-4);
}

TEST(ThrustStateJacobian, StructuralBlocks) {
  const SafetyModel m = default_model();
  std::mt19937_64 rng(42);
  for (int k = 0; k < 20; ++k) {
    const AugmentedState x = random_state(rng);
    const Mat6 ja = actuation_jacobian(x.phi(), m);
    const Mat6x36 jac = thrust_state_jacobian(x, m);
    EXPECT_EQ(Mat6(jac.block<6, 6>(0, 30)), Mat6(ja * m.gains.kd.asDiagonal()));
    EXPECT_EQ(Mat6(jac.block<6, 6>(0, 18)), ja);
    const Eigen::Matrix<double, 6, 3> trans = jac.block<6, 3>(0, 0);
    const Eigen::Matrix<double, 6, 3> expect =
        (-ja * m.gains.kp.asDiagonal()).leftCols<3>();
    EXPECT_LT((trans - expect).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(ActuationJacobian, PartialMatchesFiniteDifferences) {
  const SafetyModel m = default_model();
  const Vec3 phi(0.2, -0.3, 0.4);
  for (int axis = 0; axis < 3; ++axis) {
    const double h = 1e-6;
    Vec3 pp = phi, pm = phi;
    pp[axis] += h;
    pm[axis] -= h;
    const Mat6 fd = (actuation_jacobian(pp, m) - actuation_jacobian(pm, m)) / (2 * h);
    EXPECT_LT(max_rel_err(actuation_jacobian_partial(phi, axis, m), fd, 1e-8), 1e-6)
        << "axis " << axis;
  }
}

TEST(LieDerivatives, VanishAtMidpoint) {
  const SafetyModel m = default_model();
  Vec6 thrusts = Vec6::Constant(6.0);
  thrusts[2] = 8.0;
  thrusts[4] = 8.0;
  AugmentedState x = state_with_thrusts(thrusts, Vec3(0.1, 0.05, -0.2), m);
  x.q_dot << 0.3, -0.1, 0.2, 0.1, -0.2, 0.05;
  x.zeta = x.q_dot;
  // Restore T after the velocity change: T = J_a (K_d (-q_dot) + chi).
  x.chi = actuation_jacobian(x.phi(), m).partialPivLu().solve(thrusts) +
          m.gains.kd.cwiseProduct(x.q_dot);
  const LieDerivatives lie = lie_derivatives(x, m);
  ASSERT_LT((lie.thrust.T - thrusts).cwiseAbs().maxCoeff(), 1e-12);
  for (int i : {2, 4}) {
    EXPECT_NEAR(lie.h[i], 49.0, 1e-10);
    EXPECT_LT(std::abs(lie.lf[i]), 1e-9);
    EXPECT_LT(lie.lg.row(i).cwiseAbs().maxCoeff(), 1e-9);
  }
  EXPECT_GT(lie.lg.row(0).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(LieDerivatives, MatchTrajectoryFiniteDifferences) {
  const SafetyModel m = default_model();
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> ud(-2.0, 2.0);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const AugmentedState x = random_state(rng);
    Vec6 u;
    for (int i = 0; i < 6; ++i) u[i] = ud(rng);
    const LieDerivatives lie = lie_derivatives(x, m);
    const Vec6 model_rate = lie.lf + lie.lg * u;
    const double dt = 1e-5;
    const Vec36 v = x.to_vector();
    const Vec6 hp = h_of(AugmentedState::from_vector(rk4(v, u, dt, m)), m);
    const Vec6 hm = h_of(AugmentedState::from_vector(rk4(v, u, -dt, m)), m);
    const Vec6 fd = (hp - hm) / (2 * dt);
    worst = std::max(worst, max_rel_err(model_rate, fd, 1e-5));
  }
  EXPECT_LT(worst, 1e-3);
}

TEST(LieDerivatives, DriftStructuralZeros) {
  const SafetyModel m = default_model();
  std::mt19937_64 rng(44);
  AugmentedState x = random_state(rng);
  x.q_d = x.q;
  x.q_d_dot = x.q_dot;
  x.zeta = x.q_dot;
  const Vec36 f = drift(x, m.gains, m.obs);
  EXPECT_EQ(Vec6(f.segment<6>(6)), Vec6::Zero());
  EXPECT_EQ(Vec6(f.segment<6>(12)), Vec6::Zero());
  EXPECT_EQ(Vec6(f.segment<6>(18)), Vec6::Zero());
  EXPECT_EQ(Vec6(f.segment<6>(0)), x.q_dot);
  EXPECT_EQ(Vec6(f.segment<6>(24)), x.q_dot);
}

// beta = dh/dx rho, rho = M_hat^-1 d_tilde in the q_dot rows.
TEST(ResidualTrue, MatchesDirectionalDerivative) {
  const SafetyModel m = default_model();
  std::mt19937_64 rng(45);
  std::uniform_real_distribution<double> ud(-3.0, 3.0);
  for (int k = 0; k < 50; ++k) {
    const AugmentedState x = random_state(rng);
    Vec6 d;
    for (int i = 0; i < 6; ++i) d[i] = ud(rng);
    d.tail<3>() *= 0.1;
    const Vec6 rho = mass_matrix(x.phi(), m.nominal).partialPivLu().solve(d);
    const double eps = 1e-6;
    AugmentedState xp = x, xm = x;
    xp.q_dot += eps * rho;
    xm.q_dot -= eps * rho;
    const Vec6 fd = (h_of(xp, m) - h_of(xm, m)) / (2 * eps);
    EXPECT_LT(max_rel_err(residual_true(x, d, m), fd, 1e-6), 1e-5);
  }
}

TEST(ResidualEstimate, Examples) {
  const BarrierConfig cfg;
  const Vec6 h = Vec6::Constant(49.0);
  EXPECT_EQ(residual_estimate(h, initial_residual_state(h, cfg), cfg), Vec6::Zero());
  const Vec6 beta = residual_estimate(h, ResidualState{Vec6::Constant(400.0)}, cfg);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(beta[i], 94.9, 1e-12);
}

TEST(ResidualStateRate, ZeroCases) {
  BarrierConfig cfg;
  LieDerivatives lie;
  lie.h = Vec6::Constant(30.0);
  lie.lf = Vec6::Zero();
  lie.lg = Mat6::Zero();
  const ResidualState res = initial_residual_state(lie.h, cfg);
  EXPECT_EQ(residual_state_rate(lie, res, Vec6::Ones(), cfg), Vec6::Zero());

  lie.lf = Vec6::LinSpaced(1.0, 6.0);
  lie.lg = Mat6::Identity();
  cfg.k_beta = Vec6::Zero();
  EXPECT_EQ(residual_state_rate(lie, ResidualState{Vec6::Constant(7.0)},
                                Vec6::Ones(), cfg),
            Vec6::Zero());
}

TEST(ResidualStateRate, TermByTerm) {
  const BarrierConfig cfg;
  LieDerivatives lie;
  lie.h = Vec6::LinSpaced(10.0, 40.0);
  lie.lf = Vec6::LinSpaced(-3.0, 2.0);
  lie.lg = Mat6::Identity() * 0.5;
  const ResidualState res{Vec6::Constant(100.0)};
  const Vec6 u = Vec6::LinSpaced(1.0, -1.0);
  const Vec6 rate = residual_state_rate(lie, res, u, cfg);
  for (int i = 0; i < 6; ++i) {
    const double beta = 10.1 * lie.h[i] - 100.0;
    EXPECT_NEAR(rate[i], 10.1 * (lie.lf[i] + 0.5 * u[i] + beta), 1e-10);
  }
}

TEST(TargetAcceleration, RestAtTarget) {
  const Vec6 q = Vec6::LinSpaced(-1.0, 1.0);
  EXPECT_EQ(target_acceleration(q, q, Vec6::Zero(), TargetGenConfig{}), Vec6::Zero());
}

TEST(TargetAcceleration, WorkedExample) {
  TargetGenConfig cfg;
  cfg.k_a = Vec6::Ones();
  cfg.k_dp = 0.5;
  // Gap of 2 with q_d ahead of q_t, moving away at unit rate.
  const Vec6 q_t = Vec6::Zero();
  const Vec6 q_d = Vec6::Constant(2.0);
  EXPECT_NEAR(damping_ratio(q_t, q_d, cfg)[0], 3.0, 1e-15);
  const Vec6 acc = target_acceleration(q_t, q_d, Vec6::Ones(), cfg);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(acc[i], -8.0, 1e-12);
}

TEST(TargetAcceleration, PullsTowardTarget) {
  const TargetGenConfig cfg;
  const Vec6 q_t = Vec6::Ones();
  const Vec6 acc = target_acceleration(q_t, Vec6::Zero(), Vec6::Zero(), cfg);
  EXPECT_TRUE((acc.array() > 0.0).all());
}

TEST(DampingRatio, BoundedAndMonotone) {
  TargetGenConfig cfg;
  for (double kdp : {0.0, 0.5, 5.0}) {
    cfg.k_dp = kdp;
    double prev = -1.0;
    for (double gap = 0.0; gap <= 100.0; gap += 0.01) {
      const double d = damping_ratio(Vec6::Zero(), Vec6::Constant(gap), cfg)[0];
      EXPECT_GE(d, cfg.delta_min);
      EXPECT_LE(d, cfg.delta_max);
      EXPECT_GE(d, prev);
      prev = d;
    }
    if (kdp > 0.0) {
      const double far = damping_ratio(Vec6::Zero(), Vec6::Constant(1e9), cfg)[0];
      EXPECT_NEAR(far, cfg.delta_max, 1e-6);
    }
  }
}

TEST(AssembleQp, MidpointGivesEmptyRows) {
  const SafetyModel m = default_model();
  const AugmentedState x = state_with_thrusts(Vec6::Constant(8.0), Vec3::Zero(), m);
  const LieDerivatives lie = lie_derivatives(x, m);
  const Vec6 beta = Vec6::LinSpaced(-2.0, 3.0);
  const QpProblem qp = assemble_qp(lie, beta, Vec6::Ones(), m.barrier);
  EXPECT_LT(qp.A.cwiseAbs().maxCoeff(), 1e-10);
  for (int i = 0; i < 6; ++i)
    EXPECT_NEAR(qp.b[i], 10.0 * 49.0 + beta[i] - 15.0, 1e-8);
}

TEST(AssembleQp, IndependentAssembly) {
  const SafetyModel m = default_model();
  std::mt19937_64 rng(46);
  for (int k = 0; k < 50; ++k) {
    const AugmentedState x = random_state(rng);
    const Vec6 beta = Vec6::Random();
    const Vec6 u_t = Vec6::Random();
    const LieDerivatives lie = lie_derivatives(x, m);
    const QpProblem qp = assemble_qp(lie, beta, u_t, m.barrier);
    // Rebuild from T(x), dT/dx and f(x) without going through lie_derivatives.
    const Vec6 t = thrust_of_state(x, m).T;
    const Mat6x36 jac = thrust_state_jacobian(x, m);
    const Vec36 f = drift(x, m.gains, m.obs);
    for (int i = 0; i < 6; ++i) {
      const double pre = -2.0 * (t[i] - 8.0);
      const double hi = 49.0 - (t[i] - 8.0) * (t[i] - 8.0);
      const double lf = pre * jac.row(i).dot(f);
      EXPECT_NEAR(qp.b[i], 10.0 * hi + lf + beta[i] - 15.0, 1e-8 * (1 + std::abs(lf)));
      const Vec6 row = -pre * jac.block<1, 6>(i, 30).transpose();
      EXPECT_LT((Vec6(qp.A.row(i).transpose()) - row).cwiseAbs().maxCoeff(), 1e-10);
    }
    EXPECT_EQ(Vec6(qp.u_t), u_t);
  }
}

// Pushing u along +A_1 must drive T_1 further up, i.e. eat into h_1.
TEST(AssembleQp, RowRestrictsTheUnsafeDirection) {
  const SafetyModel m = default_model();
  Vec6 thrusts = Vec6::Constant(6.0);
  thrusts[0] = 14.0;
  const AugmentedState x = state_with_thrusts(thrusts, Vec3(0.05, 0.0, 0.1), m);
  const LieDerivatives lie = lie_derivatives(x, m);
  const QpProblem qp = assemble_qp(lie, Vec6::Zero(), Vec6::Zero(), m.barrier);
  const Vec6 a1 = qp.A.row(0).transpose();
  const double dt = 1e-3;
  const Vec36 v = x.to_vector();
  const Vec36 v0 = rk4(rk4(v, Vec6::Zero(), dt, m), Vec6::Zero(), dt, m);
  const Vec36 v1 = rk4(rk4(v, a1, dt, m), a1, dt, m);
  const double t0 = thrust_of_state(AugmentedState::from_vector(v0), m).T[0];
  const double t1 = thrust_of_state(AugmentedState::from_vector(v1), m).T[0];
  EXPECT_GT(t1, t0);
  EXPECT_LT(h_of(AugmentedState::from_vector(v1), m)[0],
            h_of(AugmentedState::from_vector(v0), m)[0]);
}

TEST(FilterStep, HoverAtTargetIsIdle) {
  const SafetyModel m = default_model();
  const AugmentedState x = state_with_thrusts(
      Vec6::Constant(5.9243679423967), Vec3::Zero(), m);
  const FilterOutput out = filter_step(x, initial_residual_state(h_of(x, m), m.barrier),
                                       x.q, m, TargetGenConfig{});
  EXPECT_EQ(out.status, QpStatus::kOptimal);
  EXPECT_LT(out.q_dd_d.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(out.beta_hat, Vec6::Zero());
}

TEST(FilterStep, InactiveConstraintsPassTargetThrough) {
  const SafetyModel m = default_model();
  const AugmentedState x = state_with_thrusts(Vec6::Constant(7.0), Vec3::Zero(), m);
  Vec6 q_t = x.q;
  q_t[0] += 0.1;
  q_t[5] -= 0.05;
  const FilterOutput out = filter_step(x, initial_residual_state(h_of(x, m), m.barrier),
                                       q_t, m, TargetGenConfig{});
  EXPECT_EQ(out.status, QpStatus::kOptimal);
  EXPECT_LT((out.q_dd_d - out.q_dd_t).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_GT(out.q_dd_t.cwiseAbs().maxCoeff(), 0.01);
}

TEST(FilterStep, ActiveConstraintHoldsAtSolution) {
  const SafetyModel m = default_model();
  Vec6 thrusts = Vec6::Constant(6.0);
  thrusts[0] = 14.9;
  const AugmentedState x = state_with_thrusts(thrusts, Vec3::Zero(), m);
  const ResidualState res = initial_residual_state(h_of(x, m), m.barrier);
  // Ask for a large acceleration in whichever direction raises T_1.
  const Vec6 dir = actuation_jacobian(x.phi(), m).row(0).transpose();
  const Vec6 q_t = x.q + 50.0 * dir / dir.norm();
  const FilterOutput out = filter_step(x, res, q_t, m, TargetGenConfig{});
  const QpProblem qp = assemble_qp(out.lie, out.beta_hat, out.q_dd_t, m.barrier);
  ASSERT_EQ(out.status, QpStatus::kOptimal);
  EXPECT_GT((qp.A * out.q_dd_t - qp.b).maxCoeff(), 0.0);
  EXPECT_LE((qp.A * out.q_dd_d - qp.b).maxCoeff(), 1e-8);
}

TEST(BarrierConfig, Validation) {
  EXPECT_NO_THROW(BarrierConfig{}.validate());
  BarrierConfig c;
  c.t_min = 16.0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.k_beta[3] = 5.0;
  EXPECT_THROW(c.validate(), ValidationError);
  TargetGenConfig g;
  g.delta_min = 6.0;
  EXPECT_THROW(g.validate(), ValidationError);
  g = {};
  g.k_dp = -1.0;
  EXPECT_THROW(g.validate(), ValidationError);
}

}  // namespace
}  // namespace aphi

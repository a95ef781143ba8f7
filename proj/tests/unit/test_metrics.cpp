#include <cmath>

#include <gtest/gtest.h>

#include "aphi/metrics.hpp"
#include "aphi/presets.hpp"

namespace aphi {
namespace {

// Constant-hover log: every row at target with mid-range thrusts.
SimLog flat_log(double duration, double dt) {
  SimLog log;
  log.dt = dt;
  const auto n = static_cast<std::size_t>(std::llround(duration / dt));
  for (std::size_t k = 0; k <= n; ++k) {
    LogRow r;
    r.t = static_cast<double>(k) * dt;
    r.q << 0, 0, 1, 0, 0, 0;
    r.q_dot.setZero();
    r.q_d = r.q;
    r.q_t = r.q;
    r.q_dd_d.setZero();
    r.thrust.T = Vec6::Constant(5.9);
    r.thrust_raw = r.thrust;
    r.d_hat.setZero();
    r.h = barrier_values(r.thrust, log.barrier);
    r.status = FilterStatus::kOptimal;
    r.beta_hat.setZero();
    r.beta_true.setZero();
    r.d_true.setZero();
    log.rows.push_back(r);
  }
  return log;
}

TEST(Metrics, PerfectHover) {
  const SimLog log = run(preset_scenario("hover"));
  const MetricsReport m = compute_metrics(log);
  EXPECT_EQ(m.rows, 10001u);
  EXPECT_LT(m.rms_error.maxCoeff(), 1e-9);
  EXPECT_EQ(m.violation_steps, 0u);
  EXPECT_EQ(m.raw_violation_steps, 0u);
  EXPECT_EQ(m.relaxed_steps, 0u);
  EXPECT_FALSE(m.aborted);
}

TEST(Metrics, SingleViolation) {
  SimLog log = flat_log(1.0, 0.01);
  log.rows[40].thrust.T[0] = 15.2;
  log.rows[40].thrust_raw.T[0] = 15.2;
  const MetricsReport m = compute_metrics(log);
  EXPECT_EQ(m.violation_steps, 1u);
  EXPECT_EQ(m.raw_violation_steps, 1u);
  EXPECT_EQ(m.thrust_max, 15.2);
}

TEST(Metrics, ToleranceBandOnlyForLoggedThrust) {
  SimLog log = flat_log(1.0, 0.01);
  log.rows[3].thrust.T[2] = 15.04;
  log.rows[3].thrust_raw.T[2] = 15.04;
  log.rows[7].thrust.T[5] = 0.96;
  log.rows[7].thrust_raw.T[5] = 0.96;
  const MetricsReport m = compute_metrics(log);
  EXPECT_EQ(m.violation_steps, 0u);
  EXPECT_EQ(m.raw_violation_steps, 2u);
}

TEST(Metrics, ResettlingAfterBreakaway) {
  SimLog log = flat_log(20.0, 0.01);
  log.breakaway_time = 10.0;
  for (LogRow& r : log.rows) {
    if (r.t >= 10.0 - 1e-9 && r.t < 12.3 - 1e-9) r.q[0] = 0.2;
    // A brief excursion before breakaway must not matter.
    if (r.t > 4.0 && r.t < 5.0) r.q[0] = 0.3;
  }
  const MetricsReport m = compute_metrics(log);
  ASSERT_TRUE(m.resettling_time.has_value());
  EXPECT_NEAR(*m.resettling_time, 2.3, 1e-9);
}

TEST(Metrics, ResettlingNeedsTheFullHold) {
  SimLog log = flat_log(13.0, 0.01);
  log.breakaway_time = 10.0;
  for (LogRow& r : log.rows)
    if (r.t >= 10.0 && r.t < 12.3 - 1e-9) r.q[0] = 0.2;
  // Only 0.7 s of calm after re-entry.
  EXPECT_FALSE(compute_metrics(log).resettling_time.has_value());
}

TEST(Metrics, RmsAndSteadyState) {
  SimLog log = flat_log(2.0, 0.01);
  for (LogRow& r : log.rows) r.q[2] = 1.1;  // 0.1 m high throughout
  const MetricsReport m = compute_metrics(log);
  EXPECT_NEAR(m.rms_error[2], 0.1, 1e-12);
  EXPECT_NEAR(m.max_overshoot[2], 0.1, 1e-12);
  EXPECT_NEAR(m.steady_state_error[2], 0.1, 1e-12);
  EXPECT_NEAR(m.final_position_error, 0.1, 1e-12);
}

TEST(Metrics, RelaxedStepsAndCartGoal) {
  SimLog log = flat_log(1.0, 0.01);
  log.cart_goal = 1.0;
  log.rows[10].status = FilterStatus::kRelaxed;
  log.rows[20].status = FilterStatus::kRelaxed;
  for (std::size_t k = 50; k < log.rows.size(); ++k) log.rows[k].cart.x = 1.01;
  const MetricsReport m = compute_metrics(log);
  EXPECT_EQ(m.relaxed_steps, 2u);
  ASSERT_TRUE(m.last_relaxed_time.has_value());
  EXPECT_NEAR(*m.last_relaxed_time, 0.2, 1e-12);
  ASSERT_TRUE(m.cart_goal_time.has_value());
  EXPECT_NEAR(*m.cart_goal_time, 0.5, 1e-12);
}

TEST(Metrics, FieldsAreOrderedAndComplete) {
  const auto fields = metrics_fields(compute_metrics(flat_log(0.1, 0.01)));
  ASSERT_FALSE(fields.empty());
  EXPECT_EQ(fields.front().first, "rows");
  EXPECT_EQ(fields.front().second, "11");
  EXPECT_EQ(fields.back().first, "aborted");
  bool found = false;
  for (const auto& [k, v] : fields)
    if (k == "resettling_time") found = v == "none";
  EXPECT_TRUE(found);
}

}  // namespace
}  // namespace aphi

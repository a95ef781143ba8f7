#include "aphi/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace aphi {

std::optional<double> settle_time(const SimLog& log, double t0, double radius,
                                  double hold) {
  std::optional<double> entry;
  for (const LogRow& r : log.rows) {
    if (r.t < t0) continue;
    const double err = (r.q.head<3>() - r.q_t.head<3>()).norm();
    if (err < radius) {
      if (!entry) entry = r.t;
      if (r.t - *entry >= hold - 1e-9) return entry;
    } else {
      entry.reset();
    }
  }
  return std::nullopt;
}

MetricsReport compute_metrics(const SimLog& log, const MetricsOptions& opt) {
  MetricsReport m;
  m.rows = log.rows.size();
  m.aborted = log.aborted;
  m.abort_reason = log.abort_reason;
  m.breakaway_time = log.breakaway_time;
  if (log.rows.empty()) return m;

  const double lo = log.barrier.t_min;
  const double hi = log.barrier.t_max;
  const double tol = opt.thrust_tolerance;
  constexpr double inf = std::numeric_limits<double>::infinity();
  m.thrust_min = m.raw_thrust_min = m.h_min = inf;
  m.thrust_max = m.raw_thrust_max = -inf;

  Vec6 sq = Vec6::Zero();
  Vec6 tail = Vec6::Zero();
  std::size_t tail_rows = 0;
  const double t_end = log.rows.back().t;

  for (const LogRow& r : log.rows) {
    const Vec6 e = r.q - r.q_d;
    sq += e.cwiseAbs2();
    m.max_overshoot = m.max_overshoot.cwiseMax(e.cwiseAbs());
    if (r.t >= t_end - opt.steady_window - 1e-9) {
      tail += e.cwiseAbs();
      ++tail_rows;
    }
    const Vec6& T = r.thrust.T;
    const Vec6& raw = r.thrust_raw.T;
    m.thrust_min = std::min(m.thrust_min, T.minCoeff());
    m.thrust_max = std::max(m.thrust_max, T.maxCoeff());
    m.raw_thrust_min = std::min(m.raw_thrust_min, raw.minCoeff());
    m.raw_thrust_max = std::max(m.raw_thrust_max, raw.maxCoeff());
    if (T.minCoeff() < lo - tol || T.maxCoeff() > hi + tol) ++m.violation_steps;
    if (raw.minCoeff() < lo || raw.maxCoeff() > hi) ++m.raw_violation_steps;
    if (r.status == FilterStatus::kRelaxed) {
      ++m.relaxed_steps;
      m.last_relaxed_time = r.t;
    }
    if (r.status == FilterStatus::kError) ++m.error_steps;
    m.h_min = std::min(m.h_min, r.h.minCoeff());
    m.max_contact_force = std::max(m.max_contact_force, r.contact_force.norm());
    if (log.cart_goal && !m.cart_goal_time && r.cart.x >= *log.cart_goal)
      m.cart_goal_time = r.t;
  }
  m.rms_error = (sq / static_cast<double>(m.rows)).cwiseSqrt();
  if (tail_rows > 0) m.steady_state_error = tail / static_cast<double>(tail_rows);
  const LogRow& last = log.rows.back();
  m.final_position_error = (last.q.head<3>() - last.q_t.head<3>()).norm();
  if (log.breakaway_time) {
    const auto t = settle_time(log, *log.breakaway_time, opt.settle_radius,
                               opt.settle_hold);
    if (t) m.resettling_time = *t - *log.breakaway_time;
  }
  return m;
}

namespace {

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string opt_num(const std::optional<double>& v) {
  return v ? num(*v) : "none";
}

}  // namespace

std::vector<std::pair<std::string, std::string>> metrics_fields(
    const MetricsReport& m) {
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("rows", std::to_string(m.rows));
  for (int i = 0; i < 6; ++i)
    out.emplace_back("rms_error_" + std::to_string(i + 1), num(m.rms_error[i]));
  for (int i = 0; i < 6; ++i)
    out.emplace_back("max_overshoot_" + std::to_string(i + 1),
                     num(m.max_overshoot[i]));
  for (int i = 0; i < 6; ++i)
    out.emplace_back("steady_state_error_" + std::to_string(i + 1),
                     num(m.steady_state_error[i]));
  out.emplace_back("thrust_min", num(m.thrust_min));
  out.emplace_back("thrust_max", num(m.thrust_max));
  out.emplace_back("raw_thrust_min", num(m.raw_thrust_min));
  out.emplace_back("raw_thrust_max", num(m.raw_thrust_max));
  out.emplace_back("violation_steps", std::to_string(m.violation_steps));
  out.emplace_back("raw_violation_steps", std::to_string(m.raw_violation_steps));
  out.emplace_back("relaxed_steps", std::to_string(m.relaxed_steps));
  out.emplace_back("qp_error_steps", std::to_string(m.error_steps));
  out.emplace_back("last_relaxed_time", opt_num(m.last_relaxed_time));
  out.emplace_back("h_min", num(m.h_min));
  out.emplace_back("max_contact_force", num(m.max_contact_force));
  out.emplace_back("final_position_error", num(m.final_position_error));
  out.emplace_back("breakaway_time", opt_num(m.breakaway_time));
  out.emplace_back("resettling_time", opt_num(m.resettling_time));
  out.emplace_back("cart_goal_time", opt_num(m.cart_goal_time));
  out.emplace_back("aborted", m.aborted ? "true" : "false");
  if (m.aborted) out.emplace_back("abort_reason", m.abort_reason);
  return out;
}

}  // namespace aphi

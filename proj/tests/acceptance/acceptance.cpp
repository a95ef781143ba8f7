// End-to-end acceptance checks. One line per criterion, nonzero exit if any
// fails. Scenario files are read from $APHI_SCENARIO_DIR (default ./scenarios).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "aphi/dynamics.hpp"
#include "aphi/log_io.hpp"
#include "aphi/metrics.hpp"
#include "aphi/presets.hpp"
#include "aphi/qp_solver.hpp"
#include "aphi/safety_filter.hpp"
#include "aphi/scenario_io.hpp"
#include "aphi/sim_engine.hpp"
#include "oracles.hpp"

namespace {

using namespace aphi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::filesystem::path scenario_file(const char* name) {
  const char* dir = std::getenv("APHI_SCENARIO_DIR");
  return std::filesystem::path(dir ? dir : "scenarios") / (std::string(name) + ".toml");
}

// 1. Equal hover thrusts from the allocation.
Outcome hover_allocation() {
  const VehicleParams p;
  const Allocation a(p);
  GeneralizedWrench tau;
  tau.w[2] = p.m * p.g;
  const ThrustVector t = wrench_to_thrust(tau, Vec3::Zero(), a);
  const double expect = p.m * p.g / (6.0 * std::cos(p.alpha));
  const double err = (t.T.array() - expect).abs().maxCoeff();
  return {err < 1e-6, "T = " + fmt("%.10f", t.T[0]) + " N, expected " +
                          fmt("%.10f", expect) + ", max err " + fmt("%.2e", err)};
}

// 2. dT/dx and the Lie derivatives against finite differences.
Outcome jacobian_fd() {
  const SafetyModel m({}, {}, {}, {});
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ud(-2.0, 2.0);
  auto t_of = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return thrust_of_state(AugmentedState::from_vector(v), m).T;
  };
  auto h_of = [&](const Vec36& v) {
    return barrier_values(thrust_of_state(AugmentedState::from_vector(v), m), m.barrier);
  };
  auto flow = [&](const Vec36& v, const Vec6& u, double dt) {
    auto rate = [&](const Vec36& y) {
      Vec36 r = drift(AugmentedState::from_vector(y), m.gains, m.obs);
      r.tail<6>() += u;
      return r;
    };
    const Vec36 k1 = rate(v), k2 = rate(v + 0.5 * dt * k1),
                k3 = rate(v + 0.5 * dt * k2), k4 = rate(v + dt * k3);
    return Vec36(v + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4));
  };
  double jac_err = 0.0, lie_err = 0.0;
  for (int k = 0; k < 200; ++k) {
    const AugmentedState x = testing::random_state(rng);
    const Eigen::MatrixXd fd = testing::fd_jacobian(t_of, x.to_vector(), 1e-6);
    jac_err = std::max(jac_err, testing::max_rel_err(thrust_state_jacobian(x, m), fd, 1e-7));

    // Analytic h_dot against h differenced along the closed-loop flow.
    Vec6 u;
    for (int i = 0; i < 6; ++i) u[i] = ud(rng);
    const LieDerivatives lie = lie_derivatives(x, m);
    const double dt = 1e-5;
    const Vec6 hd = (h_of(flow(x.to_vector(), u, dt)) - h_of(flow(x.to_vector(), u, -dt))) /
                    (2 * dt);
    lie_err = std::max(lie_err, testing::max_rel_err(Vec6(lie.lf + lie.lg * u), hd, 1e-5));
  }
  return {jac_err < 1e-4 && lie_err < 1e-3,
          "200 states, dT/dx max rel err " + fmt("%.2e", jac_err) +
              " (< 1e-4), h_dot max rel err " + fmt("%.2e", lie_err) + " (< 1e-3)"};
}

// 3. QP solver against exhaustive active-set enumeration.
Outcome qp_oracle() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double sol_err = 0.0, obj_err = 0.0;
  int mismatched = 0;
  for (int k = 0; k < 1000; ++k) {
    QpProblem p;
    p.u_t = Eigen::VectorXd(6);
    p.A = Eigen::MatrixXd(6, 6);
    p.b = Eigen::VectorXd(6);
    Eigen::VectorXd v0(6);
    for (int i = 0; i < 6; ++i) {
      p.u_t[i] = 3.0 * u(rng);
      v0[i] = u(rng);
      for (int j = 0; j < 6; ++j) p.A(i, j) = u(rng);
    }
    for (int i = 0; i < 6; ++i) p.b[i] = p.A.row(i).dot(v0) + 0.5 * (u(rng) + 1.0);
    const testing::OracleResult ref = testing::qp_enumeration_oracle(p);
    const QpSolution s = solve(p);
    if (s.status != QpStatus::kOptimal || !ref.feasible) {
      ++mismatched;
      continue;
    }
    sol_err = std::max(sol_err, (s.u - ref.u).cwiseAbs().maxCoeff());
    obj_err = std::max(obj_err, std::abs(0.5 * (s.u - p.u_t).squaredNorm() - ref.objective));
  }
  return {mismatched == 0 && sol_err < 1e-8 && obj_err < 1e-8,
          "1000 instances, max |u - u_oracle| " + fmt("%.2e", sol_err) +
              ", max objective diff " + fmt("%.2e", obj_err) +
              ", status mismatches " + std::to_string(mismatched)};
}

SimLog run_file(const char* name, ControllerVariant v) {
  Scenario s = load_scenario(scenario_file(name));
  s.controller = v;
  return run(s);
}

// 4. Forward invariance on the wall push.
Outcome wall_push_invariance(MetricsReport& filter_report) {
  const SimLog log = run_file("wall_push", ControllerVariant::kSafetyFilter);
  filter_report = compute_metrics(log);
  std::size_t late_relaxed = 0;
  for (const LogRow& r : log.rows)
    if (r.t > 1.0 && r.status != FilterStatus::kOptimal) ++late_relaxed;
  const MetricsReport& m = filter_report;
  const bool in_bounds = m.thrust_min >= 0.95 && m.thrust_max <= 15.05;
  return {!log.aborted && in_bounds && late_relaxed == 0 && log.rows.back().t >= 60.0 - 1e-9,
          fmt("%.1f", log.rows.back().t) + " s, thrust [" + fmt("%.3f", m.thrust_min) +
              ", " + fmt("%.3f", m.thrust_max) + "] N, non-optimal QP steps after 1 s: " +
              std::to_string(late_relaxed) + ", peak contact " +
              fmt("%.2f", m.max_contact_force) + " N" +
              (log.aborted ? ", aborted: " + log.abort_reason : "")};
}

// 5. Baselines on the same scenario.
Outcome baseline_contrast(const MetricsReport& filter_report) {
  const SimLog none = run_file("wall_push", ControllerVariant::kNoFilter);
  const MetricsReport mn = compute_metrics(none);
  const double frac = static_cast<double>(mn.raw_violation_steps) /
                      static_cast<double>(std::max<std::size_t>(1, mn.rows));
  const bool diverged = none.aborted &&
                        none.abort_reason.find("diverged") != std::string::npos;
  const bool none_fails = frac >= 0.01 || diverged;

  const SimLog clamp = run_file("wall_push", ControllerVariant::kDirectClamp);
  const MetricsReport mc = compute_metrics(clamp);
  bool clamp_in_bounds = true;
  for (const LogRow& r : clamp.rows)
    clamp_in_bounds = clamp_in_bounds && r.thrust.T.minCoeff() >= clamp.barrier.t_min &&
                      r.thrust.T.maxCoeff() <= clamp.barrier.t_max;
  const double clamp_sse = mc.steady_state_error.norm();
  const double filter_overshoot_z = filter_report.max_overshoot[2];
  const bool ordered = clamp_sse > filter_overshoot_z;

  std::string d = "no_filter: raw out of bounds on " + fmt("%.1f", 100.0 * frac) +
                  "% of steps";
  if (none.aborted) d += ", aborted at t = " + fmt("%.3f", none.rows.back().t) + " s";
  d += "; direct_clamp: commanded thrust in [" + fmt("%.2f", mc.thrust_min) + ", " +
       fmt("%.2f", mc.thrust_max) + "] N, steady-state |q_d - q| " +
       fmt("%.3f", clamp_sse) + " vs safety_filter z overshoot " +
       fmt("%.4f", filter_overshoot_z);
  if (clamp.aborted) d += " (run aborted at t = " + fmt("%.3f", clamp.rows.back().t) + " s)";
  return {none_fails && clamp_in_bounds && ordered, d};
}

// 6. Observer convergence and the residual-estimator envelope.
Outcome dob_convergence() {
  Scenario s = preset_scenario("hover");
  s.duration = 10.0;
  WindConfig w;
  w.mean_force = Vec3(2.0, 0.0, 0.0);
  s.wind = w;
  const SimLog log = run(s);
  if (log.aborted) return {false, "aborted: " + log.abort_reason};

  double worst_dhat = 0.0;
  for (const LogRow& r : log.rows)
    if (r.t >= 5.0) worst_dhat = std::max(worst_dhat, std::abs(r.d_hat[0] - 2.0));

  // |e(t)| <= (|e0| - beta_h/k) exp(-k t) + beta_h/k with beta_h the largest
  // measured |d beta / dt|.
  const double dt = log.dt;
  double worst_excess = -1e300, worst_e0 = 0.0;
  for (int i = 0; i < 6; ++i) {
    const double k = s.barrier.k_beta[i];
    double beta_h = 0.0;
    for (std::size_t j = 1; j < log.rows.size(); ++j)
      beta_h = std::max(beta_h, std::abs(log.rows[j].beta_true[i] -
                                         log.rows[j - 1].beta_true[i]) / dt);
    const double e0 = std::abs(log.rows[0].beta_true[i] - log.rows[0].beta_hat[i]);
    worst_e0 = std::max(worst_e0, e0);
    for (const LogRow& r : log.rows) {
      const double e = std::abs(r.beta_true[i] - r.beta_hat[i]);
      const double bound = (e0 - beta_h / k) * std::exp(-k * r.t) + beta_h / k;
      worst_excess = std::max(worst_excess, e - bound);
    }
  }
  // Discretization slack: the estimator is integrated at 1 ms.
  const double slack = 1e-3 * std::max(1.0, worst_e0);
  return {worst_dhat < 0.1 && worst_excess <= slack,
          "max |dhat_1 - 2| after 5 s " + fmt("%.2e", worst_dhat) +
              " N, |e(t0)| " + fmt("%.3f", worst_e0) + ", max envelope excess " +
              fmt("%.2e", worst_excess) + " (slack " + fmt("%.1e", slack) + ")"};
}

// 7. Recovery after the plug lets go.
Outcome breakaway_resilience() {
  const Scenario base = load_scenario(scenario_file("plug_extract"));
  bool ok = true;
  std::ostringstream d;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Scenario s = base;
    s.seed = seed;
    const SimLog log = run(s);
    const MetricsReport m = compute_metrics(log);
    const bool good = !log.aborted && m.breakaway_time && m.resettling_time &&
                      *m.resettling_time <= 3.0 && m.thrust_min >= 0.95 &&
                      m.thrust_max <= 15.05;
    ok = ok && good;
    d << (seed > 1 ? "; " : "") << "seed " << seed << ": ";
    if (!m.breakaway_time) {
      d << "no breakaway";
      continue;
    }
    d << "break " << fmt("%.2f", *m.breakaway_time) << " s, settle "
      << (m.resettling_time ? fmt("%.2f", *m.resettling_time) + " s" : "never")
      << ", T [" << fmt("%.2f", m.thrust_min) << ", " << fmt("%.2f", m.thrust_max) << "]";
  }
  return {ok, d.str()};
}

// 8. RK4 order with refined stages and free-flight energy drift.
Outcome integrator_quality() {
  Scenario sc = preset_scenario("hover");
  sc.plant_mass_scale = 1.05;
  sc.plant_inertia_scale = 1.10;
  sc.dt = 0.01;
  sc.duration = 2.0;
  Vec6 target;
  target << 0.5, -0.3, 1.2, 0.0, 0.0, 0.3;
  sc.targets = {{0.0, target}};
  auto terminal = [&](int substeps) {
    Scenario s = sc;
    s.substeps = substeps;
    const Simulator sim(s);
    SimState st = sim.initial_state();
    for (std::size_t k = 0; k < s.step_count(); ++k) st = sim.step(st);
    Eigen::VectorXd v(42);
    v << st.plant.q, st.plant.q_dot, st.obs.zeta, st.obs.chi, st.q_d, st.q_d_dot, st.res.xi;
    return v;
  };
  const Eigen::VectorXd ref = terminal(256);
  const double e1 = (terminal(2) - ref).cwiseAbs().maxCoeff();
  const double e2 = (terminal(4) - ref).cwiseAbs().maxCoeff();
  const double order = std::log2(e1 / e2);

  const VehicleParams p;
  PlantState s;
  s.q << 0.0, 0.0, 10.0, 0.2, -0.3, 0.1;
  s.q_dot << 1.0, -0.5, 2.0, 1.5, -1.0, 2.0;
  using Y = Eigen::Matrix<double, 12, 1>;
  auto rate = [&](const Y& y) {
    const PlantState st{y.head<6>(), y.tail<6>()};
    Y d;
    d << st.q_dot, forward_dynamics(st, {}, {}, p);
    return d;
  };
  Y y;
  y << s.q, s.q_dot;
  const double en0 = total_energy(s, p);
  const double h = 1e-3;
  const int seconds = 5;
  for (int k = 0; k < seconds * 1000; ++k) {
    const Y k1 = rate(y), k2 = rate(y + 0.5 * h * k1), k3 = rate(y + 0.5 * h * k2),
            k4 = rate(y + h * k3);
    y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  const double drift = std::abs(total_energy({y.head<6>(), y.tail<6>()}, p) - en0) / seconds;
  return {order >= 3.5 && drift < 1e-6,
          "observed order " + fmt("%.2f", order) + " (errors " + fmt("%.2e", e1) + ", " +
              fmt("%.2e", e2) + "), energy drift " + fmt("%.2e", drift) + " J/s"};
}

// 9. Same scenario and seed, same bytes.
Outcome determinism() {
  const Scenario s = load_scenario(scenario_file("wall_push"));
  std::ostringstream a, b;
  write_csv(a, run(s));
  write_csv(b, run(s));
  const bool same = a.str() == b.str();
  return {same && !a.str().empty(),
          std::to_string(a.str().size()) + " CSV bytes, " + (same ? "identical" : "different")};
}

}  // namespace

int main() {
  using Clock = std::chrono::steady_clock;
  MetricsReport filter_report;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks = {
      {"hover allocation", hover_allocation},
      {"Jacobian / Lie derivatives vs finite differences", jacobian_fd},
      {"QP vs enumeration oracle", qp_oracle},
      {"wall push thrust invariance", [&] { return wall_push_invariance(filter_report); }},
      {"baseline contrast", [&] { return baseline_contrast(filter_report); }},
      {"observer convergence and residual envelope", dob_convergence},
      {"plug breakaway recovery", breakaway_resilience},
      {"integrator quality", integrator_quality},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = checks[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::printf("criterion %zu %s: %s  [%s; %.2f s]\n", i + 1,
                o.pass ? "PASS" : "FAIL", checks[i].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}

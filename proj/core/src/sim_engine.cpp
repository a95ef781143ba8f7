#include "aphi/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/LU>

namespace aphi {
namespace {

// Integrated state layout: q, q_dot, zeta, chi, q_d, q_d_dot, xi, cart x, v.
constexpr int kDim = 44;
using StateVec = Eigen::Matrix<double, kDim, 1>;

StateVec pack(const SimState& s) {
  StateVec y;
  y << s.plant.q, s.plant.q_dot, s.obs.zeta, s.obs.chi, s.q_d, s.q_d_dot,
      s.res.xi, s.cart.x, s.cart.v;
  return y;
}

void unpack(const StateVec& y, SimState& s) {
  s.plant.q = y.segment<6>(0);
  s.plant.q_dot = y.segment<6>(6);
  s.obs.zeta = y.segment<6>(12);
  s.obs.chi = y.segment<6>(18);
  s.q_d = y.segment<6>(24);
  s.q_d_dot = y.segment<6>(30);
  s.res.xi = y.segment<6>(36);
  s.cart.x = y[42];
  s.cart.v = y[43];
}

}  // namespace

VehicleParams Scenario::plant_params() const {
  VehicleParams p = nominal;
  p.m *= plant_mass_scale;
  p.J *= plant_inertia_scale;
  return p;
}

Vec6 Scenario::target_at(double t) const {
  Vec6 q_t = initial_q;
  for (const auto& wp : targets) {
    if (wp.t > t) break;
    q_t = wp.q_t;
  }
  return q_t;
}

std::size_t Scenario::step_count() const {
  return static_cast<std::size_t>(std::llround(duration / dt));
}

void Scenario::validate() const {
  auto fail = [](const std::string& what) {
    throw ValidationError("Scenario: " + what);
  };
  if (!(dt > 0.0)) fail("dt > 0");
  if (!(duration >= 0.0)) fail("duration >= 0");
  if (substeps < 1) fail("substeps >= 1");
  if (!(plant_mass_scale > 0.0)) fail("plant_mass_scale > 0");
  if (!(plant_inertia_scale > 0.0)) fail("plant_inertia_scale > 0");
  if (!(wrench_cap > 0.0)) fail("wrench_cap > 0");
  if (!initial_q.allFinite() || !initial_q_dot.allFinite())
    fail("initial state finite");
  if (std::abs(initial_q[4]) >= M_PI / 2 - kSingularityMargin)
    fail("PlantState: |pitch| < pi/2");
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (!targets[i].q_t.allFinite()) fail("target entries finite");
    if (i > 0 && targets[i].t < targets[i - 1].t)
      fail("target schedule times non-decreasing");
  }
  nominal.validate();
  gains.validate();
  observer.validate();
  barrier.validate();
  target_gen.validate();
  if (wall) wall->validate();
  if (plug) plug->validate();
  if (cart) cart->validate();
  if (wind) wind->validate();
}

std::string to_string(FilterStatus status) {
  switch (status) {
    case FilterStatus::kInactive: return "off";
    case FilterStatus::kOptimal: return "optimal";
    case FilterStatus::kRelaxed: return "relaxed";
    case FilterStatus::kError: return "error";
  }
  return "unknown";
}

Simulator::Simulator(Scenario scenario)
    : scenario_(std::move(scenario)),
      plant_(scenario_.plant_params()),
      model_(scenario_.nominal, scenario_.gains, scenario_.observer,
             scenario_.barrier),
      plant_alloc_(plant_) {
  scenario_.validate();
}

SimState Simulator::initial_state() const {
  SimState s;
  s.plant = {scenario_.initial_q, scenario_.initial_q_dot};
  check_attitude(s.plant.phi());
  s.obs = initial_observer_state(s.plant, scenario_.nominal);
  s.q_d = scenario_.initial_q;
  s.q_d_dot = Vec6::Zero();
  if (scenario_.cart) s.cart = {scenario_.cart->initial_position, 0.0};
  s.plug_attached = scenario_.plug.has_value();
  s.rng.seed(scenario_.seed);
  if (scenario_.controller == ControllerVariant::kDirectClamp) {
    s.q_d = scenario_.target_at(0.0);
  }
  const Vec6 h = barrier_values(thrust_of_state(s.augmented(), model_),
                                scenario_.barrier);
  s.res = initial_residual_state(h, scenario_.barrier);
  return s;
}

Simulator::EnvWrench Simulator::environment_wrench(
    const PlantState& plant, const CartState& cart, bool plug_attached,
    const GeneralizedWrench& wind) const {
  EnvWrench env;
  const auto& ee = scenario_.end_effector;
  const double cap = scenario_.wrench_cap;
  if (scenario_.wall) {
    const ContactWrench c = wall_wrench(plant, *scenario_.wall, ee);
    check_wrench_cap(c.wrench, cap, "wall");
    env.total.w += c.wrench.w;
    env.contact_force += c.force;
  }
  if (scenario_.plug && plug_attached) {
    const PlugOutput c = plug_wrench(plant, *scenario_.plug, ee, true);
    check_wrench_cap(c.contact.wrench, cap, "plug");
    env.total.w += c.contact.wrench.w;
    env.contact_force += c.contact.force;
  }
  if (scenario_.cart) {
    const CartContact c = cart_contact(cart, plant, *scenario_.cart, ee);
    check_wrench_cap(c.vehicle.wrench, cap, "cart");
    env.total.w += c.vehicle.wrench.w;
    env.contact_force += c.vehicle.force;
    env.cart_force = c.force_on_cart;
  }
  check_wrench_cap(wind, cap, "wind");
  env.total.w += wind.w;
  return env;
}

StepCommand Simulator::compute_command(const SimState& s) const {
  StepCommand cmd;
  const double t = s.t;
  cmd.q_t = scenario_.target_at(t);
  if (scenario_.wind) {
    std::mt19937_64 rng = s.rng;
    cmd.wind = wind_wrench(t, *scenario_.wind, rng);
  }

  AugmentedState x = s.augmented();
  if (scenario_.controller == ControllerVariant::kDirectClamp) {
    x.q_d = cmd.q_t;
    x.q_d_dot.setZero();
  }
  cmd.q_d = x.q_d;
  cmd.q_d_dot = x.q_d_dot;
  cmd.d_hat = disturbance_estimate(s.obs, s.plant.q_dot, s.plant.phi(),
                                   scenario_.nominal, scenario_.observer);

  switch (scenario_.controller) {
    case ControllerVariant::kSafetyFilter: {
      const FilterOutput f =
          filter_step(x, s.res, cmd.q_t, model_, scenario_.target_gen);
      cmd.q_dd_d = f.q_dd_d;
      cmd.thrust = f.lie.thrust;
      cmd.thrust_raw = f.lie.thrust;
      cmd.slack_norm = f.slack_norm;
      cmd.status = f.status == QpStatus::kOptimal   ? FilterStatus::kOptimal
                   : f.status == QpStatus::kRelaxed ? FilterStatus::kRelaxed
                                                    : FilterStatus::kError;
      break;
    }
    case ControllerVariant::kNoFilter: {
      cmd.q_dd_d =
          target_acceleration(cmd.q_t, x.q_d, x.q_d_dot, scenario_.target_gen);
      cmd.thrust = thrust_of_state(x, model_);
      cmd.thrust_raw = cmd.thrust;
      break;
    }
    case ControllerVariant::kDirectClamp: {
      const ClampedThrust c = baseline_direct_clamp(
          s.plant.q, s.plant.q_dot, cmd.q_t, cmd.d_hat, scenario_.nominal,
          model_.alloc, scenario_.gains, scenario_.barrier.t_min,
          scenario_.barrier.t_max);
      cmd.q_dd_d.setZero();
      cmd.thrust = c.clamped;
      cmd.thrust_raw = c.raw;
      break;
    }
  }
  cmd.h = barrier_values(thrust_of_state(x, model_), scenario_.barrier);
  cmd.beta_hat = residual_estimate(cmd.h, s.res, scenario_.barrier);
  return cmd;
}

SimState Simulator::advance(const SimState& s, const StepCommand& cmd) const {
  const bool clamp_variant =
      scenario_.controller == ControllerVariant::kDirectClamp;
  const ThrustVector applied{
      scenario_.actuator_saturation
          ? Vec6(cmd.thrust.T.cwiseMax(scenario_.barrier.t_min)
                     .cwiseMin(scenario_.barrier.t_max))
          : cmd.thrust.T};
  const Vec6 body_applied = plant_alloc_.matrix() * applied.T;
  const Vec6 body_commanded = model_.alloc.matrix() * cmd.thrust.T;
  const bool attached = s.plug_attached;

  auto rates = [&](const StateVec& y) {
    SimState st;
    unpack(y, st);
    if (clamp_variant) {
      st.q_d = cmd.q_d;
      st.q_d_dot.setZero();
    }
    const Vec3 phi = st.plant.phi();
    check_attitude(phi);
    const Mat6 b = input_map(phi);
    const GeneralizedWrench tau_plant{b * body_applied};
    const GeneralizedWrench tau_cmd{b * body_commanded};
    const EnvWrench env =
        environment_wrench(st.plant, st.cart, attached, cmd.wind);

    StateVec dy;
    dy.segment<6>(0) = st.plant.q_dot;
    dy.segment<6>(6) = forward_dynamics(st.plant, tau_plant, env.total, plant_);
    const ObserverRates obs = observer_rates(st.obs, st.plant.q_dot, tau_cmd,
                                             phi, scenario_.nominal,
                                             scenario_.observer);
    dy.segment<6>(12) = obs.zeta_dot;
    dy.segment<6>(18) = obs.chi_dot;
    if (clamp_variant) {
      dy.segment<6>(24).setZero();
      dy.segment<6>(30).setZero();
    } else {
      dy.segment<6>(24) = st.q_d_dot;
      dy.segment<6>(30) = cmd.q_dd_d;
    }
    const LieDerivatives lie = lie_derivatives(st.augmented(), model_);
    dy.segment<6>(36) =
        residual_state_rate(lie, st.res, cmd.q_dd_d, scenario_.barrier);
    if (scenario_.cart) {
      const CartState cr = cart_rates(st.cart, env.cart_force, *scenario_.cart);
      dy[42] = cr.x;
      dy[43] = cr.v;
    } else {
      dy[42] = 0.0;
      dy[43] = 0.0;
    }
    return dy;
  };

  StateVec y = pack(s);
  if (clamp_variant) {
    y.segment<6>(24) = cmd.q_d;
    y.segment<6>(30).setZero();
  }
  const double h = scenario_.dt / scenario_.substeps;
  for (int k = 0; k < scenario_.substeps; ++k) {
    const StateVec k1 = rates(y);
    const StateVec k2 = rates(y + 0.5 * h * k1);
    const StateVec k3 = rates(y + 0.5 * h * k2);
    const StateVec k4 = rates(y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  if (!y.allFinite() || y.cwiseAbs().maxCoeff() > kDivergenceThreshold) {
    std::ostringstream os;
    os << "state diverged at t = " << s.t;
    throw NumericalDivergence(os.str());
  }

  SimState next = s;
  unpack(y, next);
  next.step = s.step + 1;
  next.t = static_cast<double>(next.step) * scenario_.dt;
  check_attitude(next.plant.phi());
  if (scenario_.wind && scenario_.wind->noise_std > 0.0) {
    // Keep the generator in lock-step with the draws made for `cmd.wind`.
    wind_wrench(s.t, *scenario_.wind, next.rng);
  }
  if (scenario_.plug && s.plug_attached) {
    next.plug_attached =
        plug_wrench(next.plant, *scenario_.plug, scenario_.end_effector, true)
            .attached;
  }
  return next;
}

LogRow Simulator::make_row(const SimState& s, const StepCommand& cmd) const {
  LogRow row;
  row.t = s.t;
  row.q = s.plant.q;
  row.q_dot = s.plant.q_dot;
  row.q_d = cmd.q_d;
  row.q_t = cmd.q_t;
  row.q_dd_d = cmd.q_dd_d;
  row.thrust = cmd.thrust;
  row.thrust_raw = cmd.thrust_raw;
  row.d_hat = cmd.d_hat.w;
  row.h = cmd.h;
  row.status = cmd.status;
  row.cart = s.cart;
  row.plug_attached = s.plug_attached;
  row.beta_hat = cmd.beta_hat;

  const EnvWrench env =
      environment_wrench(s.plant, s.cart, s.plug_attached, cmd.wind);
  row.contact_force = env.contact_force;

  // True lumped disturbance: d = M_hat q_dd + C_hat + G_hat - tau_cmd.
  const Vec3 phi = s.plant.phi();
  const ThrustVector applied{
      scenario_.actuator_saturation
          ? Vec6(cmd.thrust.T.cwiseMax(scenario_.barrier.t_min)
                     .cwiseMin(scenario_.barrier.t_max))
          : cmd.thrust.T};
  const GeneralizedWrench tau_plant = thrust_to_wrench(applied, phi, plant_alloc_);
  const GeneralizedWrench tau_cmd = thrust_to_wrench(cmd.thrust, phi, model_.alloc);
  const Vec6 q_dd = forward_dynamics(s.plant, tau_plant, env.total, plant_);
  row.d_true = mass_matrix(phi, scenario_.nominal) * q_dd +
               coriolis_vector(phi, s.plant.phi_dot(), scenario_.nominal) +
               gravity_vector(scenario_.nominal) - tau_cmd.w;
  AugmentedState x = s.augmented();
  x.q_d = cmd.q_d;
  x.q_d_dot = cmd.q_d_dot;
  row.beta_true = residual_true(x, row.d_true - row.d_hat, model_);
  return row;
}

SimLog run(const Scenario& scenario) {
  SimLog log;
  log.scenario = scenario.name;
  log.controller = scenario.controller;
  log.seed = scenario.seed;
  log.dt = scenario.dt;
  log.barrier = scenario.barrier;
  if (scenario.cart) log.cart_goal = scenario.cart->goal_line;

  const Simulator sim(scenario);
  SimState s = sim.initial_state();
  const std::size_t n = scenario.step_count();
  log.rows.reserve(n + 1);

  try {
    for (std::size_t k = 0; k <= n; ++k) {
      const StepCommand cmd = sim.compute_command(s);
      log.rows.push_back(sim.make_row(s, cmd));
      if (k == 0) {
        const Vec6 e0 = log.rows.front().beta_true - log.rows.front().beta_hat;
        for (int i = 0; i < 6; ++i) {
          if (std::abs(e0[i]) >= scenario.barrier.sigma[i]) {
            std::ostringstream os;
            os << "|e_T," << i + 1 << "(t0)| = " << std::abs(e0[i])
               << " is not below sigma = " << scenario.barrier.sigma[i];
            log.warnings.push_back(os.str());
          }
        }
      }
      if (k == n) break;
      const bool was_attached = s.plug_attached;
      s = sim.advance(s, cmd);
      if (was_attached && !s.plug_attached && !log.breakaway_time)
        log.breakaway_time = s.t;
    }
  } catch (const Error& e) {
    log.aborted = true;
    log.abort_reason = e.what();
  }
  return log;
}

}  // namespace aphi

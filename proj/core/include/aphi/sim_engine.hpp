#pragma once

// Fixed-step closed-loop simulator: true plant, disturbance observer, one of
// the three controller variants and the interaction environment.
//
// Every control period dt the simulator
//   1. samples the piecewise-constant target q_t,
//   2. evaluates the controller variant (safety filter QP for the proposed
//      method) and the motor thrust command,
//   3. integrates plant, observer, residual estimator, desired trajectory and
//      cart jointly with classical RK4 (`substeps` stages of dt/substeps), with
//      the thrust command and q_dd_d held over the period,
//   4. checks plug breakaway, divergence and the attitude singularity.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "aphi/controller.hpp"
#include "aphi/dynamics.hpp"
#include "aphi/environment.hpp"
#include "aphi/observer.hpp"
#include "aphi/safety_filter.hpp"

namespace aphi {

struct TargetWaypoint {
  double t = 0.0;
  Vec6 q_t = Vec6::Zero();

  bool operator==(const TargetWaypoint&) const = default;
};

struct Scenario {
  std::string name = "custom";
  double duration = 10.0;
  double dt = 1e-3;
  int substeps = 1;
  ControllerVariant controller = ControllerVariant::kSafetyFilter;
  std::uint64_t seed = 1;

  VehicleParams nominal;
  // The simulated vehicle is the nominal one with scaled mass and inertia.
  double plant_mass_scale = 1.0;
  double plant_inertia_scale = 1.0;
  bool actuator_saturation = true;

  Vec6 initial_q = (Vec6() << 0.0, 0.0, 1.0, 0.0, 0.0, 0.0).finished();
  Vec6 initial_q_dot = Vec6::Zero();

  ControllerGains gains;
  ObserverGains observer;
  BarrierConfig barrier;
  TargetGenConfig target_gen;

  std::vector<TargetWaypoint> targets;

  EndEffectorConfig end_effector;
  std::optional<WallConfig> wall;
  std::optional<PlugConfig> plug;
  std::optional<CartConfig> cart;
  std::optional<WindConfig> wind;
  double wrench_cap = kDefaultWrenchCap;

  VehicleParams plant_params() const;
  /// Zero-order hold over the waypoint list; initial_q before the first one.
  Vec6 target_at(double t) const;
  std::size_t step_count() const;

  /// Throws ValidationError naming the violated invariant.
  void validate() const;

  bool operator==(const Scenario&) const = default;
};

enum class FilterStatus {
  kInactive,  // variant without a QP
  kOptimal,
  kRelaxed,
  kError,
};

std::string to_string(FilterStatus status);

struct SimState {
  double t = 0.0;
  std::size_t step = 0;
  PlantState plant;
  ObserverState obs;
  ResidualState res;
  Vec6 q_d = Vec6::Zero();
  Vec6 q_d_dot = Vec6::Zero();
  CartState cart;
  bool plug_attached = false;
  std::mt19937_64 rng;

  AugmentedState augmented() const {
    return {plant.q, plant.q_dot, obs.zeta, obs.chi, q_d, q_d_dot};
  }
};

/// Everything decided at the start of a control period.
struct StepCommand {
  Vec6 q_t = Vec6::Zero();
  Vec6 q_d = Vec6::Zero();      // desired pose the control law uses
  Vec6 q_d_dot = Vec6::Zero();
  Vec6 q_dd_d = Vec6::Zero();   // held over the period
  ThrustVector thrust;          // command sent to the motors
  ThrustVector thrust_raw;      // before any baseline clamp
  GeneralizedWrench d_hat;
  GeneralizedWrench wind;
  FilterStatus status = FilterStatus::kInactive;
  double slack_norm = 0.0;
  Vec6 h = Vec6::Zero();
  Vec6 beta_hat = Vec6::Zero();
};

struct LogRow {
  double t = 0.0;
  Vec6 q, q_dot, q_d, q_t, q_dd_d;
  ThrustVector thrust;
  ThrustVector thrust_raw;
  Vec6 d_hat;
  Vec6 h;
  FilterStatus status = FilterStatus::kInactive;
  Vec3 contact_force = Vec3::Zero();  // on the vehicle, world frame
  CartState cart;
  bool plug_attached = false;
  Vec6 beta_hat;
  Vec6 beta_true;  // from the known lumped disturbance
  Vec6 d_true;
};

struct SimLog {
  std::string scenario;
  ControllerVariant controller = ControllerVariant::kSafetyFilter;
  std::uint64_t seed = 0;
  double dt = 0.0;
  BarrierConfig barrier;
  std::vector<LogRow> rows;
  std::optional<double> breakaway_time;
  std::optional<double> cart_goal;  // goal line when a cart is simulated
  bool aborted = false;
  std::string abort_reason;
  std::vector<std::string> warnings;
};

/// Any state entry above this magnitude aborts the run.
inline constexpr double kDivergenceThreshold = 1e6;

class Simulator {
 public:
  explicit Simulator(Scenario scenario);

  const Scenario& scenario() const { return scenario_; }
  const SafetyModel& model() const { return model_; }
  const VehicleParams& plant_params() const { return plant_; }

  SimState initial_state() const;

  StepCommand compute_command(const SimState& s) const;

  /// Integrates one control period under `cmd`. Throws SingularAttitude,
  /// NumericalDivergence or EnvironmentOverload.
  SimState advance(const SimState& s, const StepCommand& cmd) const;

  SimState step(const SimState& s) const { return advance(s, compute_command(s)); }

  LogRow make_row(const SimState& s, const StepCommand& cmd) const;

  /// Environment wrench acting on the plant for the given state.
  struct EnvWrench {
    GeneralizedWrench total;
    Vec3 contact_force = Vec3::Zero();
    double cart_force = 0.0;
  };
  EnvWrench environment_wrench(const PlantState& plant, const CartState& cart,
                               bool plug_attached,
                               const GeneralizedWrench& wind) const;

 private:
  Scenario scenario_;
  VehicleParams plant_;
  SafetyModel model_;
  Allocation plant_alloc_;
};

/// Runs the whole scenario. Errors abort the run; the partial log is returned
/// with `aborted` set and the reason recorded.
SimLog run(const Scenario& scenario);

}  // namespace aphi

#pragma once

// Interaction wrenches acting on the vehicle through its tool tip, plus a
// fan-like wind disturbance. Contacts are penalty spring-dampers.

#include <limits>
#include <random>

#include "aphi/dynamics.hpp"
#include "aphi/types.hpp"

namespace aphi {

struct EndEffectorConfig {
  Vec3 offset_body = Vec3(0.35, 0.0, 0.0);

  bool operator==(const EndEffectorConfig&) const = default;
};

struct WallConfig {
  Vec3 plane_point = Vec3(0.6, 0.0, 0.0);
  Vec3 normal = Vec3::UnitX();  // points into the wall
  double stiffness = 500.0;
  double damping = 50.0;

  void validate() const;
  bool operator==(const WallConfig&) const = default;
};

struct PlugConfig {
  Vec3 anchor = Vec3(0.35, 0.0, 1.0);
  double stiffness = 800.0;
  double damping = 40.0;
  double break_force = 12.0;  // infinity: never detaches

  void validate() const;
  bool operator==(const PlugConfig&) const = default;
};

struct CartConfig {
  Vec3 axis = Vec3::UnitX();  // push direction
  double mass = 2.0;
  double viscous_friction = 4.0;
  double coulomb_friction = 3.0;
  double contact_stiffness = 500.0;
  double contact_damping = 50.0;
  double initial_position = 0.6;  // face coordinate along axis
  double goal_line = 1.0;

  void validate() const;
  bool operator==(const CartConfig&) const = default;
};

struct WindConfig {
  Vec3 mean_force = Vec3::Zero();
  Vec3 gust_amplitude = Vec3::Zero();
  double gust_frequency = 0.0;  // Hz
  double noise_std = 0.0;       // N

  void validate() const;
  bool operator==(const WindConfig&) const = default;
};

/// Tool-tip position and velocity in the world frame.
struct ToolTip {
  Vec3 position;
  Vec3 velocity;
};

ToolTip tool_tip(const PlantState& state, const EndEffectorConfig& ee);

/// A contact force together with the generalized wrench it induces.
struct ContactWrench {
  GeneralizedWrench wrench;
  Vec3 force = Vec3::Zero();  // world frame, acting on the vehicle
};

/// Generalized wrench of a world-frame force applied at the tool tip:
/// [F; Q^T (r_e x R^T F)].
GeneralizedWrench tool_force_wrench(const Vec3& force, const PlantState& state,
                                    const EndEffectorConfig& ee);

ContactWrench wall_wrench(const PlantState& state, const WallConfig& wall,
                          const EndEffectorConfig& ee);

struct PlugOutput {
  ContactWrench contact;
  bool attached = false;
};

/// Bilateral spring-damper between tool tip and anchor while attached. The
/// returned flag drops (and stays down) once the spring force exceeds
/// break_force.
PlugOutput plug_wrench(const PlantState& state, const PlugConfig& plug,
                       const EndEffectorConfig& ee, bool attached);

struct CartState {
  double x = 0.0;  // face coordinate along the push axis
  double v = 0.0;
};

struct CartContact {
  ContactWrench vehicle;       // acts on the vehicle
  double force_on_cart = 0.0;  // along the axis, >= 0
};

CartContact cart_contact(const CartState& cart_state, const PlantState& state,
                         const CartConfig& cart, const EndEffectorConfig& ee);

/// d/dt of (x, v) for a given contact force.
CartState cart_rates(const CartState& cart_state, double force_on_cart,
                     const CartConfig& cart);

struct CartStepResult {
  CartState next;
  ContactWrench vehicle;
};

/// Semi-implicit Euler step of the cart with the contact force frozen over dt.
CartStepResult cart_step(const CartState& cart_state, const PlantState& state,
                         const CartConfig& cart, const EndEffectorConfig& ee,
                         double dt);

/// Mean plus sinusoidal gust plus Gaussian noise on the translational rows.
GeneralizedWrench wind_wrench(double t, const WindConfig& wind,
                              std::mt19937_64& rng);

inline constexpr double kDefaultWrenchCap = 200.0;

/// Throws EnvironmentOverload when the force part exceeds `cap`.
void check_wrench_cap(const GeneralizedWrench& wrench, double cap,
                      const char* source);

}  // namespace aphi

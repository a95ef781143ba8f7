#include "aphi/environment.hpp"

#include <cmath>
#include <sstream>

namespace aphi {
namespace {

bool unit(const Vec3& n) { return std::abs(n.norm() - 1.0) < 1e-9; }

}  // namespace

void WallConfig::validate() const {
  if (!unit(normal)) throw ValidationError("WallConfig: |normal| = 1");
  if (!(stiffness >= 0.0)) throw ValidationError("WallConfig: stiffness >= 0");
  if (!(damping >= 0.0)) throw ValidationError("WallConfig: damping >= 0");
}

void PlugConfig::validate() const {
  if (!(stiffness >= 0.0)) throw ValidationError("PlugConfig: stiffness >= 0");
  if (!(damping >= 0.0)) throw ValidationError("PlugConfig: damping >= 0");
  if (!(break_force > 0.0)) throw ValidationError("PlugConfig: break_force > 0");
}

void CartConfig::validate() const {
  if (!unit(axis)) throw ValidationError("CartConfig: |axis| = 1");
  if (!(mass > 0.0)) throw ValidationError("CartConfig: mass > 0");
  if (!(viscous_friction >= 0.0) || !(coulomb_friction >= 0.0))
    throw ValidationError("CartConfig: frictions >= 0");
  if (!(contact_stiffness >= 0.0) || !(contact_damping >= 0.0))
    throw ValidationError("CartConfig: contact stiffness/damping >= 0");
}

void WindConfig::validate() const {
  if (!(gust_frequency >= 0.0))
    throw ValidationError("WindConfig: gust_frequency >= 0");
  if (!(noise_std >= 0.0)) throw ValidationError("WindConfig: noise_std >= 0");
}

ToolTip tool_tip(const PlantState& state, const EndEffectorConfig& ee) {
  const Vec3 phi = state.phi();
  const Mat3 r = rotation_matrix(phi);
  const Vec3 omega = euler_rate_map(phi) * state.phi_dot();
  return {state.p() + r * ee.offset_body,
          state.q_dot.head<3>() + r * omega.cross(ee.offset_body)};
}

GeneralizedWrench tool_force_wrench(const Vec3& force, const PlantState& state,
                                    const EndEffectorConfig& ee) {
  const Vec3 phi = state.phi();
  const Vec3 moment_body =
      ee.offset_body.cross(rotation_matrix(phi).transpose() * force);
  GeneralizedWrench out;
  out.w.head<3>() = force;
  out.w.tail<3>() = euler_rate_map(phi).transpose() * moment_body;
  return out;
}

ContactWrench wall_wrench(const PlantState& state, const WallConfig& wall,
                          const EndEffectorConfig& ee) {
  const ToolTip tip = tool_tip(state, ee);
  const double depth = wall.normal.dot(tip.position - wall.plane_point);
  if (depth <= 0.0) return {};
  const double rate = wall.normal.dot(tip.velocity);
  const double push = std::max(wall.stiffness * depth + wall.damping * rate, 0.0);
  ContactWrench out;
  out.force = -push * wall.normal;
  out.wrench = tool_force_wrench(out.force, state, ee);
  return out;
}

PlugOutput plug_wrench(const PlantState& state, const PlugConfig& plug,
                       const EndEffectorConfig& ee, bool attached) {
  if (!attached) return {};
  const ToolTip tip = tool_tip(state, ee);
  const Vec3 stretch = tip.position - plug.anchor;
  PlugOutput out;
  out.attached = plug.stiffness * stretch.norm() <= plug.break_force;
  out.contact.force = -plug.stiffness * stretch - plug.damping * tip.velocity;
  out.contact.wrench = tool_force_wrench(out.contact.force, state, ee);
  return out;
}

CartContact cart_contact(const CartState& cart_state, const PlantState& state,
                         const CartConfig& cart, const EndEffectorConfig& ee) {
  const ToolTip tip = tool_tip(state, ee);
  const double depth = cart.axis.dot(tip.position) - cart_state.x;
  if (depth <= 0.0) return {};
  const double rate = cart.axis.dot(tip.velocity) - cart_state.v;
  const double push = std::max(
      cart.contact_stiffness * depth + cart.contact_damping * rate, 0.0);
  CartContact out;
  out.force_on_cart = push;
  out.vehicle.force = -push * cart.axis;
  out.vehicle.wrench = tool_force_wrench(out.vehicle.force, state, ee);
  return out;
}

CartState cart_rates(const CartState& cart_state, double force_on_cart,
                     const CartConfig& cart) {
  const double v = cart_state.v;
  const double coulomb =
      std::abs(v) < 1e-4 ? 0.0 : cart.coulomb_friction * (v > 0.0 ? 1.0 : -1.0);
  return {v, (force_on_cart - cart.viscous_friction * v - coulomb) / cart.mass};
}

CartStepResult cart_step(const CartState& cart_state, const PlantState& state,
                         const CartConfig& cart, const EndEffectorConfig& ee,
                         double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("cart_step: dt must be > 0");
  const CartContact contact = cart_contact(cart_state, state, cart, ee);
  const CartState rate = cart_rates(cart_state, contact.force_on_cart, cart);
  CartStepResult out;
  out.next.v = cart_state.v + dt * rate.v;
  out.next.x = cart_state.x + dt * out.next.v;
  out.vehicle = contact.vehicle;
  return out;
}

GeneralizedWrench wind_wrench(double t, const WindConfig& wind,
                              std::mt19937_64& rng) {
  GeneralizedWrench out;
  Vec3 f = wind.mean_force +
           wind.gust_amplitude * std::sin(2.0 * M_PI * wind.gust_frequency * t);
  if (wind.noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, wind.noise_std);
    for (int i = 0; i < 3; ++i) f[i] += noise(rng);
  }
  out.w.head<3>() = f;
  return out;
}

void check_wrench_cap(const GeneralizedWrench& wrench, double cap,
                      const char* source) {
  const double f = wrench.w.head<3>().norm();
  if (!(f <= cap)) {
    std::ostringstream os;
    os << source << " force " << f << " N exceeds cap " << cap << " N";
    throw EnvironmentOverload(os.str());
  }
}

}  // namespace aphi

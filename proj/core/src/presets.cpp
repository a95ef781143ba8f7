#include "aphi/presets.hpp"

#include <limits>

namespace aphi {
namespace {

Vec6 pose(double x, double y, double z) {
  Vec6 q = Vec6::Zero();
  q << x, y, z, 0.0, 0.0, 0.0;
  return q;
}

// Hover at 1 m with a slightly heavier real vehicle than the model.
Scenario base(const char* name, double duration) {
  Scenario s;
  s.name = name;
  s.duration = duration;
  s.plant_mass_scale = 1.05;
  s.plant_inertia_scale = 1.10;
  s.initial_q = pose(0.0, 0.0, 1.0);
  return s;
}

WindConfig light_wind() {
  WindConfig w;
  w.mean_force = Vec3(0.2, 0.1, 0.0);
  w.gust_amplitude = Vec3(0.2, 0.2, 0.0);
  w.gust_frequency = 0.2;
  w.noise_std = 0.05;
  return w;
}

Scenario hover() {
  Scenario s = base("hover", 10.0);
  s.plant_mass_scale = 1.0;
  s.plant_inertia_scale = 1.0;
  return s;
}

// Push through a wall: the tool tip target sits 0.3 m behind the surface.
Scenario wall_push() {
  Scenario s = base("wall_push", 60.0);
  s.target_gen.k_dp = 0.5;
  s.wall = WallConfig{};  // surface at x = 0.6
  s.wind = light_wind();
  s.targets = {{2.0, pose(0.55, 0.0, 1.0)}, {40.0, pose(0.0, 0.0, 1.0)}};
  return s;
}

// Pull a socket that never lets go, target 0.2 m back from it.
Scenario plug_pull_firm() {
  Scenario s = base("plug_pull_firm", 30.0);
  s.target_gen.k_dp = 5.0;
  PlugConfig p;
  p.break_force = std::numeric_limits<double>::infinity();
  s.plug = p;
  s.wind = light_wind();
  s.targets = {{2.0, pose(-0.2, 0.0, 1.0)}};
  return s;
}

Scenario cart_push() {
  Scenario s = base("cart_push", 40.0);
  s.target_gen.k_dp = 0.5;
  CartConfig c;
  c.initial_position = 0.45;
  c.coulomb_friction = 3.0;
  c.goal_line = 1.0;
  s.cart = c;
  s.wind = light_wind();
  s.targets = {{2.0, pose(0.8, 0.0, 1.0)}};
  return s;
}

// Same pull as plug_pull_firm but the plug releases.
Scenario plug_extract() {
  Scenario s = plug_pull_firm();
  s.name = "plug_extract";
  s.plug->break_force = 7.0;
  return s;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"hover", "wall_push", "plug_pull_firm", "cart_push", "plug_extract"};
}

Scenario preset_scenario(std::string_view name) {
  if (name == "hover") return hover();
  if (name == "wall_push") return wall_push();
  if (name == "plug_pull_firm") return plug_pull_firm();
  if (name == "cart_push") return cart_push();
  if (name == "plug_extract") return plug_extract();
  throw ValidationError("unknown scenario preset '" + std::string(name) + "'");
}

}  // namespace aphi

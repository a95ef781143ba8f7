#include "aphi/scenario_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "aphi/presets.hpp"

namespace aphi {

ParseError::ParseError(const std::string& origin, int line, std::string key,
                       const std::string& what)
    : Error(origin + (line > 0 ? ":" + std::to_string(line) : "") + ": " +
            (key.empty() ? "" : "'" + key + "': ") + what),
      line_(line),
      key_(std::move(key)) {}

namespace {

struct Value {
  enum Kind { kString, kBool, kNumber, kArray } kind = kNumber;
  std::string text;  // string contents, or the raw number token
  bool flag = false;
  double number = 0.0;
  std::vector<double> array;
};

struct Entry {
  int line = 0;
  std::string key;
  Value value;
};

struct Block {
  std::string name;  // "" for root, "target" for [[target]]
  int line = 0;
  std::vector<Entry> entries;
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class Reader {
 public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(int line, const std::string& key,
                         const std::string& what) const {
    throw ParseError(origin_, line, key, what);
  }

  std::vector<Block> read(std::string_view text) {
    std::vector<Block> blocks(1);
    std::set<std::string> sections_seen;
    std::set<std::string> keys;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto nl = text.find('\n', pos);
      std::string_view raw =
          text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
      pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
      ++line_no;
      std::string_view line = trim(strip_comment(raw));
      if (line.empty()) continue;

      if (line.front() == '[') {
        const bool array_table = line.starts_with("[[");
        const std::string_view close = array_table ? "]]" : "]";
        if (!line.ends_with(close))
          fail(line_no, "", "unterminated section header");
        const std::size_t open = array_table ? 2 : 1;
        const std::string name(
            trim(line.substr(open, line.size() - open - close.size())));
        if (array_table) {
          if (name != "target") fail(line_no, name, "unknown table array");
        } else {
          if (name == "target") fail(line_no, name, "use [[target]]");
          if (!sections_seen.insert(name).second)
            fail(line_no, name, "duplicate section");
        }
        blocks.push_back({name, line_no, {}});
        keys.clear();
        continue;
      }

      const auto eq = line.find('=');
      if (eq == std::string_view::npos) fail(line_no, "", "expected key = value");
      Entry e;
      e.line = line_no;
      e.key = std::string(trim(line.substr(0, eq)));
      if (e.key.empty()) fail(line_no, "", "empty key");
      if (!keys.insert(e.key).second) fail(line_no, e.key, "duplicate key");
      e.value = parse_value(trim(line.substr(eq + 1)), line_no, e.key);
      blocks.back().entries.push_back(std::move(e));
    }
    return blocks;
  }

  const std::string& origin() const { return origin_; }

 private:
  static std::string_view strip_comment(std::string_view s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '\\' && quoted) {
        ++i;
      } else if (s[i] == '"') {
        quoted = !quoted;
      } else if (s[i] == '#' && !quoted) {
        return s.substr(0, i);
      }
    }
    return s;
  }

  double parse_number(std::string_view tok, int line, const std::string& key) const {
    tok = trim(tok);
    bool degrees = false;
    if (tok.ends_with("deg")) {
      degrees = true;
      tok = trim(tok.substr(0, tok.size() - 3));
    }
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || res.ec != std::errc() || res.ptr != tok.data() + tok.size())
      fail(line, key, "not a number: '" + std::string(tok) + "'");
    if (std::isnan(v)) fail(line, key, "nan is not allowed");
    return degrees ? v * M_PI / 180.0 : v;
  }

  Value parse_value(std::string_view s, int line, const std::string& key) const {
    Value v;
    if (s.empty()) fail(line, key, "missing value");
    if (s.front() == '"') {
      v.kind = Value::kString;
      std::size_t i = 1;
      for (; i < s.size() && s[i] != '"'; ++i) {
        if (s[i] == '\\' && i + 1 < s.size()) ++i;
        v.text.push_back(s[i]);
      }
      if (i + 1 != s.size()) fail(line, key, "bad string literal");
      return v;
    }
    if (s == "true" || s == "false") {
      v.kind = Value::kBool;
      v.flag = s == "true";
      return v;
    }
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, key, "unterminated array");
      v.kind = Value::kArray;
      std::string_view body = trim(s.substr(1, s.size() - 2));
      while (!body.empty()) {
        const auto comma = body.find(',');
        v.array.push_back(parse_number(body.substr(0, comma), line, key));
        if (comma == std::string_view::npos) break;
        body = trim(body.substr(comma + 1));
      }
      if (v.array.empty()) fail(line, key, "empty array");
      return v;
    }
    v.kind = Value::kNumber;
    v.text = std::string(s);
    v.number = parse_number(s, line, key);
    return v;
  }

  std::string origin_;
};

// Typed accessors; all failures point at the entry's line and key.
class Field {
 public:
  Field(const Reader& r, const Entry& e) : r_(r), e_(e) {}

  double number() const {
    if (e_.value.kind != Value::kNumber) fail("expected a number");
    return e_.value.number;
  }
  bool flag() const {
    if (e_.value.kind != Value::kBool) fail("expected true or false");
    return e_.value.flag;
  }
  std::string string() const {
    if (e_.value.kind != Value::kString) fail("expected a quoted string");
    return e_.value.text;
  }
  int integer() const {
    const double v = number();
    if (v != std::floor(v) || std::abs(v) > 1e9) fail("expected an integer");
    return static_cast<int>(v);
  }
  std::uint64_t u64() const {
    number();
    std::uint64_t v = 0;
    const std::string& t = e_.value.text;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
      fail("expected a non-negative integer");
    return v;
  }
  template <int N>
  Eigen::Matrix<double, N, 1> vec(bool broadcast = false) const {
    Eigen::Matrix<double, N, 1> out;
    if (broadcast && e_.value.kind == Value::kNumber) {
      out.setConstant(e_.value.number);
      return out;
    }
    if (e_.value.kind != Value::kArray ||
        e_.value.array.size() != static_cast<std::size_t>(N))
      fail("expected an array of " + std::to_string(N) + " numbers");
    for (int i = 0; i < N; ++i) out[i] = e_.value.array[i];
    return out;
  }
  Mat3 inertia() const {
    if (e_.value.kind == Value::kArray && e_.value.array.size() == 9) {
      Mat3 j;
      for (int i = 0; i < 9; ++i) j(i / 3, i % 3) = e_.value.array[i];
      return j;
    }
    if (e_.value.kind != Value::kArray || e_.value.array.size() != 3)
      fail("expected 3 diagonal entries or 9 row-major entries");
    return Vec3(e_.value.array[0], e_.value.array[1], e_.value.array[2])
        .asDiagonal();
  }

  [[noreturn]] void fail(const std::string& what) const {
    r_.fail(e_.line, e_.key, what);
  }
  [[noreturn]] void unknown() const { r_.fail(e_.line, e_.key, "unknown key"); }

 private:
  const Reader& r_;
  const Entry& e_;
};

void apply_root(const Reader& r, const Entry& e, Scenario& s) {
  const Field f(r, e);
  const std::string& k = e.key;
  if (k == "scenario") return;  // handled before everything else
  if (k == "name") s.name = f.string();
  else if (k == "duration") s.duration = f.number();
  else if (k == "dt") s.dt = f.number();
  else if (k == "substeps") s.substeps = f.integer();
  else if (k == "seed") s.seed = f.u64();
  else if (k == "controller") {
    try {
      s.controller = parse_controller_variant(f.string());
    } catch (const ValidationError& err) {
      f.fail(err.what());
    }
  } else if (k == "initial_q") s.initial_q = f.vec<6>();
  else if (k == "initial_q_dot") s.initial_q_dot = f.vec<6>();
  else if (k == "wrench_cap") s.wrench_cap = f.number();
  else f.unknown();
}

void apply_vehicle(const Reader& r, const Entry& e, VehicleParams& v) {
  const Field f(r, e);
  const std::string& k = e.key;
  if (k == "mass") v.m = f.number();
  else if (k == "inertia") v.J = f.inertia();
  else if (k == "arm_length") v.L = f.number();
  else if (k == "tilt") v.alpha = f.number();
  else if (k == "torque_coefficient") v.k_f = f.number();
  else if (k == "gravity") v.g = f.number();
  else f.unknown();
}

void apply_plant(const Reader& r, const Entry& e, Scenario& s) {
  const Field f(r, e);
  const std::string& k = e.key;
  if (k == "mass_scale") s.plant_mass_scale = f.number();
  else if (k == "inertia_scale") s.plant_inertia_scale = f.number();
  else if (k == "actuator_saturation") s.actuator_saturation = f.flag();
  else f.unknown();
}

void apply_controller(const Reader& r, const Entry& e, ControllerGains& g) {
  const Field f(r, e);
  if (e.key == "kp") g.kp = f.vec<6>(true);
  else if (e.key == "kd") g.kd = f.vec<6>(true);
  else f.unknown();
}

void apply_observer(const Reader& r, const Entry& e, ObserverGains& g) {
  const Field f(r, e);
  if (e.key == "gamma_zeta") g.gamma_zeta = f.vec<6>(true);
  else if (e.key == "gamma_chi") g.gamma_chi = f.vec<6>(true);
  else if (e.key == "mu") g.mu = f.vec<6>(true);
  else f.unknown();
}

void apply_barrier(const Reader& r, const Entry& e, BarrierConfig& b) {
  const Field f(r, e);
  const std::string& k = e.key;
  if (k == "t_min") b.t_min = f.number();
  else if (k == "t_max") b.t_max = f.number();
  else if (k == "gamma") b.gamma = f.vec<6>(true);
  else if (k == "k_beta") b.k_beta = f.vec<6>(true);
  else if (k == "sigma") b.sigma = f.vec<6>(true);
  else f.unknown();
}

void apply_target_gen(const Reader& r, const Entry& e, TargetGenConfig& g) {
  const Field f(r, e);
  const std::string& k = e.key;
  if (k == "k_a") g.k_a = f.vec<6>(true);
  else if (k == "delta_min") g.delta_min = f.number();
  else if (k == "delta_max") g.delta_max = f.number();
  else if (k == "k_dp") g.k_dp = f.number();
  else f.unknown();
}

void apply_end_effector(const Reader& r, const Entry& e, EndEffectorConfig& c) {
  const Field f(r, e);
  if (e.key == "offset") c.offset_body = f.vec<3>();
  else f.unknown();
}

void apply_wall(const Reader& r, const Entry& e, WallConfig& c) {
  const Field f(r, e);
  const std::string& k = e.key;
  if (k == "point") c.plane_point = f.vec<3>();
  else if (k == "normal") c.normal = f.vec<3>();
  else if (k == "stiffness") c.stiffness = f.number();
  else if (k == "damping") c.damping = f.number();
  else f.unknown();
}

void apply_plug(const Reader& r, const Entry& e, PlugConfig& c) {
  const Field f(r, e);
  const std::string& k = e.key;
  if (k == "anchor") c.anchor = f.vec<3>();
  else if (k == "stiffness") c.stiffness = f.number();
  else if (k == "damping") c.damping = f.number();
  else if (k == "break_force") c.break_force = f.number();
  else f.unknown();
}

void apply_cart(const Reader& r, const Entry& e, CartConfig& c) {
  const Field f(r, e);
  const std::string& k = e.key;
  if (k == "axis") c.axis = f.vec<3>();
  else if (k == "mass") c.mass = f.number();
  else if (k == "viscous_friction") c.viscous_friction = f.number();
  else if (k == "coulomb_friction") c.coulomb_friction = f.number();
  else if (k == "contact_stiffness") c.contact_stiffness = f.number();
  else if (k == "contact_damping") c.contact_damping = f.number();
  else if (k == "initial_position") c.initial_position = f.number();
  else if (k == "goal_line") c.goal_line = f.number();
  else f.unknown();
}

void apply_wind(const Reader& r, const Entry& e, WindConfig& c) {
  const Field f(r, e);
  const std::string& k = e.key;
  if (k == "mean_force") c.mean_force = f.vec<3>();
  else if (k == "gust_amplitude") c.gust_amplitude = f.vec<3>();
  else if (k == "gust_frequency") c.gust_frequency = f.number();
  else if (k == "noise_std") c.noise_std = f.number();
  else f.unknown();
}

// Environment sections: `enabled` first, then the remaining keys.
template <class Config, class Apply>
void apply_optional(const Reader& r, const Block& b, std::optional<Config>& slot,
                    Apply apply) {
  bool enabled = true;
  for (const Entry& e : b.entries)
    if (e.key == "enabled") enabled = Field(r, e).flag();
  if (!enabled) {
    slot.reset();
    return;
  }
  if (!slot) slot.emplace();
  for (const Entry& e : b.entries)
    if (e.key != "enabled") apply(r, e, *slot);
}

TargetWaypoint read_target(const Reader& r, const Block& b) {
  TargetWaypoint wp;
  bool has_t = false;
  bool has_q = false;
  for (const Entry& e : b.entries) {
    const Field f(r, e);
    if (e.key == "t") {
      wp.t = f.number();
      has_t = true;
    } else if (e.key == "q") {
      wp.q_t = f.vec<6>();
      has_q = true;
    } else {
      f.unknown();
    }
  }
  if (!has_t) r.fail(b.line, "t", "[[target]] needs a time");
  if (!has_q) r.fail(b.line, "q", "[[target]] needs a pose");
  return wp;
}

}  // namespace

Scenario parse_scenario(std::string_view text, const std::string& origin) {
  Reader reader(origin);
  const std::vector<Block> blocks = reader.read(text);

  Scenario s;
  for (const Entry& e : blocks.front().entries) {
    if (e.key != "scenario") continue;
    const std::string name = Field(reader, e).string();
    try {
      s = preset_scenario(name);
    } catch (const ValidationError& err) {
      reader.fail(e.line, e.key, err.what());
    }
  }

  bool targets_reset = false;
  for (const Block& b : blocks) {
    const std::string& n = b.name;
    auto each = [&](auto apply, auto& target) {
      for (const Entry& e : b.entries) apply(reader, e, target);
    };
    if (n.empty()) {
      for (const Entry& e : b.entries) apply_root(reader, e, s);
    } else if (n == "vehicle") {
      each(apply_vehicle, s.nominal);
    } else if (n == "plant") {
      for (const Entry& e : b.entries) apply_plant(reader, e, s);
    } else if (n == "controller") {
      each(apply_controller, s.gains);
    } else if (n == "observer") {
      each(apply_observer, s.observer);
    } else if (n == "barrier") {
      each(apply_barrier, s.barrier);
    } else if (n == "target_generator") {
      each(apply_target_gen, s.target_gen);
    } else if (n == "end_effector") {
      each(apply_end_effector, s.end_effector);
    } else if (n == "wall") {
      apply_optional(reader, b, s.wall, apply_wall);
    } else if (n == "plug") {
      apply_optional(reader, b, s.plug, apply_plug);
    } else if (n == "cart") {
      apply_optional(reader, b, s.cart, apply_cart);
    } else if (n == "wind") {
      apply_optional(reader, b, s.wind, apply_wind);
    } else if (n == "target") {
      if (!targets_reset) {
        s.targets.clear();
        targets_reset = true;
      }
      s.targets.push_back(read_target(reader, b));
    } else {
      reader.fail(b.line, n, "unknown section");
    }
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

namespace {

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <class Derived>
std::string arr(const Eigen::MatrixBase<Derived>& v) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += num(v(i));
  }
  return out + "]";
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

}  // namespace

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream o;
  o << "name = " << quoted(s.name) << "\n"
    << "duration = " << num(s.duration) << "\n"
    << "dt = " << num(s.dt) << "\n"
    << "substeps = " << s.substeps << "\n"
    << "controller = " << quoted(to_string(s.controller)) << "\n"
    << "seed = " << s.seed << "\n"
    << "initial_q = " << arr(s.initial_q) << "\n"
    << "initial_q_dot = " << arr(s.initial_q_dot) << "\n"
    << "wrench_cap = " << num(s.wrench_cap) << "\n";

  const VehicleParams& v = s.nominal;
  const bool diagonal = v.J.isDiagonal(0.0);
  Mat3 jt = v.J.transpose();  // row-major flattening
  o << "\n[vehicle]\n"
    << "mass = " << num(v.m) << "\n"
    << "inertia = "
    << (diagonal ? arr(Vec3(v.J.diagonal()))
                 : arr(Eigen::Map<const Eigen::Matrix<double, 9, 1>>(jt.data())))
    << "\n"
    << "arm_length = " << num(v.L) << "\n"
    << "tilt = " << num(v.alpha) << "\n"
    << "torque_coefficient = " << num(v.k_f) << "\n"
    << "gravity = " << num(v.g) << "\n";

  o << "\n[plant]\n"
    << "mass_scale = " << num(s.plant_mass_scale) << "\n"
    << "inertia_scale = " << num(s.plant_inertia_scale) << "\n"
    << "actuator_saturation = " << (s.actuator_saturation ? "true" : "false")
    << "\n";

  o << "\n[controller]\n"
    << "kp = " << arr(s.gains.kp) << "\n"
    << "kd = " << arr(s.gains.kd) << "\n";

  o << "\n[observer]\n"
    << "gamma_zeta = " << arr(s.observer.gamma_zeta) << "\n"
    << "gamma_chi = " << arr(s.observer.gamma_chi) << "\n"
    << "mu = " << arr(s.observer.mu) << "\n";

  o << "\n[barrier]\n"
    << "t_min = " << num(s.barrier.t_min) << "\n"
    << "t_max = " << num(s.barrier.t_max) << "\n"
    << "gamma = " << arr(s.barrier.gamma) << "\n"
    << "k_beta = " << arr(s.barrier.k_beta) << "\n"
    << "sigma = " << arr(s.barrier.sigma) << "\n";

  o << "\n[target_generator]\n"
    << "k_a = " << arr(s.target_gen.k_a) << "\n"
    << "delta_min = " << num(s.target_gen.delta_min) << "\n"
    << "delta_max = " << num(s.target_gen.delta_max) << "\n"
    << "k_dp = " << num(s.target_gen.k_dp) << "\n";

  o << "\n[end_effector]\n"
    << "offset = " << arr(s.end_effector.offset_body) << "\n";

  if (s.wall) {
    o << "\n[wall]\n"
      << "point = " << arr(s.wall->plane_point) << "\n"
      << "normal = " << arr(s.wall->normal) << "\n"
      << "stiffness = " << num(s.wall->stiffness) << "\n"
      << "damping = " << num(s.wall->damping) << "\n";
  }
  if (s.plug) {
    o << "\n[plug]\n"
      << "anchor = " << arr(s.plug->anchor) << "\n"
      << "stiffness = " << num(s.plug->stiffness) << "\n"
      << "damping = " << num(s.plug->damping) << "\n"
      << "break_force = " << num(s.plug->break_force) << "\n";
  }
  if (s.cart) {
    const CartConfig& c = *s.cart;
    o << "\n[cart]\n"
      << "axis = " << arr(c.axis) << "\n"
      << "mass = " << num(c.mass) << "\n"
      << "viscous_friction = " << num(c.viscous_friction) << "\n"
      << "coulomb_friction = " << num(c.coulomb_friction) << "\n"
      << "contact_stiffness = " << num(c.contact_stiffness) << "\n"
      << "contact_damping = " << num(c.contact_damping) << "\n"
      << "initial_position = " << num(c.initial_position) << "\n"
      << "goal_line = " << num(c.goal_line) << "\n";
  }
  if (s.wind) {
    o << "\n[wind]\n"
      << "mean_force = " << arr(s.wind->mean_force) << "\n"
      << "gust_amplitude = " << arr(s.wind->gust_amplitude) << "\n"
      << "gust_frequency = " << num(s.wind->gust_frequency) << "\n"
      << "noise_std = " << num(s.wind->noise_std) << "\n";
  }
  for (const TargetWaypoint& wp : s.targets) {
    o << "\n[[target]]\n"
      << "t = " << num(wp.t) << "\n"
      << "q = " << arr(wp.q_t) << "\n";
  }
  return o.str();
}

}  // namespace aphi

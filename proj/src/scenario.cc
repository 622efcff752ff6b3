#include "formpc/scenario.h"

#include <cmath>
#include <fstream>
#include <iterator>
#include <initializer_list>
#include <set>

#include "formpc/errors.h"
#include "formpc/riccati.h"
#include "formpc/toml_reader.h"

namespace formpc {

std::string_view to_string(ControlMode mode) {
  return mode == ControlMode::centralized ? "centralized" : "decentralized";
}

ControlMode control_mode_from_string(std::string_view name) {
  if (name == "centralized") return ControlMode::centralized;
  if (name == "decentralized") return ControlMode::decentralized;
  throw ConfigError("control_mode", "expected centralized or decentralized, got '" +
                                        std::string(name) + "'");
}

int Scenario::step_count() const {
  return static_cast<int>(std::ceil(duration / dt - 1e-9));
}

double Scenario::effective_activation_distance() const {
  return activation_distance > 0.0 ? activation_distance
                                   : limits.v_max * dt * mpc.np;
}

MpcConfig vehicle_mpc_config(const Scenario& scenario) {
  const StateSpaceModel model = double_integrator_3d(scenario.dt);
  Eigen::VectorXd q(6);
  q << scenario.mpc.q_position, scenario.mpc.q_velocity;
  const Eigen::MatrixXd Q = q.asDiagonal();
  const Eigen::MatrixXd R = scenario.mpc.r.asDiagonal();
  MpcConfig c = make_config(model, scenario.mpc.np, scenario.mpc.nu,
                            scenario.mpc.nc, Q, R);
  const bool need_dare = scenario.mpc.terminal_weight == TerminalWeight::dare ||
                         scenario.mpc.terminal_gain == TerminalGain::lqr;
  if (need_dare) {
    const Eigen::MatrixXd X = solve_dare(model.A, model.B, Q, R);
    if (scenario.mpc.terminal_weight == TerminalWeight::dare) c.P = X;
    if (scenario.mpc.terminal_gain == TerminalGain::lqr) {
      c.K = lqr_gain(model.A, model.B, R, X);
    }
  }
  c.u_min = Eigen::VectorXd::Constant(3, -scenario.limits.a_max);
  c.u_max = Eigen::VectorXd::Constant(3, scenario.limits.a_max);
  c.y_min = scenario.mpc.y_min;
  c.y_max = scenario.mpc.y_max;
  c.slack_penalty = scenario.mpc.slack_penalty;
  c.solver_tol = scenario.mpc.solver_tol;
  c.solver_max_iter = scenario.mpc.solver_max_iter;
  return c;
}

void Scenario::validate() const {
  if (initial_states.empty()) throw ConfigError("vehicles.count", "need at least one vehicle");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("sim.dt", "must be positive");
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw ConfigError("sim.duration", "must be positive");
  }
  if (activation_distance < 0.0) {
    throw ConfigError("sim.activation_distance", "must be nonnegative");
  }
  try {
    limits.validate();
  } catch (const ConfigError& e) {
    throw ConfigError("vehicles." + e.key(), e.message());
  }
  if (!(separation.d_min > 0.0)) throw ConfigError("formation.d_min", "must be positive");
  if (geometry.size() != vehicle_count()) {
    throw ConfigError("formation.slots", "slot count " + std::to_string(geometry.size()) +
                                             " does not match vehicle count " +
                                             std::to_string(vehicle_count()));
  }
  try {
    geometry.validate(separation.d_min);
  } catch (const ConfigError& e) {
    throw ConfigError("formation." + e.key(), e.message());
  }
  try {
    path.validate();
  } catch (const ConfigError& e) {
    throw ConfigError("path." + e.key(), e.message());
  }
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    try {
      reduce_obstacle(Cylinder{obstacles[i].center, obstacles[i].radius},
                      obstacles[i].margin);
    } catch (const ConfigError& e) {
      throw ConfigError("obstacles[" + std::to_string(i) + "]." + e.key(), e.message());
    }
  }
  for (int i = 0; i < vehicle_count(); ++i) {
    if (!initial_states[i].position.allFinite() || !initial_states[i].velocity.allFinite()) {
      throw ConfigError("vehicles.initial_positions", "non-finite initial state");
    }
    for (int j = i + 1; j < vehicle_count(); ++j) {
      const double dist =
          (initial_states[i].position - initial_states[j].position).head<2>().norm();
      if (dist < separation.d_min) {
        throw ConfigError("vehicles.initial_positions",
                          "vehicles " + std::to_string(i) + " and " + std::to_string(j) +
                              " start closer than d_min");
      }
    }
  }
  try {
    vehicle_mpc_config(*this).validate(double_integrator_3d(dt));
  } catch (const ConfigError& e) {
    throw ConfigError("mpc." + e.key(), e.message());
  }
}

namespace {

using toml::Value;

class Section {
 public:
  Section(const Value* table, std::string name) : table_(table), name_(std::move(name)) {}

  bool present() const { return table_ != nullptr; }

  void allow(std::initializer_list<std::string_view> keys) const {
    if (!table_) return;
    for (const auto& [k, v] : table_->table) {
      bool known = false;
      for (auto allowed : keys) known = known || allowed == k;
      if (!known) throw ConfigError(key(k), "unknown key");
    }
  }

  const Value* get(std::string_view k) const { return table_ ? table_->find(k) : nullptr; }

  std::string key(std::string_view k) const { return name_ + "." + std::string(k); }

  double number(std::string_view k, double fallback) const {
    const Value* v = get(k);
    if (!v) return fallback;
    return as_number(*v, key(k));
  }

  int integer(std::string_view k, int fallback) const {
    const Value* v = get(k);
    if (!v) return fallback;
    if (v->kind != Value::Kind::integer) throw ConfigError(key(k), "expected an integer");
    return static_cast<int>(v->integer);
  }

  std::string string(std::string_view k, std::string fallback) const {
    const Value* v = get(k);
    if (!v) return fallback;
    if (v->kind != Value::Kind::string) throw ConfigError(key(k), "expected a string");
    return v->string;
  }

  Eigen::Vector3d vec3(std::string_view k, const Eigen::Vector3d& fallback) const {
    const Value* v = get(k);
    if (!v) return fallback;
    if (v->is_number()) return Eigen::Vector3d::Constant(as_number(*v, key(k)));
    return as_vec3(*v, key(k));
  }

  static double as_number(const Value& v, const std::string& k) {
    if (!v.is_number()) {
      throw ConfigError(k, std::string("expected a number, got ") +
                               std::string(toml::kind_name(v.kind)));
    }
    return v.as_number();
  }

  static Eigen::Vector3d as_vec3(const Value& v, const std::string& k) {
    if (v.kind != Value::Kind::array || v.array.size() != 3) {
      throw ConfigError(k, "expected an array of 3 numbers");
    }
    return {as_number(v.array[0], k), as_number(v.array[1], k), as_number(v.array[2], k)};
  }

  static Eigen::Vector2d as_vec2(const Value& v, const std::string& k) {
    if (v.kind != Value::Kind::array || v.array.size() != 2) {
      throw ConfigError(k, "expected an array of 2 numbers");
    }
    return {as_number(v.array[0], k), as_number(v.array[1], k)};
  }

  std::vector<Eigen::Vector3d> vec3_list(std::string_view k) const {
    std::vector<Eigen::Vector3d> out;
    const Value* v = get(k);
    if (!v) return out;
    if (v->kind != Value::Kind::array) throw ConfigError(key(k), "expected an array");
    for (const auto& item : v->array) out.push_back(as_vec3(item, key(k)));
    return out;
  }

 private:
  const Value* table_;
  std::string name_;
};

ReferencePath parse_path(const Section& path) {
  ReferencePath out;
  const Value* wps = path.get("waypoints");
  if (!wps) throw ConfigError("path.waypoints", "missing");
  if (wps->kind != Value::Kind::array) throw ConfigError("path.waypoints", "expected an array");
  for (std::size_t i = 0; i < wps->array.size(); ++i) {
    const Value& w = wps->array[i];
    const std::string name = "path.waypoints[" + std::to_string(i) + "]";
    if (w.kind != Value::Kind::table) throw ConfigError(name, "expected an inline table");
    const Section s(&w, name);
    s.allow({"t", "position", "speed"});
    const Value* pos = s.get("position");
    if (!pos) throw ConfigError(s.key("position"), "missing");
    Waypoint wp;
    wp.position = Section::as_vec3(*pos, s.key("position"));
    const Value* t = s.get("t");
    const Value* speed = s.get("speed");
    if (speed) wp.speed = Section::as_number(*speed, s.key("speed"));
    if (t) {
      wp.time = Section::as_number(*t, s.key("t"));
    } else if (i == 0) {
      wp.time = 0.0;
    } else if (wp.speed) {
      if (!(*wp.speed > 0.0)) throw ConfigError(s.key("speed"), "must be positive");
      const Waypoint& prev = out.waypoints.back();
      wp.time = prev.time + (wp.position - prev.position).norm() / *wp.speed;
    } else {
      throw ConfigError(name, "needs either t or speed");
    }
    out.waypoints.push_back(wp);
  }
  return out;
}

}  // namespace

Scenario parse_scenario(std::string_view toml_text, std::string name) {
  const Value root = toml::parse(toml_text);
  for (const auto& [k, v] : root.table) {
    static const std::set<std::string> known{"vehicles", "mpc", "formation",
                                             "path", "obstacles", "sim"};
    if (!known.count(k)) throw ConfigError(k, "unknown section");
    if (k == "obstacles") {
      if (v.kind != Value::Kind::array) throw ConfigError(k, "expected [[obstacles]]");
    } else if (v.kind != Value::Kind::table) {
      throw ConfigError(k, "expected a table");
    }
  }

  Scenario sc;
  sc.name = std::move(name);

  const Section vehicles(root.find("vehicles"), "vehicles");
  if (!vehicles.present()) throw ConfigError("vehicles", "missing section");
  vehicles.allow({"count", "initial_positions", "initial_velocities", "initial_heading",
                  "a_max", "v_max"});
  const auto positions = vehicles.vec3_list("initial_positions");
  const auto velocities = vehicles.vec3_list("initial_velocities");
  const int count = vehicles.integer("count", static_cast<int>(positions.size()));
  if (count < 1) throw ConfigError("vehicles.count", "need at least one vehicle");
  if (static_cast<int>(positions.size()) != count) {
    throw ConfigError("vehicles.initial_positions", "expected " + std::to_string(count) +
                                                        " positions");
  }
  if (!velocities.empty() && static_cast<int>(velocities.size()) != count) {
    throw ConfigError("vehicles.initial_velocities", "expected " + std::to_string(count) +
                                                         " velocities");
  }
  const double heading0 = vehicles.number("initial_heading", 0.0);
  for (int i = 0; i < count; ++i) {
    VehicleState s;
    s.position = positions[i];
    if (!velocities.empty()) s.velocity = velocities[i];
    s.heading = heading_from_velocity(s.velocity, wrap_angle(heading0));
    sc.initial_states.push_back(s);
  }
  sc.limits.a_max = vehicles.number("a_max", 3.0);
  sc.limits.v_max = vehicles.number("v_max", 10.0);

  const Section mpc(root.find("mpc"), "mpc");
  mpc.allow({"np", "nu", "nc", "q_position", "q_velocity", "r", "terminal_weight",
             "terminal_gain", "slack_penalty", "solver_tol", "solver_max_iter", "y_min",
             "y_max"});
  MpcSettings& m = sc.mpc;
  m.np = mpc.integer("np", m.np);
  m.nu = mpc.integer("nu", std::min(m.nu, m.np));
  m.nc = mpc.integer("nc", m.np);
  m.q_position = mpc.vec3("q_position", m.q_position);
  m.q_velocity = mpc.vec3("q_velocity", m.q_velocity);
  m.r = mpc.vec3("r", m.r);
  const std::string tw = mpc.string("terminal_weight", "stage");
  if (tw == "stage") {
    m.terminal_weight = TerminalWeight::stage;
  } else if (tw == "dare") {
    m.terminal_weight = TerminalWeight::dare;
  } else {
    throw ConfigError("mpc.terminal_weight", "expected stage or dare");
  }
  const std::string tg = mpc.string("terminal_gain", "zero");
  if (tg == "zero") {
    m.terminal_gain = TerminalGain::zero;
  } else if (tg == "lqr") {
    m.terminal_gain = TerminalGain::lqr;
  } else {
    throw ConfigError("mpc.terminal_gain", "expected zero or lqr");
  }
  m.slack_penalty = mpc.number("slack_penalty", m.slack_penalty);
  m.solver_tol = mpc.number("solver_tol", m.solver_tol);
  m.solver_max_iter = mpc.integer("solver_max_iter", m.solver_max_iter);
  m.y_min = mpc.vec3("y_min", m.y_min);
  m.y_max = mpc.vec3("y_max", m.y_max);

  const Section formation(root.find("formation"), "formation");
  formation.allow({"mode", "slots", "d_min"});
  sc.mode = formation_mode_from_string(formation.string("mode", "leader_follower"));
  const auto slots = formation.vec3_list("slots");
  if (!slots.empty()) {
    sc.geometry.slots = slots;
  } else if (count != 3) {
    throw ConfigError("formation.slots", "required unless flying the default triangle");
  }
  sc.separation.d_min = formation.number("d_min", sc.separation.d_min);

  const Section path(root.find("path"), "path");
  if (!path.present()) throw ConfigError("path", "missing section");
  path.allow({"waypoints"});
  sc.path = parse_path(path);

  if (const Value* obs = root.find("obstacles")) {
    for (std::size_t i = 0; i < obs->array.size(); ++i) {
      const Section o(&obs->array[i], "obstacles[" + std::to_string(i) + "]");
      o.allow({"center", "radius", "margin"});
      const Value* center = o.get("center");
      if (!center) throw ConfigError(o.key("center"), "missing");
      const Value* radius = o.get("radius");
      if (!radius) throw ConfigError(o.key("radius"), "missing");
      CircleObstacle c;
      c.center = Section::as_vec2(*center, o.key("center"));
      c.radius = Section::as_number(*radius, o.key("radius"));
      c.margin = o.number("margin", 0.0);
      sc.obstacles.push_back(c);
    }
  }

  const Section sim(root.find("sim"), "sim");
  sim.allow({"dt", "duration", "control_mode", "seed", "activation_distance"});
  sc.dt = sim.number("dt", sc.dt);
  sc.duration = sim.number("duration", sc.duration);
  sc.control_mode = control_mode_from_string(sim.string("control_mode", "centralized"));
  const int seed = sim.integer("seed", 0);
  if (seed < 0) throw ConfigError("sim.seed", "must be nonnegative");
  sc.seed = static_cast<std::uint64_t>(seed);
  sc.activation_distance = sim.number("activation_distance", 0.0);

  sc.validate();
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw ConfigError("scenario", "cannot read '" + path.string() + "'");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("scenario", "cannot read '" + path.string() + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_scenario(text, path.stem().string());
}

}  // namespace formpc

#include <cmath>
#include <numbers>
#include <string>

#include <gtest/gtest.h>

#include "formpc/errors.h"
#include "formpc/scenario.h"
#include "formpc/toml_reader.h"

namespace formpc {
namespace {

std::string error_key(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

const char* const kMinimal = R"(
[vehicles]
initial_positions = [[0, 0, 0], [-5, 5, 0], [-5, -5, 0]]

[path]
waypoints = [{ t = 0, position = [0, 0, 0] }, { position = [50, 0, 0], speed = 5 }]
)";

TEST(Toml, ScalarsArraysAndTables) {
  const toml::Value v = toml::parse(R"(
title = "x" # comment
[a]
i = -3
f = 2.5e1
b = true
arr = [1, 2.0, [3]]
s = 'lit\n'
pos.inf = inf
neg = -inf
[a.sub]
k = { x = 1, y = "two" }
[[list]]
n = 1
[[list]]
n = 2
)");
  EXPECT_EQ(v.find("title")->string, "x");
  const toml::Value* a = v.find("a");
  ASSERT_NE(a, nullptr);
  EXPECT_EQ(a->find("i")->integer, -3);
  EXPECT_DOUBLE_EQ(a->find("f")->floating, 25.0);
  EXPECT_TRUE(a->find("b")->boolean);
  EXPECT_EQ(a->find("arr")->array.size(), 3u);
  EXPECT_EQ(a->find("s")->string, "lit\\n");
  EXPECT_TRUE(std::isinf(a->find("pos")->find("inf")->floating));
  EXPECT_LT(a->find("neg")->floating, 0.0);
  EXPECT_EQ(a->find("sub")->find("k")->find("y")->string, "two");
  const toml::Value* list = v.find("list");
  ASSERT_EQ(list->array.size(), 2u);
  EXPECT_EQ(list->array[1].find("n")->integer, 2);
}

TEST(Toml, BasicStringEscapes) {
  const toml::Value v = toml::parse("s = \"a\\tb\\\"c\\u00e9\"\n");
  EXPECT_EQ(v.find("s")->string, "a\tb\"c\xc3\xa9");
}

TEST(Toml, MalformedInputReportsLine) {
  try {
    toml::parse("a = 1\nb = \n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "toml");
    EXPECT_NE(e.message().find("line 2"), std::string::npos);
  }
  EXPECT_THROW(toml::parse("a = 1\na = 2\n"), ConfigError);
  EXPECT_THROW(toml::parse("[t]\n[t]\n"), ConfigError);
  EXPECT_THROW(toml::parse("x = [1, 2\n"), ConfigError);
  EXPECT_THROW(toml::parse("x = \"open\n"), ConfigError);
}

TEST(Scenario, MinimalParsesWithDefaults) {
  const Scenario sc = parse_scenario(kMinimal, "minimal");
  EXPECT_EQ(sc.name, "minimal");
  EXPECT_EQ(sc.vehicle_count(), 3);
  EXPECT_EQ(sc.mode, FormationMode::leader_follower);
  EXPECT_EQ(sc.control_mode, ControlMode::centralized);
  EXPECT_DOUBLE_EQ(sc.dt, 0.5);
  EXPECT_EQ(sc.step_count(), 120);
  EXPECT_DOUBLE_EQ(sc.path.end_time(), 10.0);
  EXPECT_DOUBLE_EQ(sc.limits.a_max, 3.0);
  EXPECT_DOUBLE_EQ(sc.effective_activation_distance(), 10.0 * 0.5 * 12);
}

TEST(Scenario, FullSchema) {
  const Scenario sc = parse_scenario(R"(
[vehicles]
count = 2
initial_positions = [[0, 0, 0], [0, 4, 0]]
initial_velocities = [[0, 1, 0], [0, 1, 0]]
a_max = 2
v_max = 6
[mpc]
np = 8
nu = 3
nc = 5
q_position = [2, 2, 1]
q_velocity = 0.25
r = 0.5
terminal_weight = "dare"
terminal_gain = "lqr"
slack_penalty = 500.0
solver_tol = 1e-7
solver_max_iter = 300
y_min = [-inf, -10, -inf]
[formation]
mode = "virtual_structure"
slots = [[0, 0, 0], [0, 4, 0]]
d_min = 1.5
[path]
waypoints = [{ t = 0, position = [0, 0, 0] }, { t = 10, position = [0, 10, 0] }]
[[obstacles]]
center = [5, 5]
radius = 1.0
margin = 0.5
[sim]
dt = 0.25
duration = 12.5
control_mode = "decentralized"
seed = 42
activation_distance = 7.5
)");
  EXPECT_EQ(sc.mpc.np, 8);
  EXPECT_EQ(sc.mpc.nc, 5);
  EXPECT_EQ(sc.mpc.q_position, Eigen::Vector3d(2, 2, 1));
  EXPECT_EQ(sc.mpc.terminal_weight, TerminalWeight::dare);
  EXPECT_EQ(sc.mpc.terminal_gain, TerminalGain::lqr);
  EXPECT_DOUBLE_EQ(sc.mpc.y_min.y(), -10.0);
  EXPECT_TRUE(std::isinf(sc.mpc.y_max.x()));
  EXPECT_EQ(sc.mode, FormationMode::virtual_structure);
  EXPECT_EQ(sc.control_mode, ControlMode::decentralized);
  EXPECT_EQ(sc.seed, 42u);
  ASSERT_EQ(sc.obstacles.size(), 1u);
  EXPECT_DOUBLE_EQ(sc.obstacles[0].effective_radius(), 1.5);
  EXPECT_DOUBLE_EQ(sc.effective_activation_distance(), 7.5);
  EXPECT_EQ(sc.step_count(), 50);
  EXPECT_NEAR(sc.initial_states[0].heading, std::numbers::pi / 2, 1e-15);

  const MpcConfig c = vehicle_mpc_config(sc);
  EXPECT_EQ(c.u_max, Eigen::Vector3d::Constant(2.0));
  EXPECT_EQ(c.u_min, Eigen::Vector3d::Constant(-2.0));
  EXPECT_DOUBLE_EQ(c.Q(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(c.Q(3, 3), 0.25);
  // Riccati terminal weight dominates the stage weight.
  EXPECT_GT(c.P(0, 0), c.Q(0, 0));
  EXPECT_FALSE(c.K.isZero());
}

TEST(Scenario, StrictKeysAndSections) {
  std::string text = kMinimal;
  EXPECT_EQ(error_key(text + "[mpc]\nnp = 10\nfoo = 1\n"), "mpc.foo");
  EXPECT_EQ(error_key(text + "[extra]\n"), "extra");
  EXPECT_EQ(error_key(text + "[sim]\ndt = \"fast\"\n"), "sim.dt");
}

TEST(Scenario, InvariantBreachesNameTheKey) {
  std::string text = kMinimal;
  EXPECT_EQ(error_key(text + "[mpc]\nnp = 5\nnu = 8\n"), "mpc.nu");
  EXPECT_EQ(error_key(text + "[mpc]\nr = 0\n"), "mpc.R");
  EXPECT_EQ(error_key(text + "[sim]\nduration = -1\n"), "sim.duration");
  EXPECT_EQ(error_key(text + "[formation]\nd_min = 9\n"), "formation.slots");
  EXPECT_EQ(error_key(text + "[[obstacles]]\ncenter = [1, 1]\nradius = -2\n"),
            "obstacles[0].radius");
  EXPECT_EQ(error_key(R"(
[vehicles]
initial_positions = [[0, 0, 0], [1, 0, 0], [-5, -5, 0]]
[path]
waypoints = [{ t = 0, position = [0, 0, 0] }]
)"),
            "vehicles.initial_positions");
  EXPECT_EQ(error_key("[vehicles]\ncount = 1\ninitial_positions = [[0, 0, 0]]\n"
                      "[formation]\nslots = [[0, 0, 0]]\n"),
            "path");
}

TEST(Scenario, MessageNamesKey) {
  try {
    parse_scenario(std::string(kMinimal) + "[mpc]\nnp = 5\nnu = 8\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("nu"), std::string::npos);
  }
}

TEST(Scenario, LoadMissingFile) {
  EXPECT_THROW(load_scenario("/nonexistent/scenario.toml"), ConfigError);
}

TEST(ControlMode, StringRoundTrip) {
  EXPECT_EQ(control_mode_from_string("centralized"), ControlMode::centralized);
  EXPECT_EQ(control_mode_from_string(to_string(ControlMode::decentralized)),
            ControlMode::decentralized);
  EXPECT_THROW(control_mode_from_string("hierarchical"), ConfigError);
}

}  // namespace
}  // namespace formpc

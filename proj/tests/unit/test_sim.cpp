#include <numbers>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "safedrive/episode.hpp"
#include "safedrive/metrics.hpp"
#include "safedrive/scenario.hpp"
#include "safedrive/trace.hpp"
#include "safedrive/world.hpp"

namespace {

using safedrive::Pose2;
using safedrive::Vec2;
using safedrive::WaypointPath;
using safedrive::ctrl::VehicleCommand;
using safedrive::sim::AgentSpec;
using safedrive::sim::EgoKin;
using safedrive::sim::EgoLimits;
using safedrive::sim::EpisodeConfig;
using safedrive::sim::EpisodeJob;
using safedrive::sim::EpisodeResult;
using safedrive::sim::GroundTruth;
using safedrive::sim::InfractionDetector;
using safedrive::sim::InfractionEvent;
using safedrive::sim::InfractionType;
using safedrive::sim::Interval;
using safedrive::sim::Metrics;
using safedrive::sim::PenaltyConfig;
using safedrive::sim::Scenario;
using safedrive::sim::ScenarioError;
using safedrive::sim::World;

WaypointPath route_of(std::initializer_list<Vec2> pts) {
  WaypointPath p;
  p.points.assign(pts);
  return p;
}

Scenario blank_scenario(double duration, double route_length) {
  Scenario sc;
  sc.name = "inline";
  sc.duration = duration;
  sc.route = route_of({Vec2{0.0, 0.0}, Vec2{0.0, route_length}});
  sc.ego_start = Pose2{0.0, 0.0, 0.0};
  return sc;
}

void advance(World& world, InfractionDetector* det, double until, double dt = 0.05) {
  while (world.time() < until - 1e-9) {
    world.step(dt);
    if (det != nullptr) det->step(world, dt);
  }
}

int count_type(const std::vector<InfractionEvent>& events, InfractionType type) {
  int n = 0;
  for (const auto& ev : events) {
    if (ev.type == type) ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("step_ego: rest with no command is a fixed point") {
  const EgoLimits limits;
  EgoKin state;
  const EgoKin next = safedrive::sim::step_ego(state, VehicleCommand{}, 0.05, limits);
  CHECK(next.pose.x == doctest::Approx(0.0));
  CHECK(next.pose.y == doctest::Approx(0.0));
  CHECK(next.pose.heading == doctest::Approx(0.0));
  CHECK(next.speed == doctest::Approx(0.0));
}

TEST_CASE("step_ego: full throttle from rest gains speed but not position") {
  const EgoLimits limits;  // a_acc_max = 3
  EgoKin state;
  VehicleCommand cmd;
  cmd.throttle = 1.0;
  const EgoKin next = safedrive::sim::step_ego(state, cmd, 0.05, limits);
  CHECK(next.speed == doctest::Approx(0.15).epsilon(1e-12));
  // Derivatives are taken at the old state: no displacement on the first step.
  CHECK(next.pose.y == doctest::Approx(0.0));
}

TEST_CASE("step_ego: braking clamps speed at zero") {
  const EgoLimits limits;  // a_brk_max = 6
  EgoKin state;
  state.speed = 0.2;
  VehicleCommand cmd;
  cmd.brake = 1.0;
  const EgoKin next = safedrive::sim::step_ego(state, cmd, 0.05, limits);
  CHECK(next.speed == doctest::Approx(0.0));  // 0.2 - 0.3 floors at 0
}

TEST_CASE("step_ego: the physical speed cap binds") {
  EgoLimits limits;
  limits.v_phys_max = 10.0;
  EgoKin state;
  state.speed = 10.0;
  VehicleCommand cmd;
  cmd.throttle = 1.0;
  const EgoKin next = safedrive::sim::step_ego(state, cmd, 0.05, limits);
  CHECK(next.speed == doctest::Approx(10.0));
}

TEST_CASE("step_ego: straight driving stays on the line") {
  const EgoLimits limits;
  EgoKin state;
  state.speed = 5.0;
  for (int k = 0; k < 200; ++k) {
    state = safedrive::sim::step_ego(state, VehicleCommand{}, 0.05, limits);
  }
  CHECK(std::abs(state.pose.x) < 1e-9);
  CHECK(state.pose.y == doctest::Approx(50.0).epsilon(1e-9));
  CHECK(state.speed == doctest::Approx(5.0));
}

TEST_CASE("step_ego: constant steer traces the bicycle-model circle") {
  const EgoLimits limits;  // wheelbase 2.9, delta_max 0.6
  EgoKin state;
  state.speed = 2.0;
  VehicleCommand cmd;
  cmd.steer = 0.5;  // steering angle 0.3 rad
  const double radius = limits.wheelbase / std::tan(0.5 * limits.delta_max);
  double arc = 0.0;
  for (int k = 0; k < 100; ++k) {
    arc += state.speed * 0.05;
    state = safedrive::sim::step_ego(state, cmd, 0.05, limits);
  }
  const double theta = arc / radius;  // swept angle
  CHECK(state.pose.heading == doctest::Approx(theta).epsilon(1e-9));
  // Chord length of the swept arc, within the Euler discretization error.
  const double chord = std::hypot(state.pose.x, state.pose.y);
  CHECK(chord == doctest::Approx(2.0 * radius * std::sin(theta / 2.0)).epsilon(0.02));
  // Positive steer turns right (clockwise): x grows positive.
  CHECK(state.pose.x > 0.0);
}

TEST_CASE("step_ego: displacement per step never exceeds the speed cap") {
  const EgoLimits limits;
  EgoKin state;
  state.speed = limits.v_phys_max;
  VehicleCommand cmd;
  cmd.throttle = 1.0;
  cmd.steer = 1.0;
  for (int k = 0; k < 50; ++k) {
    const EgoKin next = safedrive::sim::step_ego(state, cmd, 0.05, limits);
    const double moved = std::hypot(next.pose.x - state.pose.x, next.pose.y - state.pose.y);
    CHECK(moved <= limits.v_phys_max * 0.05 + 1e-12);
    state = next;
  }
}

TEST_CASE("step_ego: non-positive dt throws") {
  CHECK_THROWS_AS(safedrive::sim::step_ego(EgoKin{}, VehicleCommand{}, 0.0, EgoLimits{}),
                  std::invalid_argument);
}

TEST_CASE("nearest_arclength: projection onto an L-shaped route") {
  const WaypointPath path = route_of({Vec2{0.0, 0.0}, Vec2{0.0, 10.0}, Vec2{10.0, 10.0}});
  CHECK(safedrive::sim::nearest_arclength(path, Vec2{-1.0, 5.0}) == doctest::Approx(5.0));
  CHECK(safedrive::sim::nearest_arclength(path, Vec2{3.0, 12.0}) == doctest::Approx(13.0));
  CHECK(safedrive::sim::nearest_arclength(path, Vec2{-5.0, -5.0}) == doctest::Approx(0.0));
  CHECK(safedrive::sim::nearest_arclength(path, Vec2{20.0, 20.0}) == doctest::Approx(20.0));
  WaypointPath one;
  one.points = {Vec2{0.0, 0.0}};
  CHECK_THROWS_AS(safedrive::sim::nearest_arclength(one, Vec2{0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("scenario: full document parses with agents, triggers, and rules") {
  const std::string text = R"({
    "scenario_version": 1,
    "name": "lead_brake",
    "duration": 30.0,
    "seed": 42,
    "route": [[0, 0], [0, 50], [10, 50]],
    "ego": {"x": 0, "y": 0, "heading": 0, "speed": 1.5},
    "agents": [
      {
        "class": "vehicle", "x": 0, "y": 20, "heading": 0, "speed": 5,
        "box": [2.0, 0.9],
        "triggers": [
          {"when": {"time": 4.0}, "do": {"accel": -3.0}},
          {"when": {"ego_distance": 8.0}, "do": {"stop": true}}
        ]
      },
      {"class": "pedestrian", "x": 5, "y": 30}
    ],
    "traffic_rules": {
      "red_lights": [{"from": 5, "to": 13}],
      "junctions": [{"from": 0, "to": 2}],
      "stop_line_s": 25.0
    }
  })";
  const Scenario sc = safedrive::sim::parse_scenario(text, "fallback");
  CHECK(sc.name == "lead_brake");
  CHECK(sc.duration == doctest::Approx(30.0));
  CHECK(sc.seed == 42);
  REQUIRE(sc.route.points.size() == 3);
  CHECK(sc.route.points[2].x == doctest::Approx(10.0));
  CHECK(sc.ego_speed == doctest::Approx(1.5));
  REQUIRE(sc.agents.size() == 2);
  CHECK(sc.agents[0].cls == safedrive::grid::ObjectClass::kVehicle);
  CHECK(sc.agents[0].box.half_length == doctest::Approx(2.0));
  CHECK(sc.agents[0].box.half_width == doctest::Approx(0.9));
  REQUIRE(sc.agents[0].triggers.size() == 2);
  CHECK(sc.agents[0].triggers[0].kind == safedrive::sim::Trigger::Kind::kTime);
  CHECK(sc.agents[0].triggers[0].value == doctest::Approx(4.0));
  REQUIRE(sc.agents[0].triggers[0].action.accel.has_value());
  CHECK(*sc.agents[0].triggers[0].action.accel == doctest::Approx(-3.0));
  CHECK(sc.agents[0].triggers[1].kind == safedrive::sim::Trigger::Kind::kEgoDistance);
  CHECK(sc.agents[0].triggers[1].action.stop);
  CHECK(sc.agents[1].cls == safedrive::grid::ObjectClass::kPedestrian);
  CHECK(sc.agents[1].box.half_length == doctest::Approx(2.3));  // default box
  REQUIRE(sc.rules.red_lights.size() == 1);
  CHECK(sc.rules.red_lights[0].from == doctest::Approx(5.0));
  CHECK(sc.rules.stop_line_s == doctest::Approx(25.0));
  CHECK(sc.rules.has_stop_line());

  // Name falls back to the caller-provided stem when absent.
  const Scenario unnamed = safedrive::sim::parse_scenario(
      R"({"scenario_version": 1, "duration": 10, "route": [[0,0],[0,10]], "ego": {"x":0,"y":0}})",
      "from_file");
  CHECK(unnamed.name == "from_file");
  CHECK_FALSE(unnamed.rules.has_stop_line());
}

TEST_CASE("scenario: schema violations carry line numbers") {
  const std::string bad_version = R"({
  "scenario_version": 2,
  "duration": 10,
  "route": [[0,0],[0,10]],
  "ego": {"x": 0, "y": 0}
})";
  try {
    safedrive::sim::parse_scenario(bad_version, "x");
    FAIL("expected ScenarioError");
  } catch (const ScenarioError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("scenario_version") != std::string::npos);
  }

  const std::string bad_duration = R"({
  "scenario_version": 1,
  "duration": -5,
  "route": [[0,0],[0,10]],
  "ego": {"x": 0, "y": 0}
})";
  try {
    safedrive::sim::parse_scenario(bad_duration, "x");
    FAIL("expected ScenarioError");
  } catch (const ScenarioError& e) {
    CHECK(e.line() == 3);
  }

  CHECK_THROWS_AS(safedrive::sim::parse_scenario("{ not json", "x"), ScenarioError);
  CHECK_THROWS_AS(safedrive::sim::parse_scenario(
                      R"({"scenario_version": 1, "duration": 10, "route": [[0,0]],
                          "ego": {"x":0,"y":0}})",
                      "x"),
                  ScenarioError);
  CHECK_THROWS_AS(safedrive::sim::parse_scenario(
                      R"({"scenario_version": 1, "duration": 10, "route": [[0,0],[0,10]],
                          "ego": {"x":0,"y":0},
                          "agents": [{"class": "dragon", "x": 0, "y": 5}]})",
                      "x"),
                  ScenarioError);
  // A trigger that changes nothing is rejected.
  CHECK_THROWS_AS(safedrive::sim::parse_scenario(
                      R"({"scenario_version": 1, "duration": 10, "route": [[0,0],[0,10]],
                          "ego": {"x":0,"y":0},
                          "agents": [{"class": "vehicle", "x": 0, "y": 5,
                                      "triggers": [{"when": {"time": 1}, "do": {}}]}]})",
                      "x"),
                  ScenarioError);
}

TEST_CASE("traffic script: rule state follows the half-open intervals") {
  safedrive::sim::TrafficScript script;
  script.red_lights = {Interval{5.0, 10.0}};
  script.stop_signs = {Interval{1.0, 2.0}};
  script.junctions = {Interval{0.0, 4.0}};
  CHECK(script.state_at(4.9).light_green == doctest::Approx(1.0));
  CHECK(script.state_at(5.0).light_green == doctest::Approx(0.0));
  CHECK(script.state_at(9.99).light_green == doctest::Approx(0.0));
  CHECK(script.state_at(10.0).light_green == doctest::Approx(1.0));
  CHECK(script.state_at(1.5).stop_sign == doctest::Approx(1.0));
  CHECK(script.state_at(2.0).stop_sign == doctest::Approx(0.0));
  CHECK(script.state_at(3.0).at_junction == doctest::Approx(1.0));
  CHECK(script.state_at(4.5).at_junction == doctest::Approx(0.0));
}

TEST_CASE("world: a timed brake trigger decelerates the agent to a stop") {
  Scenario sc = blank_scenario(30.0, 100.0);
  AgentSpec lead;
  lead.pose = Pose2{0.0, 20.0, 0.0};
  lead.speed = 8.0;
  safedrive::sim::Trigger trig;
  trig.kind = safedrive::sim::Trigger::Kind::kTime;
  trig.value = 2.0;
  trig.action.accel = -4.0;
  lead.triggers.push_back(trig);
  sc.agents.push_back(lead);

  World world(sc);
  advance(world, nullptr, 1.0);
  CHECK(world.agents()[0].speed == doctest::Approx(8.0));  // trigger not yet due
  CHECK(world.agents()[0].triggers.size() == 1);
  advance(world, nullptr, 2.5);
  CHECK(world.agents()[0].speed == doctest::Approx(6.0));  // 0.5 s of -4 m/s^2
  CHECK(world.agents()[0].triggers.empty());               // one-shot, disarmed
  advance(world, nullptr, 5.0);
  CHECK(world.agents()[0].speed == doctest::Approx(0.0));  // clamped, never negative
}

TEST_CASE("world: an ego-distance trigger fires when the gap closes") {
  Scenario sc = blank_scenario(30.0, 100.0);
  sc.ego_speed = 5.0;
  AgentSpec crosser;
  crosser.pose = Pose2{0.0, 30.0, 0.0};
  safedrive::sim::Trigger trig;
  trig.kind = safedrive::sim::Trigger::Kind::kEgoDistance;
  trig.value = 20.0;
  trig.action.speed = 3.0;
  crosser.triggers.push_back(trig);
  sc.agents.push_back(crosser);

  World world(sc);
  advance(world, nullptr, 1.9);
  CHECK(world.agents()[0].speed == doctest::Approx(0.0));
  advance(world, nullptr, 2.1);
  CHECK(world.agents()[0].speed == doctest::Approx(3.0));
}

TEST_CASE("world: ground truth converts agents into the ego frame") {
  Scenario sc = blank_scenario(30.0, 100.0);
  AgentSpec ahead;
  ahead.pose = Pose2{0.0, 5.0, 0.0};
  ahead.speed = 1.25;
  sc.agents.push_back(ahead);
  AgentSpec behind;
  behind.pose = Pose2{0.0, -3.0, 0.0};
  sc.agents.push_back(behind);
  AgentSpec far;
  far.pose = Pose2{0.0, 55.0, 0.0};
  sc.agents.push_back(far);
  AgentSpec left_edge;
  left_edge.pose = Pose2{-10.0, 4.0, 0.0};
  sc.agents.push_back(left_edge);
  AgentSpec right_edge;
  right_edge.pose = Pose2{10.0, 4.0, 0.0};
  sc.agents.push_back(right_edge);

  World world(sc);
  const GroundTruth gt = world.extract_ground_truth(20, 2.0, 10);
  // In coverage: the agent ahead and the left-edge agent (half-open x bound).
  REQUIRE(gt.objects.size() == 2);
  CHECK(gt.objects[0].position.x == doctest::Approx(0.0));
  CHECK(gt.objects[0].position.y == doctest::Approx(5.0));
  CHECK(gt.objects[0].speed == doctest::Approx(1.25));
  CHECK(gt.objects[1].position.x == doctest::Approx(-10.0));

  REQUIRE(gt.waypoint_deltas.size() == 10);
  for (const Vec2& d : gt.waypoint_deltas) {
    CHECK(d.x == doctest::Approx(0.0));
    CHECK(d.y == doctest::Approx(2.0));
  }
}

TEST_CASE("world: the waypoint lookahead extends past the route end") {
  Scenario sc = blank_scenario(30.0, 100.0);
  sc.ego_start = Pose2{0.0, 95.0, 0.0};
  World world(sc);
  const GroundTruth gt = world.extract_ground_truth(20, 2.0, 10);
  REQUIRE(gt.waypoint_deltas.size() == 10);
  // Full spacing throughout: the final segment's tangent continues beyond the
  // terminal route point so the lookahead never collapses at the finish line.
  for (const Vec2& d : gt.waypoint_deltas) {
    CHECK(d.x == doctest::Approx(0.0));
    CHECK(d.y == doctest::Approx(2.0));
  }
}

TEST_CASE("world: heading is expressed relative to the ego") {
  Scenario sc = blank_scenario(30.0, 100.0);
  sc.ego_start = Pose2{3.0, 4.0, std::numbers::pi / 2.0};  // facing east
  AgentSpec a;
  a.pose = Pose2{8.0, 4.0, std::numbers::pi};  // 5 m east of the ego, facing south
  sc.agents.push_back(a);
  World world(sc);
  const GroundTruth gt = world.extract_ground_truth(20, 2.0, 10);
  REQUIRE(gt.objects.size() == 1);
  CHECK(gt.objects[0].position.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(gt.objects[0].position.y == doctest::Approx(5.0));
  CHECK(gt.objects[0].heading == doctest::Approx(std::numbers::pi / 2.0));
}

TEST_CASE("detector: one event per contact episode, re-armed after separation") {
  Scenario sc = blank_scenario(20.0, 100.0);
  AgentSpec through;
  through.pose = Pose2{0.0, 10.0, std::numbers::pi};  // driving south through the ego
  through.speed = 5.0;
  safedrive::sim::Trigger turn;  // come back north for a second pass
  turn.kind = safedrive::sim::Trigger::Kind::kTime;
  turn.value = 8.0;
  turn.action.heading = 0.0;
  through.triggers.push_back(turn);
  sc.agents.push_back(through);

  World world(sc);
  InfractionDetector det(world, 1e9);  // blocked detection out of the way
  advance(world, &det, 5.0);
  CHECK(det.events().size() == 1);
  CHECK(det.events()[0].type == InfractionType::kCollisionVehicle);
  CHECK(det.events()[0].agent_index == 0);
  advance(world, &det, 16.0);
  CHECK(det.events().size() == 2);
  CHECK(det.events()[1].time > 8.0);
}

TEST_CASE("detector: collision buckets follow the agent class") {
  for (const auto& [cls, want] :
       {std::pair{safedrive::grid::ObjectClass::kPedestrian,
                  InfractionType::kCollisionPedestrian},
        std::pair{safedrive::grid::ObjectClass::kStatic, InfractionType::kCollisionStatic},
        std::pair{safedrive::grid::ObjectClass::kBicycle, InfractionType::kCollisionVehicle}}) {
    Scenario sc = blank_scenario(10.0, 100.0);
    sc.ego_speed = 5.0;
    AgentSpec obstacle;
    obstacle.cls = cls;
    obstacle.pose = Pose2{0.0, 15.0, 0.0};
    obstacle.box = safedrive::BoxExtents{0.5, 0.5};
    sc.agents.push_back(obstacle);
    World world(sc);
    InfractionDetector det(world, 1e9);
    advance(world, &det, 5.0);
    REQUIRE(det.events().size() == 1);
    CHECK(det.events()[0].type == want);
  }
}

TEST_CASE("detector: red-light crossing fires once at the stop line") {
  Scenario sc = blank_scenario(10.0, 100.0);
  sc.ego_speed = 5.0;
  sc.rules.stop_line_s = 10.0;
  sc.rules.red_lights = {Interval{0.0, 1000.0}};
  World world(sc);
  InfractionDetector det(world, 1e9);
  advance(world, &det, 6.0);
  REQUIRE(det.events().size() == 1);
  CHECK(det.events()[0].type == InfractionType::kRedLight);
  CHECK(det.events()[0].time == doctest::Approx(2.0).epsilon(0.02));

  // Crossing on green is clean.
  Scenario green = blank_scenario(10.0, 100.0);
  green.ego_speed = 5.0;
  green.rules.stop_line_s = 10.0;
  green.rules.red_lights = {Interval{0.0, 1.0}};  // red is over by the crossing
  World world2(green);
  InfractionDetector det2(world2, 1e9);
  advance(world2, &det2, 6.0);
  CHECK(det2.events().empty());
}

TEST_CASE("detector: blocked fires after the window and re-arms on motion") {
  Scenario sc = blank_scenario(60.0, 100.0);
  World world(sc);
  InfractionDetector det(world, 0.5);
  advance(world, &det, 1.0);
  CHECK(count_type(det.events(), InfractionType::kAgentBlocked) == 1);
  advance(world, &det, 3.0);  // still stopped: no repeat
  CHECK(count_type(det.events(), InfractionType::kAgentBlocked) == 1);

  VehicleCommand go;
  go.throttle = 1.0;
  world.apply_command(go);
  advance(world, &det, 4.0);  // moving again re-arms the detector
  VehicleCommand stop;
  stop.brake = 1.0;
  world.apply_command(stop);
  advance(world, &det, 6.0);
  CHECK(count_type(det.events(), InfractionType::kAgentBlocked) == 2);
}

TEST_CASE("metrics: clean episode keeps the full score") {
  const PenaltyConfig penalties;
  const Metrics m = safedrive::sim::compute_metrics({}, 80.0, 100.0, 80.0, 20.0, penalties);
  CHECK(m.route_completion == doctest::Approx(80.0));
  CHECK(m.infraction_score == doctest::Approx(1.0));
  CHECK(m.driving_score == doctest::Approx(80.0));
  for (double rate : m.per_km) CHECK(rate == doctest::Approx(0.0));
}

TEST_CASE("metrics: the driving score is exactly completion times infractions") {
  const PenaltyConfig penalties;
  // Half the route with one vehicle collision: 50 * 0.6 must be exactly 30.
  std::vector<InfractionEvent> events = {
      InfractionEvent{InfractionType::kCollisionVehicle, 3.0, 0}};
  const Metrics m = safedrive::sim::compute_metrics(events, 50.0, 100.0, 500.0, 20.0, penalties);
  CHECK(m.route_completion == 50.0);
  CHECK(m.infraction_score == 0.6);
  CHECK(m.driving_score == 30.0);  // bit-exact product
  CHECK(m.counts[static_cast<int>(InfractionType::kCollisionVehicle)] == 1);
  CHECK(m.per_km[static_cast<int>(InfractionType::kCollisionVehicle)] == doctest::Approx(2.0));
}

TEST_CASE("metrics: penalties multiply across event types") {
  const PenaltyConfig penalties;
  std::vector<InfractionEvent> events = {
      InfractionEvent{InfractionType::kCollisionPedestrian, 1.0, 0},
      InfractionEvent{InfractionType::kCollisionVehicle, 2.0, 1},
      InfractionEvent{InfractionType::kRedLight, 3.0, -1},
      InfractionEvent{InfractionType::kCollisionVehicle, 4.0, 1},
  };
  const Metrics m = safedrive::sim::compute_metrics(events, 100.0, 100.0, 1000.0, 30.0, penalties);
  CHECK(m.infraction_score == doctest::Approx(0.5 * 0.6 * 0.6 * 0.7).epsilon(1e-12));
  CHECK(m.counts[static_cast<int>(InfractionType::kCollisionVehicle)] == 2);
  CHECK(m.per_km[static_cast<int>(InfractionType::kCollisionVehicle)] == doctest::Approx(2.0));
  CHECK(m.duration_s == doctest::Approx(30.0));

  // Progress can overshoot the nominal length; completion clamps at 100.
  const Metrics over = safedrive::sim::compute_metrics({}, 120.0, 100.0, 120.0, 30.0, penalties);
  CHECK(over.route_completion == doctest::Approx(100.0));

  CHECK_THROWS_AS(safedrive::sim::compute_metrics({}, 0.0, 0.0, 0.0, 0.0, penalties),
                  std::invalid_argument);
}

TEST_CASE("trace: jsonl round trip and corruption reporting") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "safedrive_trace_test";
  fs::create_directories(dir);
  const fs::path file = dir / "roundtrip.jsonl";

  std::vector<safedrive::sim::ojson> lines;
  lines.push_back({{"t", 0.5}, {"cmd", {{"steer", 0.0}}}});
  lines.push_back({{"final", {{"status", "completed"}}}});
  safedrive::sim::write_jsonl(file, lines);
  const auto back = safedrive::sim::read_jsonl(file);
  REQUIRE(back.size() == 2);
  CHECK(back[0]["t"] == 0.5);
  CHECK(safedrive::sim::final_of(back)["status"] == "completed");

  // A trace with no final record is rejected.
  CHECK_THROWS_AS(safedrive::sim::final_of({back[0]}), std::runtime_error);

  const fs::path corrupt = dir / "corrupt.jsonl";
  std::ofstream out(corrupt);
  out << R"({"t": 0.5})" << "\n" << "{broken\n";
  out.close();
  try {
    safedrive::sim::read_jsonl(corrupt);
    FAIL("expected a parse failure");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);  // line index named
  }
  fs::remove_all(dir);
}

TEST_CASE("episode: a free road completes and the trace carries the outcome") {
  Scenario sc = blank_scenario(30.0, 60.0);
  EpisodeConfig config;
  const EpisodeResult result = safedrive::sim::run_episode(sc, 1, config);
  CHECK(result.status == "completed");
  CHECK(result.metrics.route_completion > 99.0);
  CHECK(result.metrics.infraction_score == doctest::Approx(1.0));
  REQUIRE(result.lines.size() >= 2);

  const auto final = safedrive::sim::final_of(result.lines);
  CHECK(final["status"] == "completed");
  CHECK(final["scenario"] == "inline");
  CHECK(final["seed"] == 1);
  CHECK(final["variant"] == "full");
  const double rc = final["route_completion"].get<double>();
  const double is = final["infraction_score"].get<double>();
  CHECK(final["driving_score"].get<double>() == rc * is);

  // Tick records carry the command and the plan diagnostics.
  const auto& first = result.lines.front();
  CHECK(first.contains("t"));
  CHECK(first.contains("cmd"));
  CHECK(first.contains("diag"));
  CHECK(first["t"] == 0.0);
}

TEST_CASE("episode: reruns are byte-identical, with and without noise") {
  Scenario sc = blank_scenario(20.0, 80.0);
  AgentSpec parked;
  parked.pose = Pose2{0.0, 30.0, 0.0};
  sc.agents.push_back(parked);

  EpisodeConfig config;
  const EpisodeResult a = safedrive::sim::run_episode(sc, 7, config);
  const EpisodeResult b = safedrive::sim::run_episode(sc, 7, config);
  REQUIRE(a.lines.size() == b.lines.size());
  for (std::size_t i = 0; i < a.lines.size(); ++i) {
    CHECK(a.lines[i].dump() == b.lines[i].dump());
  }

  EpisodeConfig noisy = config;
  noisy.noise.position_sigma = 0.05;
  noisy.noise.dropout_prob = 0.1;
  noisy.noise.false_positive_rate = 0.05;
  const EpisodeResult na = safedrive::sim::run_episode(sc, 7, noisy);
  const EpisodeResult nb = safedrive::sim::run_episode(sc, 7, noisy);
  REQUIRE(na.lines.size() == nb.lines.size());
  for (std::size_t i = 0; i < na.lines.size(); ++i) {
    CHECK(na.lines[i].dump() == nb.lines[i].dump());
  }

  // A different seed rolls different noise.
  const EpisodeResult nc = safedrive::sim::run_episode(sc, 8, noisy);
  bool any_difference = nc.lines.size() != na.lines.size();
  for (std::size_t i = 0; !any_difference && i < na.lines.size(); ++i) {
    any_difference = na.lines[i].dump() != nc.lines[i].dump();
  }
  CHECK(any_difference);
}

TEST_CASE("episode: the no-safety variant ignores the obstacle the full stack brakes for") {
  Scenario sc = blank_scenario(20.0, 80.0);
  AgentSpec parked;
  parked.pose = Pose2{0.0, 30.0, 0.0};
  sc.agents.push_back(parked);

  EpisodeConfig full;
  const EpisodeResult safe = safedrive::sim::run_episode(sc, 1, full);
  CHECK(safe.metrics.counts[static_cast<int>(InfractionType::kCollisionVehicle)] == 0);

  EpisodeConfig reckless;
  reckless.variant = safedrive::sim::kVariantNoSafety;
  const EpisodeResult crash = safedrive::sim::run_episode(sc, 1, reckless);
  CHECK(crash.metrics.counts[static_cast<int>(InfractionType::kCollisionVehicle)] >= 1);
  CHECK(crash.metrics.infraction_score < safe.metrics.infraction_score);
}

TEST_CASE("episode: unknown variant or mismatched tick period throws") {
  Scenario sc = blank_scenario(5.0, 50.0);
  EpisodeConfig bad_variant;
  bad_variant.variant = "half_safe";
  CHECK_THROWS_AS(safedrive::sim::run_episode(sc, 1, bad_variant), std::invalid_argument);

  EpisodeConfig bad_dt;
  bad_dt.physics_dt = 0.3;  // tick period 0.5 is not a multiple
  CHECK_THROWS_AS(safedrive::sim::run_episode(sc, 1, bad_dt), std::invalid_argument);
}

TEST_CASE("episode: parallel batches reproduce the serial traces in job order") {
  Scenario a = blank_scenario(15.0, 60.0);
  a.name = "a";
  Scenario b = blank_scenario(15.0, 60.0);
  b.name = "b";
  AgentSpec parked;
  parked.pose = Pose2{1.0, 25.0, 0.0};
  b.agents.push_back(parked);

  EpisodeConfig config;
  config.noise.position_sigma = 0.03;
  config.noise.dropout_prob = 0.05;
  config.noise.false_positive_rate = 0.02;

  std::vector<EpisodeJob> jobs;
  for (const Scenario& sc : {a, b}) {
    for (std::uint64_t seed : {1ULL, 2ULL}) {
      jobs.push_back(EpisodeJob{sc, seed, config});
    }
  }
  const auto parallel = safedrive::sim::run_episodes(jobs, 4);
  REQUIRE(parallel.size() == jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const EpisodeResult serial = safedrive::sim::run_episode(jobs[i].scenario, jobs[i].seed,
                                                             jobs[i].config);
    REQUIRE(parallel[i].lines.size() == serial.lines.size());
    for (std::size_t k = 0; k < serial.lines.size(); ++k) {
      CHECK(parallel[i].lines[k].dump() == serial.lines[k].dump());
    }
  }
}

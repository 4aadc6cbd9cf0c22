#pragma once

#include <vector>

#include "safedrive/controller.hpp"
#include "safedrive/density_map.hpp"
#include "safedrive/geometry.hpp"
#include "safedrive/scenario.hpp"
#include "safedrive/traffic.hpp"

namespace safedrive::sim {

struct EgoLimits {
  double wheelbase = 2.9;    // m
  double a_acc_max = 3.0;    // m/s^2 at full throttle
  double a_brk_max = 6.0;    // m/s^2 at full brake
  double delta_max = 0.6;    // rad, steering angle at |steer| = 1
  double v_phys_max = 30.0;  // m/s, hard physical cap
  double drag = 0.0;         // 1/s, speed-proportional decay
  BoxExtents box{2.3, 0.95};
};

struct EgoKin {
  Pose2 pose;
  double speed = 0.0;  // m/s, non-negative
};

// Kinematic bicycle, forward Euler with derivatives at the old state:
//   a = throttle * a_acc_max - brake * a_brk_max - drag * speed
//   speed'   = clamp(speed + a dt, 0, v_phys_max)
//   heading' = heading + (speed / wheelbase) tan(steer * delta_max) dt
//   position advances along the old heading at the old speed.
EgoKin step_ego(const EgoKin& state, const ctrl::VehicleCommand& cmd, double dt,
                const EgoLimits& limits);

struct AgentState {
  grid::ObjectClass cls = grid::ObjectClass::kVehicle;
  Pose2 pose;
  double speed = 0.0;
  double accel = 0.0;
  BoxExtents box;
  std::vector<Trigger> triggers;  // disarmed entries removed as they fire

  OrientedBox footprint() const {
    return OrientedBox{Vec2{pose.x, pose.y}, box.half_length, box.half_width, pose.heading};
  }
};

// What the perception stub hands the controller each tick.
struct GroundTruth {
  std::vector<grid::DetectedObject> objects;  // ego frame, inside map coverage
  std::vector<Vec2> waypoint_deltas;          // ego frame, per-step displacements
  TrafficState traffic;
};

// One scenario instance advanced step by step; fully deterministic.
class World {
 public:
  explicit World(Scenario scenario, EgoLimits limits = {});

  // Held until the next call (controller ticks are sparser than physics).
  void apply_command(const ctrl::VehicleCommand& cmd) { command_ = cmd; }

  // One physics step: agent triggers and motion, ego kinematics, time.
  void step(double dt);

  double time() const { return time_; }
  const EgoKin& ego() const { return ego_; }
  const ctrl::VehicleCommand& command() const { return command_; }
  const std::vector<AgentState>& agents() const { return agents_; }
  const Scenario& scenario() const { return scenario_; }
  const EgoLimits& limits() const { return limits_; }

  TrafficState rule_state() const { return scenario_.rules.state_at(time_); }

  // Monotone arclength of the nearest route point to the ego so far.
  double route_progress() const { return progress_; }
  double route_length() const { return route_length_; }
  // Total distance the ego has driven (odometer, not route projection).
  double odometer() const { return odometer_; }

  // Objects inside the grid coverage, the resampled route lookahead (extended
  // past the route end along the final tangent) and the current rule state.
  GroundTruth extract_ground_truth(int coverage_r, double waypoint_spacing,
                                   int waypoint_count) const;

 private:
  Scenario scenario_;
  EgoLimits limits_;
  EgoKin ego_;
  ctrl::VehicleCommand command_;
  std::vector<AgentState> agents_;
  double time_ = 0.0;
  double progress_ = 0.0;
  double route_length_ = 0.0;
  double odometer_ = 0.0;
};

// Arclength along the polyline of the point nearest to p.
double nearest_arclength(const WaypointPath& path, const Vec2& p);

}  // namespace safedrive::sim

#pragma once

#include <vector>

#include "safedrive/density_map.hpp"
#include "safedrive/geometry.hpp"
#include "safedrive/tracking.hpp"
#include "safedrive/traffic.hpp"

namespace safedrive::ctrl {

struct SafetyParams {
  double tick_period = 0.5;      // T, s
  double a_max = 1.0;            // acceleration bound of the speed plan
  double v_max = 6.5;            // m/s
  double s_bar = 2.0;            // m, extra-safety distance margin
  double ped_bike_scale = 2.0;   // box scale for pedestrians and bicycles
  double safety_factor = 1.0;    // scales s_bar up and v_max down
  double collision_sample_step = 0.1;           // m, sweep sampling step
  std::vector<double> forecast_horizons = {0.5, 1.0};  // s

  double effective_v_max() const { return v_max / safety_factor; }
  double effective_margin() const { return s_bar * safety_factor; }
};

enum class BindingConstraint { kS1, kS2, kAccel, kVMax, kNone };

const char* to_string(BindingConstraint b);

struct SpeedPlan {
  double v_d1 = 0.0;  // m/s, desired speed for the first step
  double v_d2 = 0.0;  // m/s, desired speed for the second step
  bool feasible = false;
  BindingConstraint binding = BindingConstraint::kNone;
};

// Two-step speed plan: maximize v_d1 subject to
//   (v0 + v_d1) T <= s1
//   (v0 + v_d1) T + (v_d1 + v_d2) T <= s2
//   |v_d1 - v0| T <= a_max,  |v_d2 - v_d1| T <= a_max
//   0 <= v_d1, v_d2 <= v_max / safety_factor
// solved in closed form; v_d2 takes its smallest feasible value. An
// infeasible instance returns feasible == false with both speeds 0.
// Throws std::invalid_argument on negative v0, s1 or s2.
SpeedPlan desired_speed_lp(double v0, double s1, double s2, const SafetyParams& params);

// Scales pedestrian and bicycle box extents by ped_bike_scale; positions and
// headings are untouched.
std::vector<grid::DetectedObject> augment_objects(std::vector<grid::DetectedObject> objects,
                                                  const SafetyParams& params);

// Largest arclength the ego box can sweep along the path (heading from the
// path tangent, sampled every collision_sample_step) without intersecting any
// forecast footprint with time_offset <= horizon, minus the safety margin
// s_bar * safety_factor, floored at 0. Forecast positions, the path and the
// ego box share one frame.
double max_safe_distance(const WaypointPath& path, const BoxExtents& ego_box,
                         const std::vector<track::Forecast>& forecasts, double horizon,
                         const SafetyParams& params);

// Circular mean of the bearings atan2(x, y) from the ego origin to the first
// two waypoints; a waypoint at the origin contributes bearing 0.
// Throws std::invalid_argument with fewer than 2 waypoints.
double desired_heading(const WaypointPath& path);

struct PidGains {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
};

class Pid {
 public:
  Pid() = default;
  Pid(PidGains gains, double integral_clamp) : gains_(gains), clamp_(integral_clamp) {}

  // out = kp*e + ki*I + kd*(e - e_prev)/dt, with I accumulated by e*dt and
  // clamped to [-clamp, clamp] before use.
  double step(double error, double dt);
  void reset();

  double integral() const { return integral_; }

 private:
  PidGains gains_;
  double clamp_ = 0.0;
  double integral_ = 0.0;
  double prev_error_ = 0.0;
};

// Emergency stop iff the light is not green or a stop sign is ahead.
bool traffic_gate(const TrafficState& state);

struct VehicleCommand {
  double steer = 0.0;     // [-1, 1]
  double throttle = 0.0;  // [0, 1]
  double brake = 0.0;     // [0, 1]; never positive together with throttle
};

struct EgoState {
  Pose2 pose;          // world frame
  double speed = 0.0;  // m/s
  BoxExtents box{2.3, 0.95};
};

struct ControllerConfig {
  SafetyParams safety;
  double threshold1 = 0.9;
  double threshold2 = 0.5;
  PidGains lateral{1.2, 0.0, 0.2};
  PidGains longitudinal{0.8, 0.05, 0.0};
  double integral_clamp = 2.0;
  track::TrackerParams tracker;

  // Tracker gate sized for the configured speed range.
  static ControllerConfig with_defaults(SafetyParams safety = {});
};

struct TickDiagnostics {
  double s1 = 0.0;
  double s2 = 0.0;
  SpeedPlan plan;
  double psi_d = 0.0;
  bool emergency_stop = false;
  std::vector<grid::DetectedObject> objects;  // ingested, after shape augmentation
  std::vector<track::Forecast> forecasts;
};

// One safety-controller instance per episode. Each tick recovers the scene,
// updates the tracker, forecasts, computes the two safe distances, solves the
// speed plan and drives the two PID loops; the traffic gate overrides with a
// full brake.
class Controller {
 public:
  explicit Controller(ControllerConfig cfg);

  VehicleCommand tick(const std::vector<grid::DetectedObject>& objects,
                      const std::vector<Vec2>& waypoint_deltas, const TrafficState& traffic,
                      const EgoState& ego, double t, TickDiagnostics* diag = nullptr);

  // Density-map front end: decodes with the configured thresholds, then runs
  // the object pipeline.
  VehicleCommand tick(const grid::DensityMap& map, const std::vector<Vec2>& waypoint_deltas,
                      const TrafficState& traffic, const EgoState& ego, double t,
                      TickDiagnostics* diag = nullptr);

  const track::TrackSet& tracker() const { return tracks_; }
  const ControllerConfig& config() const { return cfg_; }

 private:
  ControllerConfig cfg_;
  track::TrackSet tracks_;
  Pid lateral_;
  Pid longitudinal_;
};

// Ablation variant: follows the waypoints with the two PID loops at a fixed
// cruise speed; no scene recovery, no speed plan, no traffic gate.
class NoSafetyController {
 public:
  explicit NoSafetyController(ControllerConfig cfg);

  VehicleCommand tick(const std::vector<Vec2>& waypoint_deltas, const EgoState& ego,
                      TickDiagnostics* diag = nullptr);

 private:
  ControllerConfig cfg_;
  Pid lateral_;
  Pid longitudinal_;
};

}  // namespace safedrive::ctrl

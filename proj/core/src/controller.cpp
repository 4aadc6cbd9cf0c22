#include "safedrive/controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace safedrive::ctrl {

const char* to_string(BindingConstraint b) {
  switch (b) {
    case BindingConstraint::kS1: return "s1";
    case BindingConstraint::kS2: return "s2";
    case BindingConstraint::kAccel: return "accel";
    case BindingConstraint::kVMax: return "v_max";
    case BindingConstraint::kNone: return "none";
  }
  return "none";
}

namespace {

void validate_params(const SafetyParams& p) {
  if (!(p.tick_period > 0.0) || !(p.a_max > 0.0) || !(p.v_max > 0.0) ||
      !(p.safety_factor > 0.0) || p.s_bar < 0.0) {
    throw std::invalid_argument("invalid safety params");
  }
}

}  // namespace

SpeedPlan desired_speed_lp(double v0, double s1, double s2, const SafetyParams& params) {
  validate_params(params);
  if (!std::isfinite(v0) || v0 < 0.0 || !(s1 >= 0.0) || !(s2 >= 0.0)) {
    throw std::invalid_argument("desired_speed_lp: v0, s1, s2 must be non-negative");
  }

  const double t = params.tick_period;
  const double a = params.a_max / t;  // speed change allowed per step
  const double v_cap = params.effective_v_max();

  // Feasible v_d2 for a given v_d1 requires
  //   max(0, v_d1 - a) <= min(v_d1 + a, v_cap, s2/t - v0 - 2 v_d1)
  // which reduces to three upper bounds on v_d1.
  const double budget2 = s2 / t - v0;
  const double ub_s1 = s1 / t - v0;
  const double ub_s2 = std::min({v_cap + a, (budget2 + a) / 3.0, budget2 / 2.0});
  const double ub_accel = v0 + a;
  const double ub_vmax = v_cap;

  SpeedPlan plan;
  double best = ub_s1;
  plan.binding = BindingConstraint::kS1;
  if (ub_s2 < best) {
    best = ub_s2;
    plan.binding = BindingConstraint::kS2;
  }
  if (ub_accel < best) {
    best = ub_accel;
    plan.binding = BindingConstraint::kAccel;
  }
  if (ub_vmax < best) {
    best = ub_vmax;
    plan.binding = BindingConstraint::kVMax;
  }

  const double lo = std::max(0.0, v0 - a);
  if (best < lo) {
    plan.v_d1 = 0.0;
    plan.v_d2 = 0.0;
    plan.feasible = false;
    plan.binding = BindingConstraint::kNone;
    return plan;
  }
  plan.v_d1 = best;
  plan.v_d2 = std::max(0.0, best - a);  // smallest value the constraints admit
  plan.feasible = true;
  return plan;
}

std::vector<grid::DetectedObject> augment_objects(std::vector<grid::DetectedObject> objects,
                                                  const SafetyParams& params) {
  for (auto& obj : objects) {
    if (obj.cls == grid::ObjectClass::kPedestrian || obj.cls == grid::ObjectClass::kBicycle) {
      obj.box.half_length *= params.ped_bike_scale;
      obj.box.half_width *= params.ped_bike_scale;
    }
  }
  return objects;
}

double max_safe_distance(const WaypointPath& path, const BoxExtents& ego_box,
                         const std::vector<track::Forecast>& forecasts, double horizon,
                         const SafetyParams& params) {
  validate_params(params);
  const double step = params.collision_sample_step;
  if (!(step > 0.0)) throw std::invalid_argument("collision_sample_step must be positive");

  std::vector<OrientedBox> obstacles;
  for (const auto& fc : forecasts) {
    for (const auto& sample : fc.samples) {
      if (sample.time_offset <= horizon) {
        obstacles.push_back(
            OrientedBox{sample.position, sample.box.half_length, sample.box.half_width,
                        sample.heading});
      }
    }
  }

  const double length = path.total_length();
  double clear_s = 0.0;
  bool blocked = false;
  for (double s = 0.0; !blocked; s += step) {
    const bool last = s >= length;
    const double at = last ? length : s;
    const PathSample sample = path_point_at_arclength(path, at);
    const OrientedBox ego =
        OrientedBox{sample.point, ego_box.half_length, ego_box.half_width, sample.heading};
    for (const auto& obstacle : obstacles) {
      if (boxes_intersect(ego, obstacle)) {
        blocked = true;
        break;
      }
    }
    if (blocked) break;
    clear_s = at;
    if (last) break;
  }
  return std::max(clear_s - params.effective_margin(), 0.0);
}

double desired_heading(const WaypointPath& path) {
  if (path.points.size() < 2) {
    throw std::invalid_argument("desired_heading needs at least 2 waypoints");
  }
  double sin_sum = 0.0;
  double cos_sum = 0.0;
  for (int i = 0; i < 2; ++i) {
    const Vec2& p = path.points[static_cast<std::size_t>(i)];
    const double bearing = std::atan2(p.x, p.y);  // 0 = straight ahead
    sin_sum += std::sin(bearing);
    cos_sum += std::cos(bearing);
  }
  return std::atan2(sin_sum, cos_sum);
}

double Pid::step(double error, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("pid step needs dt > 0");
  integral_ = std::clamp(integral_ + error * dt, -clamp_, clamp_);
  const double derivative = (error - prev_error_) / dt;
  prev_error_ = error;
  return gains_.kp * error + gains_.ki * integral_ + gains_.kd * derivative;
}

void Pid::reset() {
  integral_ = 0.0;
  prev_error_ = 0.0;
}

bool traffic_gate(const TrafficState& state) {
  return state.light_green < 0.5 || state.stop_sign >= 0.5;
}

ControllerConfig ControllerConfig::with_defaults(SafetyParams safety) {
  ControllerConfig cfg;
  cfg.safety = safety;
  cfg.tracker.gate = track::association_gate(safety.v_max, safety.tick_period);
  return cfg;
}

namespace {

// Route for the collision sweep: the ego origin plus the cumulative
// waypoints, all in the world frame.
WaypointPath world_route(const WaypointPath& ego_frame_waypoints, const Pose2& ego) {
  WaypointPath route;
  route.points.reserve(ego_frame_waypoints.points.size() + 1);
  route.points.push_back(Vec2{ego.x, ego.y});
  for (const Vec2& w : ego_frame_waypoints.points) {
    route.points.push_back(ego_to_world(w, ego));
  }
  return route;
}

VehicleCommand longitudinal_command(double out) {
  VehicleCommand cmd;
  if (out >= 0.0) {
    cmd.throttle = std::min(out, 1.0);
  } else {
    cmd.brake = std::min(-out, 1.0);
  }
  return cmd;
}

}  // namespace

Controller::Controller(ControllerConfig cfg)
    : cfg_(cfg),
      tracks_(cfg.tracker),
      lateral_(cfg.lateral, cfg.integral_clamp),
      longitudinal_(cfg.longitudinal, cfg.integral_clamp) {}

VehicleCommand Controller::tick(const std::vector<grid::DetectedObject>& objects,
                                const std::vector<Vec2>& waypoint_deltas,
                                const TrafficState& traffic, const EgoState& ego, double t,
                                TickDiagnostics* diag) {
  const SafetyParams& sp = cfg_.safety;
  const double T = sp.tick_period;

  const auto augmented = augment_objects(objects, sp);
  tracks_.update(augmented, ego.pose, t);
  const auto forecasts = tracks_.forecast_all(sp.forecast_horizons);

  const WaypointPath heading_path = grid::accumulate_waypoints(waypoint_deltas);
  const WaypointPath route = world_route(heading_path, ego.pose);

  const double s1 = max_safe_distance(route, ego.box, forecasts, T, sp);
  const double s2 = max_safe_distance(route, ego.box, forecasts, 2.0 * T, sp);
  const SpeedPlan plan = desired_speed_lp(ego.speed, s1, s2, sp);

  const double psi_d = desired_heading(heading_path);
  const double steer_raw = lateral_.step(psi_d, T);

  VehicleCommand cmd;
  cmd.steer = std::clamp(steer_raw, -1.0, 1.0);

  const bool gate = traffic_gate(traffic);
  const bool stop = gate || !plan.feasible;
  if (stop) {
    cmd.throttle = 0.0;
    cmd.brake = 1.0;
    longitudinal_.reset();
  } else {
    const double out = longitudinal_.step(plan.v_d1 - ego.speed, T);
    const VehicleCommand lon = longitudinal_command(out);
    cmd.throttle = lon.throttle;
    cmd.brake = lon.brake;
  }

  if (diag != nullptr) {
    diag->s1 = s1;
    diag->s2 = s2;
    diag->plan = plan;
    diag->psi_d = psi_d;
    diag->emergency_stop = stop;
    diag->objects = augmented;
    diag->forecasts = forecasts;
  }
  return cmd;
}

VehicleCommand Controller::tick(const grid::DensityMap& map,
                                const std::vector<Vec2>& waypoint_deltas,
                                const TrafficState& traffic, const EgoState& ego, double t,
                                TickDiagnostics* diag) {
  const auto objects = grid::decode_density_map(map, cfg_.threshold1, cfg_.threshold2);
  return tick(objects, waypoint_deltas, traffic, ego, t, diag);
}

NoSafetyController::NoSafetyController(ControllerConfig cfg)
    : cfg_(cfg),
      lateral_(cfg.lateral, cfg.integral_clamp),
      longitudinal_(cfg.longitudinal, cfg.integral_clamp) {}

VehicleCommand NoSafetyController::tick(const std::vector<Vec2>& waypoint_deltas,
                                        const EgoState& ego, TickDiagnostics* diag) {
  const double T = cfg_.safety.tick_period;
  const double psi_d = desired_heading(grid::accumulate_waypoints(waypoint_deltas));
  const double steer_raw = lateral_.step(psi_d, T);
  const double out = longitudinal_.step(cfg_.safety.v_max - ego.speed, T);

  VehicleCommand cmd = longitudinal_command(out);
  cmd.steer = std::clamp(steer_raw, -1.0, 1.0);
  if (diag != nullptr) {
    *diag = TickDiagnostics{};
    diag->psi_d = psi_d;
    diag->plan.v_d1 = cfg_.safety.v_max;
    diag->plan.feasible = true;
  }
  return cmd;
}

}  // namespace safedrive::ctrl

#include "safedrive/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace safedrive::sim {

EgoKin step_ego(const EgoKin& state, const ctrl::VehicleCommand& cmd, double dt,
                const EgoLimits& limits) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_ego needs dt > 0");
  const double a =
      cmd.throttle * limits.a_acc_max - cmd.brake * limits.a_brk_max - limits.drag * state.speed;
  const double delta = cmd.steer * limits.delta_max;

  EgoKin next;
  const Vec2 fwd = heading_forward(state.pose.heading);
  next.pose.x = state.pose.x + fwd.x * state.speed * dt;
  next.pose.y = state.pose.y + fwd.y * state.speed * dt;
  next.pose.heading =
      normalize_angle(state.pose.heading + (state.speed / limits.wheelbase) * std::tan(delta) * dt);
  next.speed = std::clamp(state.speed + a * dt, 0.0, limits.v_phys_max);
  return next;
}

double nearest_arclength(const WaypointPath& path, const Vec2& p) {
  if (path.points.size() < 2) throw std::invalid_argument("path needs at least 2 points");
  double best_d2 = std::numeric_limits<double>::infinity();
  double best_s = 0.0;
  double s_base = 0.0;
  for (std::size_t i = 0; i + 1 < path.points.size(); ++i) {
    const Vec2& a = path.points[i];
    const Vec2& b = path.points[i + 1];
    const Vec2 seg{b.x - a.x, b.y - a.y};
    const double len2 = seg.squared_norm();
    double u = 0.0;
    if (len2 > 0.0) {
      u = std::clamp(((p.x - a.x) * seg.x + (p.y - a.y) * seg.y) / len2, 0.0, 1.0);
    }
    const Vec2 q{a.x + seg.x * u, a.y + seg.y * u};
    const double d2 = (Vec2{p.x - q.x, p.y - q.y}).squared_norm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best_s = s_base + std::sqrt(len2) * u;
    }
    s_base += std::sqrt(len2);
  }
  return best_s;
}

World::World(Scenario scenario, EgoLimits limits)
    : scenario_(std::move(scenario)), limits_(limits) {
  ego_.pose = scenario_.ego_start;
  ego_.speed = scenario_.ego_speed;
  for (const AgentSpec& spec : scenario_.agents) {
    AgentState agent;
    agent.cls = spec.cls;
    agent.pose = spec.pose;
    agent.speed = spec.speed;
    agent.accel = spec.accel;
    agent.box = spec.box;
    agent.triggers = spec.triggers;
    agents_.push_back(std::move(agent));
  }
  route_length_ = scenario_.route.total_length();
  progress_ = nearest_arclength(scenario_.route, Vec2{ego_.pose.x, ego_.pose.y});
}

void World::step(double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("World::step needs dt > 0");
  const Vec2 ego_pos{ego_.pose.x, ego_.pose.y};

  for (AgentState& agent : agents_) {
    // Fire due triggers, in declaration order, before the agent moves.
    for (auto it = agent.triggers.begin(); it != agent.triggers.end();) {
      bool due = false;
      if (it->kind == Trigger::Kind::kTime) {
        due = time_ >= it->value;
      } else {
        const Vec2 d{agent.pose.x - ego_pos.x, agent.pose.y - ego_pos.y};
        due = d.norm() <= it->value;
      }
      if (due) {
        const TriggerAction& act = it->action;
        if (act.stop) {
          agent.speed = 0.0;
          agent.accel = 0.0;
        }
        if (act.accel) agent.accel = *act.accel;
        if (act.speed) agent.speed = *act.speed;
        if (act.heading) agent.pose.heading = normalize_angle(*act.heading);
        it = agent.triggers.erase(it);
      } else {
        ++it;
      }
    }
    const Vec2 fwd = heading_forward(agent.pose.heading);
    agent.pose.x += fwd.x * agent.speed * dt;
    agent.pose.y += fwd.y * agent.speed * dt;
    agent.speed = std::max(0.0, agent.speed + agent.accel * dt);
  }

  odometer_ += ego_.speed * dt;
  ego_ = step_ego(ego_, command_, dt, limits_);
  time_ += dt;
  progress_ =
      std::max(progress_, nearest_arclength(scenario_.route, Vec2{ego_.pose.x, ego_.pose.y}));
}

GroundTruth World::extract_ground_truth(int coverage_r, double waypoint_spacing,
                                        int waypoint_count) const {
  if (waypoint_count < 1 || !(waypoint_spacing > 0.0)) {
    throw std::invalid_argument("invalid waypoint resampling parameters");
  }
  GroundTruth gt;
  const double half = coverage_r / 2.0;
  for (const AgentState& agent : agents_) {
    const Vec2 local = world_to_ego(Vec2{agent.pose.x, agent.pose.y}, ego_.pose);
    if (local.x < -half || local.x >= half || local.y < 0.0 ||
        local.y >= static_cast<double>(coverage_r)) {
      continue;
    }
    grid::DetectedObject obj;
    obj.position = local;
    obj.heading = normalize_angle(agent.pose.heading - ego_.pose.heading);
    obj.speed = agent.speed;
    obj.box = agent.box;
    obj.confidence = 1.0;
    obj.cls = agent.cls;
    gt.objects.push_back(obj);
  }

  const double s0 = progress_;
  Vec2 prev{0.0, 0.0};  // ego origin in the ego frame
  for (int k = 1; k <= waypoint_count; ++k) {
    const double s = s0 + waypoint_spacing * k;
    PathSample sample = path_point_at_arclength(scenario_.route, s);
    if (s > route_length_) {
      // Extend past the route end along the final tangent; a lookahead that
      // shrinks at the finish line would throttle the speed plan short of it.
      sample.point += heading_forward(sample.heading) * (s - route_length_);
    }
    const Vec2 local = world_to_ego(sample.point, ego_.pose);
    gt.waypoint_deltas.push_back(Vec2{local.x - prev.x, local.y - prev.y});
    prev = local;
  }

  gt.traffic = rule_state();
  return gt;
}

}  // namespace safedrive::sim

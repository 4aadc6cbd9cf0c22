#include "safedrive/metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace safedrive::sim {

const char* to_string(InfractionType type) {
  switch (type) {
    case InfractionType::kCollisionStatic: return "collision_static";
    case InfractionType::kCollisionPedestrian: return "collision_pedestrian";
    case InfractionType::kCollisionVehicle: return "collision_vehicle";
    case InfractionType::kRedLight: return "red_light";
    case InfractionType::kAgentBlocked: return "agent_blocked";
  }
  return "collision_vehicle";
}

std::optional<InfractionType> infraction_from_string(const std::string& s) {
  if (s == "collision_static") return InfractionType::kCollisionStatic;
  if (s == "collision_pedestrian") return InfractionType::kCollisionPedestrian;
  if (s == "collision_vehicle") return InfractionType::kCollisionVehicle;
  if (s == "red_light") return InfractionType::kRedLight;
  if (s == "agent_blocked") return InfractionType::kAgentBlocked;
  return std::nullopt;
}

double PenaltyConfig::penalty_for(InfractionType type) const {
  switch (type) {
    case InfractionType::kCollisionStatic: return collision_static;
    case InfractionType::kCollisionPedestrian: return collision_pedestrian;
    case InfractionType::kCollisionVehicle: return collision_vehicle;
    case InfractionType::kRedLight: return red_light;
    case InfractionType::kAgentBlocked: return agent_blocked;
  }
  return 1.0;
}

double blocked_window_for(double scenario_duration) {
  return std::min(90.0, scenario_duration / 2.0);
}

namespace {

InfractionType collision_type_for(grid::ObjectClass cls) {
  switch (cls) {
    case grid::ObjectClass::kPedestrian: return InfractionType::kCollisionPedestrian;
    case grid::ObjectClass::kStatic: return InfractionType::kCollisionStatic;
    case grid::ObjectClass::kVehicle:
    case grid::ObjectClass::kBicycle: return InfractionType::kCollisionVehicle;
  }
  return InfractionType::kCollisionVehicle;
}

}  // namespace

InfractionDetector::InfractionDetector(const World& world, double blocked_window)
    : blocked_window_(blocked_window),
      in_contact_(world.agents().size(), false),
      prev_progress_(world.route_progress()) {}

std::vector<InfractionEvent> InfractionDetector::step(const World& world, double dt) {
  std::vector<InfractionEvent> fresh;
  const EgoKin& ego = world.ego();
  const OrientedBox ego_box{Vec2{ego.pose.x, ego.pose.y}, world.limits().box.half_length,
                            world.limits().box.half_width, ego.pose.heading};

  const auto& agents = world.agents();
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const bool touching = boxes_intersect(ego_box, agents[i].footprint());
    if (touching && !in_contact_[i]) {
      fresh.push_back(InfractionEvent{collision_type_for(agents[i].cls), world.time(),
                                      static_cast<int>(i)});
    }
    in_contact_[i] = touching;
  }

  const TrafficScript& rules = world.scenario().rules;
  if (rules.has_stop_line()) {
    const double now = world.route_progress();
    if (prev_progress_ < rules.stop_line_s && now >= rules.stop_line_s &&
        world.rule_state().light_green < 0.5) {
      fresh.push_back(InfractionEvent{InfractionType::kRedLight, world.time(), -1});
    }
    prev_progress_ = now;
  }

  if (ego.speed < 0.1) {
    blocked_time_ += dt;
    if (blocked_armed_ && blocked_time_ >= blocked_window_) {
      fresh.push_back(InfractionEvent{InfractionType::kAgentBlocked, world.time(), -1});
      blocked_armed_ = false;
    }
  } else {
    blocked_time_ = 0.0;
    blocked_armed_ = true;
  }

  events_.insert(events_.end(), fresh.begin(), fresh.end());
  return fresh;
}

Metrics compute_metrics(const std::vector<InfractionEvent>& events, double route_progress,
                        double route_length, double driven_m, double duration_s,
                        const PenaltyConfig& penalties) {
  if (!(route_length > 0.0)) {
    throw std::invalid_argument("compute_metrics: route length must be positive");
  }
  Metrics m;
  m.route_completion = std::clamp(route_progress / route_length, 0.0, 1.0) * 100.0;
  m.infraction_score = 1.0;
  for (const InfractionEvent& ev : events) {
    m.infraction_score *= penalties.penalty_for(ev.type);
    m.counts[static_cast<std::size_t>(ev.type)] += 1;
  }
  m.driving_score = m.route_completion * m.infraction_score;
  m.driven_m = driven_m;
  m.duration_s = duration_s;
  const double km = driven_m / 1000.0;
  for (int i = 0; i < kInfractionTypeCount; ++i) {
    m.per_km[static_cast<std::size_t>(i)] =
        km > 0.0 ? m.counts[static_cast<std::size_t>(i)] / km : 0.0;
  }
  return m;
}

}  // namespace safedrive::sim

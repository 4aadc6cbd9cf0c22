#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "safedrive/world.hpp"

namespace safedrive::sim {

enum class InfractionType {
  kCollisionStatic,
  kCollisionPedestrian,
  kCollisionVehicle,
  kRedLight,
  kAgentBlocked,
};
inline constexpr int kInfractionTypeCount = 5;

const char* to_string(InfractionType type);
std::optional<InfractionType> infraction_from_string(const std::string& s);

struct InfractionEvent {
  InfractionType type = InfractionType::kCollisionVehicle;
  double time = 0.0;
  int agent_index = -1;  // collisions only
};

// Multiplicative score decay per event. stop_sign is accepted in config for
// completeness; no detector emits it.
struct PenaltyConfig {
  double collision_pedestrian = 0.50;
  double collision_vehicle = 0.60;
  double collision_static = 0.65;
  double red_light = 0.70;
  double stop_sign = 0.80;
  double agent_blocked = 0.70;

  double penalty_for(InfractionType type) const;
};

// Per-step infraction scan with per-contact debounce: a collision with one
// agent is reported once per contact episode, re-armed only after separation.
class InfractionDetector {
 public:
  // blocked_window: seconds of near-standstill before agent_blocked fires.
  InfractionDetector(const World& world, double blocked_window);

  // Call after every World::step with the same dt.
  std::vector<InfractionEvent> step(const World& world, double dt);

  const std::vector<InfractionEvent>& events() const { return events_; }

 private:
  double blocked_window_;
  std::vector<bool> in_contact_;
  double blocked_time_ = 0.0;
  bool blocked_armed_ = true;
  double prev_progress_ = 0.0;
  std::vector<InfractionEvent> events_;
};

double blocked_window_for(double scenario_duration);

struct Metrics {
  double route_completion = 0.0;  // percent
  double infraction_score = 1.0;  // (0, 1]
  double driving_score = 0.0;     // percent, = rc * is
  std::array<int, kInfractionTypeCount> counts{};
  std::array<double, kInfractionTypeCount> per_km{};
  double driven_m = 0.0;
  double duration_s = 0.0;
};

// route_progress/route_length give RC; penalties fold into IS; per-km rates
// use the odometer distance. Throws std::invalid_argument on a zero-length
// route.
Metrics compute_metrics(const std::vector<InfractionEvent>& events, double route_progress,
                        double route_length, double driven_m, double duration_s,
                        const PenaltyConfig& penalties);

}  // namespace safedrive::sim

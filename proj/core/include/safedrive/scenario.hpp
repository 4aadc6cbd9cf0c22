#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "safedrive/density_map.hpp"
#include "safedrive/geometry.hpp"
#include "safedrive/traffic.hpp"

namespace safedrive::sim {

// Parse or schema failure; line is 1-based, 0 when unknown.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(const std::string& message, int line)
      : std::runtime_error(line > 0 ? message + " (line " + std::to_string(line) + ")"
                                    : message),
        line_(line) {}

  int line() const { return line_; }

 private:
  int line_ = 0;
};

struct TriggerAction {
  std::optional<double> accel;    // m/s^2, applied until overridden
  std::optional<double> speed;    // m/s, set instantaneously
  std::optional<double> heading;  // radians, set instantaneously
  bool stop = false;              // speed and accel to zero
};

// One-shot: fires the first step its condition holds, then disarms.
struct Trigger {
  enum class Kind { kTime, kEgoDistance };
  Kind kind = Kind::kTime;
  double value = 0.0;  // seconds or meters
  TriggerAction action;
};

struct AgentSpec {
  grid::ObjectClass cls = grid::ObjectClass::kVehicle;
  Pose2 pose;
  double speed = 0.0;
  double accel = 0.0;
  BoxExtents box{2.3, 0.95};
  std::vector<Trigger> triggers;
};

struct Interval {
  double from = 0.0;
  double to = 0.0;  // half-open [from, to)

  bool contains(double t) const { return t >= from && t < to; }
};

struct TrafficScript {
  std::vector<Interval> red_lights;  // light_green = 0 inside any of these
  std::vector<Interval> stop_signs;
  std::vector<Interval> junctions;
  double stop_line_s = -1.0;  // route arclength of the controlled line; < 0 = none

  bool has_stop_line() const { return stop_line_s >= 0.0; }
  TrafficState state_at(double t) const;
};

struct Scenario {
  std::string name;
  double duration = 0.0;  // seconds
  std::uint64_t seed = 0;
  WaypointPath route;  // world frame
  Pose2 ego_start;
  double ego_speed = 0.0;
  std::vector<AgentSpec> agents;
  TrafficScript rules;
};

// Parses the versioned scenario document (JSON, `scenario_version: 1`).
// Throws ScenarioError on malformed text or schema violations.
Scenario parse_scenario(const std::string& text, const std::string& fallback_name);

// Reads and parses a scenario file; the scenario name defaults to the file
// stem. Throws std::runtime_error when the file cannot be read.
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace safedrive::sim

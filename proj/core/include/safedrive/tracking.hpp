#pragma once

#include <deque>
#include <utility>
#include <vector>

#include "safedrive/density_map.hpp"
#include "safedrive/geometry.hpp"

namespace safedrive::track {

struct TrackerParams {
  double gate = 2.0;   // m, association gate
  int max_misses = 2;  // consecutive unmatched ticks before a track is dropped
  int window = 3;      // velocity moving-average window K
};

// Gate wide enough to follow objects at the configured top speed between ticks.
inline double association_gate(double v_max, double tick_period) {
  return std::max(2.0, v_max * tick_period);
}

struct Track {
  int id = 0;
  Vec2 position;         // world frame, m
  double heading = 0.0;  // world frame, rad
  double speed = 0.0;    // m/s, from the latest detection
  BoxExtents box;
  grid::ObjectClass cls = grid::ObjectClass::kVehicle;
  std::deque<Vec2> velocity_history;  // world frame, newest at back, size <= window
  double last_update_time = 0.0;
  int misses = 0;
};

struct ForecastSample {
  double time_offset = 0.0;  // s, > 0
  Vec2 position;             // world frame
  double heading = 0.0;
  BoxExtents box;
};

struct Forecast {
  int track_id = 0;
  std::vector<ForecastSample> samples;  // time offsets strictly increasing
};

struct Association {
  std::vector<std::pair<int, int>> matches;  // (track index, detection index)
  std::vector<int> unmatched_tracks;
  std::vector<int> unmatched_detections;
};

// Greedy nearest-neighbor matching over all pairs in increasing distance
// order; pairs farther apart than gate stay unmatched. Ties break on track
// index, then detection index.
Association associate(const std::vector<Track>& tracks,
                      const std::vector<Vec2>& detection_positions, double gate);

// Arithmetic mean of the recorded velocities, (0,0) for an empty history.
Vec2 mean_velocity(const Track& track);

// Constant-velocity propagation of the moving-average velocity estimate;
// heading and box held constant. Horizons must be positive and ascending.
Forecast forecast_track(const Track& track, const std::vector<double>& horizons);

class TrackSet {
 public:
  explicit TrackSet(TrackerParams params = {}) : params_(params) {}

  // Ingests one tick of detections (ego frame) taken at time t with the ego
  // at the given world pose. Matched tracks record a finite-difference
  // velocity; unmatched detections spawn tracks; tracks unmatched for more
  // than max_misses consecutive ticks are dropped. Throws
  // std::invalid_argument if t does not strictly increase.
  void update(const std::vector<grid::DetectedObject>& detections, const Pose2& ego, double t);

  std::vector<Forecast> forecast_all(const std::vector<double>& horizons) const;

  const std::vector<Track>& tracks() const { return tracks_; }
  const TrackerParams& params() const { return params_; }

 private:
  TrackerParams params_;
  std::vector<Track> tracks_;
  int next_id_ = 0;  // ids are never reused within an episode
  bool has_time_ = false;
  double last_time_ = 0.0;
};

}  // namespace safedrive::track

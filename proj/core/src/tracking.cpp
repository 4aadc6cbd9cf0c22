#include "safedrive/tracking.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace safedrive::track {

Association associate(const std::vector<Track>& tracks,
                      const std::vector<Vec2>& detection_positions, double gate) {
  struct Pair {
    double dist;
    int track;
    int det;
  };
  std::vector<Pair> pairs;
  pairs.reserve(tracks.size() * detection_positions.size());
  for (int ti = 0; ti < static_cast<int>(tracks.size()); ++ti) {
    for (int di = 0; di < static_cast<int>(detection_positions.size()); ++di) {
      const double d = (detection_positions[di] - tracks[ti].position).norm();
      if (d <= gate) {
        pairs.push_back({d, ti, di});
      }
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return std::tie(a.dist, a.track, a.det) < std::tie(b.dist, b.track, b.det);
  });

  Association out;
  std::vector<bool> track_used(tracks.size(), false);
  std::vector<bool> det_used(detection_positions.size(), false);
  for (const Pair& p : pairs) {
    if (track_used[p.track] || det_used[p.det]) {
      continue;
    }
    track_used[p.track] = true;
    det_used[p.det] = true;
    out.matches.emplace_back(p.track, p.det);
  }
  for (int ti = 0; ti < static_cast<int>(tracks.size()); ++ti) {
    if (!track_used[ti]) {
      out.unmatched_tracks.push_back(ti);
    }
  }
  for (int di = 0; di < static_cast<int>(detection_positions.size()); ++di) {
    if (!det_used[di]) {
      out.unmatched_detections.push_back(di);
    }
  }
  return out;
}

Vec2 mean_velocity(const Track& track) {
  if (track.velocity_history.empty()) {
    return {0.0, 0.0};
  }
  Vec2 sum;
  for (const Vec2& v : track.velocity_history) {
    sum += v;
  }
  return sum * (1.0 / static_cast<double>(track.velocity_history.size()));
}

Forecast forecast_track(const Track& track, const std::vector<double>& horizons) {
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (horizons[i] <= 0.0 || (i > 0 && horizons[i] <= horizons[i - 1])) {
      throw std::invalid_argument("forecast_track: horizons must be positive and ascending");
    }
  }
  const Vec2 v = mean_velocity(track);
  Forecast fc;
  fc.track_id = track.id;
  fc.samples.reserve(horizons.size());
  for (const double tau : horizons) {
    fc.samples.push_back({tau, track.position + v * tau, track.heading, track.box});
  }
  return fc;
}

void TrackSet::update(const std::vector<grid::DetectedObject>& detections, const Pose2& ego,
                      double t) {
  if (has_time_ && t <= last_time_) {
    throw std::invalid_argument("TrackSet::update: time must strictly increase");
  }

  std::vector<Vec2> world_positions;
  world_positions.reserve(detections.size());
  for (const grid::DetectedObject& det : detections) {
    world_positions.push_back(ego_to_world(det.position, ego));
  }

  const Association assoc = associate(tracks_, world_positions, params_.gate);

  for (const auto& [ti, di] : assoc.matches) {
    Track& tr = tracks_[ti];
    const double dt = t - tr.last_update_time;
    const Vec2 vel = (world_positions[di] - tr.position) * (1.0 / dt);
    tr.velocity_history.push_back(vel);
    while (static_cast<int>(tr.velocity_history.size()) > params_.window) {
      tr.velocity_history.pop_front();
    }
    tr.position = world_positions[di];
    tr.heading = normalize_angle(ego.heading + detections[di].heading);
    tr.speed = detections[di].speed;
    tr.box = detections[di].box;
    tr.cls = detections[di].cls;
    tr.last_update_time = t;
    tr.misses = 0;
  }

  std::vector<bool> drop(tracks_.size(), false);
  for (const int ti : assoc.unmatched_tracks) {
    Track& tr = tracks_[ti];
    ++tr.misses;
    if (tr.misses > params_.max_misses) {
      drop[ti] = true;
    }
  }
  std::vector<Track> kept;
  kept.reserve(tracks_.size());
  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    if (!drop[i]) {
      kept.push_back(std::move(tracks_[i]));
    }
  }
  tracks_ = std::move(kept);

  for (const int di : assoc.unmatched_detections) {
    Track tr;
    tr.id = next_id_++;
    tr.position = world_positions[di];
    tr.heading = normalize_angle(ego.heading + detections[di].heading);
    tr.speed = detections[di].speed;
    tr.box = detections[di].box;
    tr.cls = detections[di].cls;
    tr.last_update_time = t;
    tracks_.push_back(std::move(tr));
  }

  has_time_ = true;
  last_time_ = t;
}

std::vector<Forecast> TrackSet::forecast_all(const std::vector<double>& horizons) const {
  std::vector<Forecast> out;
  out.reserve(tracks_.size());
  for (const Track& tr : tracks_) {
    out.push_back(forecast_track(tr, horizons));
  }
  return out;
}

}  // namespace safedrive::track

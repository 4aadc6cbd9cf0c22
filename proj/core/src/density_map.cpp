#include "safedrive/density_map.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace safedrive::grid {

const char* to_string(ObjectClass cls) {
  switch (cls) {
    case ObjectClass::kVehicle: return "vehicle";
    case ObjectClass::kPedestrian: return "pedestrian";
    case ObjectClass::kBicycle: return "bicycle";
    case ObjectClass::kStatic: return "static";
  }
  return "vehicle";
}

ObjectClass object_class_from_string(const std::string& s) {
  if (s == "vehicle") return ObjectClass::kVehicle;
  if (s == "pedestrian") return ObjectClass::kPedestrian;
  if (s == "bicycle") return ObjectClass::kBicycle;
  if (s == "static") return ObjectClass::kStatic;
  throw std::invalid_argument("unknown object class: " + s);
}

DensityMap::DensityMap(int r_) : r(r_) {
  if (r_ <= 0) {
    throw std::invalid_argument("DensityMap: side count must be positive");
  }
  cells.assign(static_cast<std::size_t>(r) * r * kChannels, 0.0);
}

Vec2 DensityMap::cell_center(int row, int col, int r) {
  return {-0.5 * r + col + 0.5, row + 0.5};
}

void DensityMap::validate() const {
  constexpr double kPi = std::numbers::pi;
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) {
      for (int k = 0; k < kChannels; ++k) {
        if (!std::isfinite(at(i, j, k))) {
          throw std::invalid_argument("DensityMap: non-finite cell value");
        }
      }
      const double p = at(i, j, kProb);
      if (p < 0.0 || p > 1.0) {
        throw std::invalid_argument("DensityMap: prob outside [0, 1]");
      }
      if (std::abs(at(i, j, kOffsetX)) > 0.5 || std::abs(at(i, j, kOffsetY)) > 0.5) {
        throw std::invalid_argument("DensityMap: offset outside [-0.5, 0.5]");
      }
      if (at(i, j, kBoxX) < 0.0 || at(i, j, kBoxY) < 0.0) {
        throw std::invalid_argument("DensityMap: negative box extent");
      }
      const double h = at(i, j, kHeading);
      if (h <= -kPi || h > kPi) {
        throw std::invalid_argument("DensityMap: heading outside (-pi, pi]");
      }
    }
  }
}

DensityMap encode_density_map(const std::vector<DetectedObject>& objects, int r) {
  DensityMap map(r);
  // Distance to ego of the object currently occupying each cell; the nearer
  // object wins cell conflicts.
  std::vector<double> occupant_dist(static_cast<std::size_t>(r) * r,
                                    std::numeric_limits<double>::infinity());
  const double half = 0.5 * r;
  for (const DetectedObject& obj : objects) {
    const double x = obj.position.x;
    const double y = obj.position.y;
    if (x < -half || x >= half || y < 0.0 || y >= r) {
      continue;
    }
    const int col = static_cast<int>(std::floor(x + half));
    const int row = static_cast<int>(std::floor(y));
    const double dist = obj.position.squared_norm();
    double& best = occupant_dist[static_cast<std::size_t>(row) * r + col];
    if (dist >= best) {
      continue;
    }
    best = dist;
    const Vec2 center = DensityMap::cell_center(row, col, r);
    map.at(row, col, DensityMap::kProb) = 1.0;
    map.at(row, col, DensityMap::kOffsetX) = x - center.x;
    map.at(row, col, DensityMap::kOffsetY) = y - center.y;
    map.at(row, col, DensityMap::kHeading) = normalize_angle(obj.heading);
    map.at(row, col, DensityMap::kSpeed) = obj.speed;
    map.at(row, col, DensityMap::kBoxX) = obj.box.half_width;
    map.at(row, col, DensityMap::kBoxY) = obj.box.half_length;
  }
  return map;
}

std::vector<DetectedObject> decode_density_map(const DensityMap& map, double threshold1,
                                               double threshold2) {
  if (!(threshold2 < threshold1) || threshold1 <= 0.0 || threshold1 >= 1.0 ||
      threshold2 <= 0.0) {
    throw std::invalid_argument("decode_density_map: need 0 < threshold2 < threshold1 < 1");
  }
  const int r = map.r;
  auto prob_at = [&](int row, int col) -> double {
    if (row < 0 || row >= r || col < 0 || col >= r) {
      return 0.0;
    }
    return map.at(row, col, DensityMap::kProb);
  };
  std::vector<DetectedObject> out;
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) {
      const double p = prob_at(i, j);
      bool detected = p > threshold1;
      if (!detected && p > threshold2) {
        bool local_max = true;
        for (int di = -1; di <= 1 && local_max; ++di) {
          for (int dj = -1; dj <= 1; ++dj) {
            if (di == 0 && dj == 0) {
              continue;
            }
            if (prob_at(i + di, j + dj) >= p) {
              local_max = false;
              break;
            }
          }
        }
        detected = local_max;
      }
      if (!detected) {
        continue;
      }
      const Vec2 center = DensityMap::cell_center(i, j, r);
      DetectedObject obj;
      obj.position = {center.x + std::clamp(map.at(i, j, DensityMap::kOffsetX), -0.5, 0.5),
                      center.y + std::clamp(map.at(i, j, DensityMap::kOffsetY), -0.5, 0.5)};
      obj.heading = map.at(i, j, DensityMap::kHeading);
      obj.speed = map.at(i, j, DensityMap::kSpeed);
      obj.box.half_width = map.at(i, j, DensityMap::kBoxX);
      obj.box.half_length = map.at(i, j, DensityMap::kBoxY);
      obj.confidence = p;
      obj.cls = ObjectClass::kVehicle;
      out.push_back(obj);
    }
  }
  return out;
}

std::string density_map_to_record(const DensityMap& map) {
  std::string out;
  out.reserve(map.cells.size() * 20 + 16);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%d %d\n", map.r, DensityMap::kChannels);
  out += buf;
  for (std::size_t i = 0; i < map.cells.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", map.cells[i]);
    out += buf;
    out += (i + 1) % DensityMap::kChannels == 0 ? '\n' : ' ';
  }
  return out;
}

DensityMap density_map_from_record(const std::string& record) {
  std::istringstream in(record);
  int r = 0;
  int channels = 0;
  if (!(in >> r >> channels)) {
    throw std::invalid_argument("density map record: bad header");
  }
  if (channels != DensityMap::kChannels) {
    throw std::invalid_argument("density map record: expected 7 channels");
  }
  DensityMap map(r);
  for (double& v : map.cells) {
    if (!(in >> v)) {
      throw std::invalid_argument("density map record: truncated cell data");
    }
  }
  return map;
}

BevHistogram::BevHistogram()
    : above(static_cast<std::size_t>(kRows) * kCols, 0),
      below(static_cast<std::size_t>(kRows) * kCols, 0) {}

std::int64_t BevHistogram::total() const {
  std::int64_t n = 0;
  for (std::size_t i = 0; i < above.size(); ++i) {
    n += above[i] + below[i];
  }
  return n;
}

BevHistogram lidar_to_bev(const std::vector<LidarPoint>& points, double ground_z) {
  BevHistogram hist;
  const double side = BevHistogram::cell_side();
  const double half_cols = BevHistogram::kCols / 2;
  for (const LidarPoint& p : points) {
    const double col_f = std::floor(p.x / side + half_cols);
    const double row_f = std::floor(p.y / side);
    if (col_f < 0 || col_f >= BevHistogram::kCols || row_f < 0 || row_f >= BevHistogram::kRows) {
      continue;
    }
    const int col = static_cast<int>(col_f);
    const int row = static_cast<int>(row_f);
    if (p.z > ground_z) {
      ++hist.above_at(row, col);
    } else {
      ++hist.below_at(row, col);
    }
  }
  return hist;
}

WaypointPath accumulate_waypoints(const std::vector<Vec2>& deltas) {
  WaypointPath path;
  path.points.reserve(deltas.size());
  Vec2 acc;
  for (const Vec2& d : deltas) {
    acc += d;
    path.points.push_back(acc);
  }
  return path;
}

std::vector<DetectedObject> corrupt_perception(const std::vector<DetectedObject>& objects,
                                               const NoiseConfig& cfg, int coverage_r) {
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> jitter(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<DetectedObject> out;
  out.reserve(objects.size());
  for (const DetectedObject& obj : objects) {
    double dx = 0.0;
    double dy = 0.0;
    if (cfg.position_sigma > 0.0) {
      dx = jitter(rng) * cfg.position_sigma;
      dy = jitter(rng) * cfg.position_sigma;
    }
    if (cfg.dropout_prob > 0.0 && unit(rng) < cfg.dropout_prob) {
      continue;
    }
    DetectedObject noisy = obj;
    noisy.position = {obj.position.x + dx, obj.position.y + dy};
    out.push_back(noisy);
  }

  if (cfg.false_positive_rate > 0.0) {
    std::poisson_distribution<int> count(cfg.false_positive_rate);
    const int spurious = count(rng);
    const double half = 0.5 * coverage_r;
    std::uniform_real_distribution<double> ux(-half, half);
    std::uniform_real_distribution<double> uy(0.0, coverage_r);
    std::uniform_real_distribution<double> uh(-std::numbers::pi, std::numbers::pi);
    for (int i = 0; i < spurious; ++i) {
      DetectedObject ghost;
      ghost.position = {ux(rng), uy(rng)};
      ghost.heading = normalize_angle(uh(rng));
      ghost.speed = 0.0;
      ghost.box = {1.0, 0.5};
      ghost.confidence = 1.0;
      ghost.cls = ObjectClass::kVehicle;
      out.push_back(ghost);
    }
  }
  return out;
}

}  // namespace safedrive::grid

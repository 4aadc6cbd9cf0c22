#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "safedrive/geometry.hpp"

namespace safedrive::grid {

enum class ObjectClass { kVehicle, kPedestrian, kBicycle, kStatic };

const char* to_string(ObjectClass cls);
ObjectClass object_class_from_string(const std::string& s);

struct DetectedObject {
  Vec2 position;          // ego frame, m
  double heading = 0.0;   // rad, relative to ego forward
  double speed = 0.0;     // m/s along heading
  BoxExtents box;         // half extents, m
  double confidence = 1.0;
  ObjectClass cls = ObjectClass::kVehicle;

  OrientedBox footprint() const { return make_box(position, box, heading); }
};

// R x R x 7 grid over the area R meters ahead of the ego vehicle and R/2
// meters to each side. Cell (row, col) spans x in [-R/2 + col, -R/2 + col + 1)
// and y in [row, row + 1) meters in the ego frame; rows grow forward.
struct DensityMap {
  static constexpr int kChannels = 7;
  enum Channel { kProb = 0, kOffsetX, kOffsetY, kHeading, kSpeed, kBoxX, kBoxY };

  int r = 0;
  std::vector<double> cells;  // row-major, kChannels values per cell

  DensityMap() = default;
  explicit DensityMap(int r_);

  double& at(int row, int col, int ch) { return cells[(row * r + col) * kChannels + ch]; }
  double at(int row, int col, int ch) const { return cells[(row * r + col) * kChannels + ch]; }

  static Vec2 cell_center(int row, int col, int r);

  // Throws std::invalid_argument on the first violated cell invariant
  // (prob in [0,1], offsets in [-0.5,0.5], boxes >= 0, heading in (-pi,pi],
  // all values finite). Encoded ground-truth maps always pass; maps parsed
  // from prediction records need not.
  void validate() const;
};

// Ground-truth encoding: each object whose center lies inside coverage marks
// the containing cell with prob 1, sub-cell offsets, heading, speed and box
// extents. When two objects land in one cell the nearer-to-ego one wins.
// Throws std::invalid_argument if r <= 0.
DensityMap encode_density_map(const std::vector<DetectedObject>& objects, int r);

// Two-threshold decoding. A cell yields an object iff prob > threshold1, or
// prob > threshold2 and prob is a strict local maximum over its
// 8-neighborhood (out-of-grid neighbors read 0). Offsets are clamped to
// [-0.5, 0.5]. Decoded objects carry class kVehicle; the grid stores no class.
// Throws std::invalid_argument unless 0 < threshold2 < threshold1 < 1.
std::vector<DetectedObject> decode_density_map(const DensityMap& map, double threshold1,
                                               double threshold2);

// Flat text record: "R 7" header line, then the row-major cell values.
// Values round-trip exactly.
std::string density_map_to_record(const DensityMap& map);
DensityMap density_map_from_record(const std::string& record);

struct LidarPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

// 2-channel bird's-eye-view histogram with square cells of area 0.125 m^2,
// 80 x 80 cells covering about 28 m ahead of the ego vehicle and about 14 m
// to each side (exactly 80 and 40 cell sides).
struct BevHistogram {
  static constexpr int kRows = 80;  // forward
  static constexpr int kCols = 80;  // lateral
  static constexpr double kCellArea = 0.125;  // m^2

  static double cell_side() { return std::sqrt(kCellArea); }

  std::vector<std::int64_t> above;  // kRows * kCols, points with z > ground
  std::vector<std::int64_t> below;  // points with z <= ground

  BevHistogram();

  std::int64_t& above_at(int row, int col) { return above[row * kCols + col]; }
  std::int64_t& below_at(int row, int col) { return below[row * kCols + col]; }
  std::int64_t total() const;
};

// Bins each in-range point into exactly one cell of exactly one channel;
// out-of-range points are ignored.
BevHistogram lidar_to_bev(const std::vector<LidarPoint>& points, double ground_z);

// Recovers waypoint positions from per-step displacements by prefix sums,
// origin at the ego vehicle.
WaypointPath accumulate_waypoints(const std::vector<Vec2>& deltas);

// Perception stub standing in for the learned detector.
struct NoiseConfig {
  double position_sigma = 0.0;        // m, >= 0
  double dropout_prob = 0.0;          // [0, 1]
  double false_positive_rate = 0.0;   // expected spurious detections per frame
  std::uint64_t seed = 0;
};

// Deterministic given cfg.seed: jitters positions with Gaussian noise, drops
// objects with dropout_prob, then appends Poisson(false_positive_rate)
// spurious vehicle detections uniformly inside the coverage of a grid with
// side count coverage_r.
std::vector<DetectedObject> corrupt_perception(const std::vector<DetectedObject>& objects,
                                               const NoiseConfig& cfg, int coverage_r = 20);

}  // namespace safedrive::grid

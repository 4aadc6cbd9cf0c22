#pragma once

#include "safedrive/density_map.hpp"
#include "safedrive/geometry.hpp"
#include "safedrive/traffic.hpp"

namespace safedrive::loss {

struct LossWeights {
  double pt = 0.4;
  double map = 0.4;
  double tf = 1.0;
  double light = 0.2;
  double stop = 0.01;
  double junction = 0.1;
};

// Sum over waypoints of the L1 norm of the 2D differences.
// Throws std::invalid_argument on length mismatch.
double waypoint_loss(const WaypointPath& pred, const WaypointPath& target);

// Class-balanced probability loss: 0.5 * (mean abs error over target-0 cells
// + mean abs error over target-1 cells); an empty class contributes 0.
// Throws std::invalid_argument on size mismatch or a non-binary target prob.
double density_prob_loss(const grid::DensityMap& pred, const grid::DensityMap& target);

// Mean over target-positive cells of the summed L1 error across the 6 meta
// channels; 0 when the target has no positive cells.
double density_meta_loss(const grid::DensityMap& pred, const grid::DensityMap& target);

// Weighted sum of the three per-head binary cross-entropies, predictions
// clamped to [1e-7, 1 - 1e-7].
double traffic_loss(const TrafficState& pred, const TrafficState& target, const LossWeights& w);

struct LossParts {
  double pt = 0.0;
  double prob = 0.0;
  double meta = 0.0;
  double tf = 0.0;
};

// w.pt * pt + w.map * (prob + meta) + w.tf * tf
double total_loss(const LossParts& parts, const LossWeights& w);

}  // namespace safedrive::loss

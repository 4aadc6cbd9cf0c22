#include "safedrive/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace safedrive::loss {

namespace {

constexpr double kBceClamp = 1e-7;

void check_same_shape(const grid::DensityMap& pred, const grid::DensityMap& target) {
  if (pred.r != target.r) {
    throw std::invalid_argument("density loss: maps differ in side count");
  }
}

double bce(double pred, double target) {
  const double p = std::clamp(pred, kBceClamp, 1.0 - kBceClamp);
  return -(target * std::log(p) + (1.0 - target) * std::log(1.0 - p));
}

}  // namespace

double waypoint_loss(const WaypointPath& pred, const WaypointPath& target) {
  if (pred.points.size() != target.points.size()) {
    throw std::invalid_argument("waypoint_loss: paths differ in length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.points.size(); ++i) {
    sum += std::abs(pred.points[i].x - target.points[i].x) +
           std::abs(pred.points[i].y - target.points[i].y);
  }
  return sum;
}

double density_prob_loss(const grid::DensityMap& pred, const grid::DensityMap& target) {
  check_same_shape(pred, target);
  double err0 = 0.0;
  double err1 = 0.0;
  long c0 = 0;
  long c1 = 0;
  for (int i = 0; i < target.r; ++i) {
    for (int j = 0; j < target.r; ++j) {
      const double t = target.at(i, j, grid::DensityMap::kProb);
      if (t != 0.0 && t != 1.0) {
        throw std::invalid_argument("density_prob_loss: target prob must be binary");
      }
      const double e = std::abs(t - pred.at(i, j, grid::DensityMap::kProb));
      if (t == 0.0) {
        err0 += e;
        ++c0;
      } else {
        err1 += e;
        ++c1;
      }
    }
  }
  const double l0 = c0 > 0 ? err0 / static_cast<double>(c0) : 0.0;
  const double l1 = c1 > 0 ? err1 / static_cast<double>(c1) : 0.0;
  return 0.5 * (l0 + l1);
}

double density_meta_loss(const grid::DensityMap& pred, const grid::DensityMap& target) {
  check_same_shape(pred, target);
  double err = 0.0;
  long c1 = 0;
  for (int i = 0; i < target.r; ++i) {
    for (int j = 0; j < target.r; ++j) {
      const double t = target.at(i, j, grid::DensityMap::kProb);
      if (t != 0.0 && t != 1.0) {
        throw std::invalid_argument("density_meta_loss: target prob must be binary");
      }
      if (t != 1.0) {
        continue;
      }
      ++c1;
      for (int k = 1; k < grid::DensityMap::kChannels; ++k) {
        err += std::abs(target.at(i, j, k) - pred.at(i, j, k));
      }
    }
  }
  return c1 > 0 ? err / static_cast<double>(c1) : 0.0;
}

double traffic_loss(const TrafficState& pred, const TrafficState& target, const LossWeights& w) {
  return w.light * bce(pred.light_green, target.light_green) +
         w.stop * bce(pred.stop_sign, target.stop_sign) +
         w.junction * bce(pred.at_junction, target.at_junction);
}

double total_loss(const LossParts& parts, const LossWeights& w) {
  return w.pt * parts.pt + w.map * (parts.prob + parts.meta) + w.tf * parts.tf;
}

}  // namespace safedrive::loss

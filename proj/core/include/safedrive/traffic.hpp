#pragma once

namespace safedrive {

// Traffic rule heads: 1 = green / stop sign present / at junction. Predicted
// values live in [0, 1]; ground truth is binary.
struct TrafficState {
  double light_green = 1.0;
  double stop_sign = 0.0;
  double at_junction = 0.0;
};

}  // namespace safedrive

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "safedrive/controller.hpp"
#include "safedrive/metrics.hpp"
#include "safedrive/scenario.hpp"
#include "safedrive/trace.hpp"
#include "safedrive/world.hpp"

namespace safedrive::sim {

inline constexpr const char* kVariantFull = "full";
inline constexpr const char* kVariantNoSafety = "no_safety";

struct EpisodeConfig {
  ctrl::ControllerConfig controller = ctrl::ControllerConfig::with_defaults();
  EgoLimits ego_limits;
  grid::NoiseConfig noise;  // seed field ignored; remixed per tick from the episode seed
  bool use_density_map = true;  // route perception through encode/decode
  std::string variant = kVariantFull;
  PenaltyConfig penalties;
  double physics_dt = 0.05;       // s
  double waypoint_spacing = 2.0;  // m
  int waypoint_count = 10;
  int coverage_r = 20;
  double completion_margin = 0.25;  // m before route end that counts as done

  bool noise_enabled() const {
    return noise.position_sigma > 0.0 || noise.dropout_prob > 0.0 ||
           noise.false_positive_rate > 0.0;
  }
};

struct EpisodeResult {
  Metrics metrics;
  std::string status;  // "completed" or "timeout"
  std::vector<ojson> lines;  // tick records plus the final record
};

// Runs one deterministic episode; identical (scenario, seed, config) always
// produce identical lines.
EpisodeResult run_episode(const Scenario& scenario, std::uint64_t seed,
                          const EpisodeConfig& config);

struct EpisodeJob {
  Scenario scenario;
  std::uint64_t seed = 0;
  EpisodeConfig config;
};

// Runs jobs across parallelism threads (<= 0 means hardware concurrency);
// results are returned in job order regardless of scheduling.
std::vector<EpisodeResult> run_episodes(const std::vector<EpisodeJob>& jobs, int parallelism);

}  // namespace safedrive::sim

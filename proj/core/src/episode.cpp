#include "safedrive/episode.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace safedrive::sim {

namespace {

// Per-tick noise stream decorrelated from the episode seed (splitmix64 mix).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tick) {
  std::uint64_t z = seed + (tick + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

EpisodeResult run_episode(const Scenario& scenario, std::uint64_t seed,
                          const EpisodeConfig& config) {
  const double dt = config.physics_dt;
  const double tick_period = config.controller.safety.tick_period;
  if (!(dt > 0.0) || !(tick_period > 0.0)) {
    throw std::invalid_argument("run_episode: dt and tick period must be positive");
  }
  const auto steps_per_tick = static_cast<long long>(std::llround(tick_period / dt));
  if (steps_per_tick < 1 || std::abs(steps_per_tick * dt - tick_period) > 1e-9) {
    throw std::invalid_argument("run_episode: tick period must be a multiple of physics dt");
  }

  World world(scenario, config.ego_limits);
  InfractionDetector detector(world, blocked_window_for(scenario.duration));
  ctrl::Controller controller(config.controller);
  ctrl::NoSafetyController no_safety(config.controller);
  const bool full = config.variant == kVariantFull;
  if (!full && config.variant != kVariantNoSafety) {
    throw std::invalid_argument("unknown controller variant: " + config.variant);
  }

  EpisodeResult result;
  const auto total_steps = static_cast<long long>(std::llround(scenario.duration / dt));
  std::string status = "timeout";
  std::uint64_t tick_index = 0;

  for (long long k = 0; k < total_steps; ++k) {
    if (k % steps_per_tick == 0) {
      const GroundTruth gt =
          world.extract_ground_truth(config.coverage_r, config.waypoint_spacing,
                                     config.waypoint_count);
      std::vector<grid::DetectedObject> perceived = gt.objects;
      if (config.noise_enabled()) {
        grid::NoiseConfig noise = config.noise;
        noise.seed = mix_seed(seed, tick_index);
        perceived = grid::corrupt_perception(perceived, noise, config.coverage_r);
      }

      const ctrl::EgoState ego_state{world.ego().pose, world.ego().speed,
                                     config.ego_limits.box};
      ctrl::TickDiagnostics diag;
      ctrl::VehicleCommand cmd;
      if (full) {
        if (config.use_density_map) {
          // Class-aware shape augmentation happens before encoding, mirroring
          // how detection targets are built; decoded objects are class-less.
          const auto scene = ctrl::augment_objects(perceived, config.controller.safety);
          const grid::DensityMap map = grid::encode_density_map(scene, config.coverage_r);
          cmd = controller.tick(map, gt.waypoint_deltas, gt.traffic, ego_state, world.time(),
                                &diag);
        } else {
          cmd = controller.tick(perceived, gt.waypoint_deltas, gt.traffic, ego_state,
                                world.time(), &diag);
        }
      } else {
        cmd = no_safety.tick(gt.waypoint_deltas, ego_state, &diag);
      }
      world.apply_command(cmd);
      result.lines.push_back(tick_record(world, gt, perceived, diag, cmd));
      ++tick_index;
    }

    world.step(dt);
    for (const InfractionEvent& ev : detector.step(world, dt)) {
      append_infraction(result.lines.back(), ev);
    }
    if (world.route_progress() >= world.route_length() - config.completion_margin) {
      status = "completed";
      break;
    }
  }

  result.status = status;
  result.metrics =
      compute_metrics(detector.events(), world.route_progress(), world.route_length(),
                      world.odometer(), world.time(), config.penalties);
  result.lines.push_back(final_record(result.metrics, status, scenario.name, seed,
                                      config.variant, config.controller.safety.safety_factor));
  return result;
}

std::vector<EpisodeResult> run_episodes(const std::vector<EpisodeJob>& jobs, int parallelism) {
  std::vector<EpisodeResult> results(jobs.size());
  if (jobs.empty()) return results;
  unsigned n = parallelism > 0 ? static_cast<unsigned>(parallelism)
                               : std::max(1u, std::thread::hardware_concurrency());
  n = std::min<unsigned>(n, static_cast<unsigned>(jobs.size()));

  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(n);
  for (unsigned w = 0; w < n; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
          results[i] = run_episode(jobs[i].scenario, jobs[i].seed, jobs[i].config);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return results;
}

}  // namespace safedrive::sim

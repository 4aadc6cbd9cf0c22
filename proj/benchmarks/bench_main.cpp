#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>
#include <vector>

#include "safedrive/controller.hpp"
#include "safedrive/density_map.hpp"
#include "safedrive/episode.hpp"
#include "safedrive/scenario.hpp"
#include "safedrive/tracking.hpp"

namespace {

using namespace safedrive;

std::vector<grid::DetectedObject> random_objects(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-9.5, 9.5);
  std::uniform_real_distribution<double> uy(0.25, 19.75);
  std::uniform_real_distribution<double> uh(-1.5, 1.5);
  std::uniform_real_distribution<double> us(0.0, 8.0);
  std::vector<grid::DetectedObject> objects;
  objects.reserve(n);
  for (int i = 0; i < n; ++i) {
    grid::DetectedObject o;
    o.position = {ux(rng), uy(rng)};
    o.heading = uh(rng);
    o.speed = us(rng);
    o.box = {1.8, 0.8};
    objects.push_back(o);
  }
  return objects;
}

void BM_DesiredSpeedLp(benchmark::State& state) {
  ctrl::SafetyParams params;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uv(0.0, 7.0);
  std::uniform_real_distribution<double> us1(0.0, 22.0);
  std::uniform_real_distribution<double> us2(0.0, 36.0);
  for (auto _ : state) {
    auto plan = ctrl::desired_speed_lp(uv(rng), us1(rng), us2(rng), params);
    benchmark::DoNotOptimize(plan);
  }
}
BENCHMARK(BM_DesiredSpeedLp);

void BM_EncodeDensityMap(benchmark::State& state) {
  auto objects = random_objects(static_cast<int>(state.range(0)), 11);
  for (auto _ : state) {
    auto map = grid::encode_density_map(objects, 20);
    benchmark::DoNotOptimize(map);
  }
}
BENCHMARK(BM_EncodeDensityMap)->Arg(4)->Arg(16);

void BM_DecodeDensityMap(benchmark::State& state) {
  auto map = grid::encode_density_map(random_objects(static_cast<int>(state.range(0)), 13), 20);
  for (auto _ : state) {
    auto objects = grid::decode_density_map(map, 0.9, 0.5);
    benchmark::DoNotOptimize(objects);
  }
}
BENCHMARK(BM_DecodeDensityMap)->Arg(4)->Arg(16);

void BM_MaxSafeDistance(benchmark::State& state) {
  ctrl::SafetyParams params;
  WaypointPath path;
  for (int i = 0; i <= 10; ++i) path.points.push_back({0.0, 2.0 * i});
  std::vector<track::Forecast> forecasts;
  int id = 0;
  for (const auto& o : random_objects(8, 17)) {
    track::Forecast f;
    f.track_id = id++;
    f.samples.push_back({0.5, o.position, o.heading, o.box});
    f.samples.push_back({1.0, o.position, o.heading, o.box});
    forecasts.push_back(f);
  }
  BoxExtents ego{2.3, 0.95};
  for (auto _ : state) {
    double s = ctrl::max_safe_distance(path, ego, forecasts, 1.0, params);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_MaxSafeDistance);

const char* kBenchScenario = R"({
  "scenario_version": 1,
  "name": "bench",
  "duration": 30,
  "seed": 1,
  "route": [[0, 0], [0, 90]],
  "ego": {"x": 0, "y": 0, "heading": 0, "speed": 0},
  "agents": [
    {"class": "vehicle", "x": 0, "y": 25, "heading": 0, "speed": 4, "box": [2.3, 0.95]},
    {"class": "pedestrian", "x": 5, "y": 40, "heading": -1.5708, "speed": 0,
     "box": [0.25, 0.25],
     "triggers": [{"when": {"ego_distance": 18}, "do": {"speed": 2.0}}]}
  ]
})";

void BM_Episode(benchmark::State& state) {
  auto scenario = sim::parse_scenario(kBenchScenario, "bench");
  sim::EpisodeConfig config;
  for (auto _ : state) {
    auto result = sim::run_episode(scenario, 1, config);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_Episode)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "safedrive/losses.hpp"

namespace safedrive::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string factor_tag(double factor) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", factor);
  return buf;
}

struct Job {
  sim::EpisodeJob episode;
  std::string file_name;
};

std::vector<Job> build_jobs(const CommonOptions& opt, const RunSettings& settings) {
  if (opt.scenario_paths.empty()) {
    throw std::invalid_argument("at least one --scenario is required");
  }
  std::vector<Job> jobs;
  for (const std::string& path : opt.scenario_paths) {
    const sim::Scenario scenario = sim::load_scenario(path);
    std::vector<std::uint64_t> seeds = opt.seeds;
    if (seeds.empty()) seeds.push_back(scenario.seed);
    for (const std::uint64_t seed : seeds) {
      Job job;
      job.episode.scenario = scenario;
      job.episode.seed = seed;
      job.episode.config = settings.episode;
      job.episode.config.variant = opt.variant;
      job.file_name = trace_file_name(scenario.name, seed, opt.variant);
      jobs.push_back(std::move(job));
    }
  }
  return jobs;
}

void write_outputs(const fs::path& out_dir, const std::vector<Job>& jobs,
                   const std::vector<sim::EpisodeResult>& results) {
  fs::create_directories(out_dir);
  std::ofstream csv(out_dir / "summary.csv", std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write " + (out_dir / "summary.csv").string());
  csv << summary_csv_header() << '\n';
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    sim::write_jsonl(out_dir / jobs[i].file_name, results[i].lines);
    csv << summary_csv_row(sim::final_of(results[i].lines)) << '\n';
  }
}

struct Aggregate {
  int episodes = 0;
  double rc_sum = 0.0;
  double is_sum = 0.0;
  double ds_sum = 0.0;
  std::array<long, sim::kInfractionTypeCount> counts{};

  void add(const json& final_rec) {
    ++episodes;
    rc_sum += final_rec["route_completion"].get<double>();
    is_sum += final_rec["infraction_score"].get<double>();
    ds_sum += final_rec["driving_score"].get<double>();
    for (int i = 0; i < sim::kInfractionTypeCount; ++i) {
      const char* name = sim::to_string(static_cast<sim::InfractionType>(i));
      counts[static_cast<std::size_t>(i)] += final_rec["counts"][name].get<long>();
    }
  }

  long total_infractions() const {
    long total = 0;
    for (const long c : counts) total += c;
    return total;
  }
};

}  // namespace

std::string trace_file_name(const std::string& scenario_name, std::uint64_t seed,
                            const std::string& variant) {
  return scenario_name + "_seed" + std::to_string(seed) + "_" + variant + ".jsonl";
}

std::string summary_csv_header() {
  std::string header =
      "scenario,seed,variant,safety_factor,status,route_completion,infraction_score,"
      "driving_score,driven_m,duration_s";
  for (int i = 0; i < sim::kInfractionTypeCount; ++i) {
    header += std::string(",") + sim::to_string(static_cast<sim::InfractionType>(i));
  }
  for (int i = 0; i < sim::kInfractionTypeCount; ++i) {
    header += std::string(",per_km_") + sim::to_string(static_cast<sim::InfractionType>(i));
  }
  return header;
}

std::string summary_csv_row(const sim::ojson& f) {
  std::ostringstream row;
  row << f["scenario"].get<std::string>() << ',' << f["seed"].get<std::uint64_t>() << ','
      << f["variant"].get<std::string>() << ',' << fmt(f["safety_factor"].get<double>()) << ','
      << f["status"].get<std::string>() << ',' << fmt(f["route_completion"].get<double>()) << ','
      << fmt(f["infraction_score"].get<double>()) << ','
      << fmt(f["driving_score"].get<double>()) << ',' << fmt(f["driven_m"].get<double>()) << ','
      << fmt(f["duration_s"].get<double>());
  for (int i = 0; i < sim::kInfractionTypeCount; ++i) {
    const char* name = sim::to_string(static_cast<sim::InfractionType>(i));
    row << ',' << f["counts"][name].get<long>();
  }
  for (int i = 0; i < sim::kInfractionTypeCount; ++i) {
    const char* name = sim::to_string(static_cast<sim::InfractionType>(i));
    row << ',' << fmt(f["per_km"][name].get<double>());
  }
  return row.str();
}

int cmd_run(const CommonOptions& opt) {
  const RunSettings settings = settings_from_config(merged_config(opt.config_path, opt.overrides));
  const std::vector<Job> jobs = build_jobs(opt, settings);

  std::vector<sim::EpisodeJob> episode_jobs;
  episode_jobs.reserve(jobs.size());
  for (const Job& j : jobs) episode_jobs.push_back(j.episode);
  const auto results = sim::run_episodes(episode_jobs, opt.jobs);

  write_outputs(opt.out_dir, jobs, results);

  Aggregate agg;
  for (const auto& r : results) agg.add(sim::final_of(r.lines));
  std::cout << "episodes: " << agg.episodes << "  mean RC: " << fmt(agg.rc_sum / agg.episodes)
            << "  mean IS: " << fmt(agg.is_sum / agg.episodes)
            << "  mean DS: " << fmt(agg.ds_sum / agg.episodes)
            << "  infractions: " << agg.total_infractions() << '\n';
  std::cout << "wrote " << jobs.size() << " trace(s) and summary.csv under " << opt.out_dir
            << '\n';
  return 0;
}

int cmd_sweep(const SweepOptions& opt) {
  if (opt.factors.empty()) throw std::invalid_argument("at least one --factor is required");
  for (const double f : opt.factors) {
    if (!(f > 0.0)) throw std::invalid_argument("safety factors must be positive");
  }

  const fs::path out_dir = opt.common.out_dir;
  fs::create_directories(out_dir);
  std::ofstream sweep_csv(out_dir / "sweep.csv", std::ios::binary);
  if (!sweep_csv) throw std::runtime_error("cannot write " + (out_dir / "sweep.csv").string());
  sweep_csv << "safety_factor,episodes,mean_route_completion,mean_infraction_score,"
               "mean_driving_score,total_infractions";
  for (int i = 0; i < sim::kInfractionTypeCount; ++i) {
    sweep_csv << ',' << sim::to_string(static_cast<sim::InfractionType>(i));
  }
  sweep_csv << '\n';

  for (const double factor : opt.factors) {
    RunSettings settings =
        settings_from_config(merged_config(opt.common.config_path, opt.common.overrides));
    settings.episode.controller.safety.safety_factor = factor;

    CommonOptions per_factor = opt.common;
    per_factor.variant = sim::kVariantFull;
    const std::vector<Job> jobs = build_jobs(per_factor, settings);
    std::vector<sim::EpisodeJob> episode_jobs;
    episode_jobs.reserve(jobs.size());
    for (const Job& j : jobs) episode_jobs.push_back(j.episode);
    const auto results = sim::run_episodes(episode_jobs, opt.common.jobs);

    write_outputs(out_dir / ("f" + factor_tag(factor)), jobs, results);

    Aggregate agg;
    for (const auto& r : results) agg.add(sim::final_of(r.lines));
    sweep_csv << factor_tag(factor) << ',' << agg.episodes << ','
              << fmt(agg.rc_sum / agg.episodes) << ',' << fmt(agg.is_sum / agg.episodes) << ','
              << fmt(agg.ds_sum / agg.episodes) << ',' << agg.total_infractions();
    for (const long c : agg.counts) sweep_csv << ',' << c;
    sweep_csv << '\n';
    std::cout << "factor " << factor_tag(factor) << ": mean DS "
              << fmt(agg.ds_sum / agg.episodes) << ", infractions " << agg.total_infractions()
              << '\n';
  }
  std::cout << "wrote sweep.csv under " << opt.common.out_dir << '\n';
  return 0;
}

int cmd_report(const std::vector<std::string>& trace_paths) {
  std::vector<fs::path> files;
  for (const std::string& p : trace_paths) {
    if (fs::is_directory(p)) {
      for (const auto& entry : fs::directory_iterator(p)) {
        if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
      }
    } else {
      files.push_back(p);
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::invalid_argument("no trace files given");

  std::printf("%-28s %6s %-10s %8s %8s %8s  per-km: static ped veh red blocked\n", "scenario",
              "seed", "variant", "DS", "RC", "IS");
  std::vector<double> ds_all, rc_all, is_all;
  for (const fs::path& file : files) {
    const json f = sim::final_of(sim::read_jsonl(file));
    const double ds = f["driving_score"].get<double>();
    const double rc = f["route_completion"].get<double>();
    const double is = f["infraction_score"].get<double>();
    ds_all.push_back(ds);
    rc_all.push_back(rc);
    is_all.push_back(is);
    std::printf("%-28s %6llu %-10s %8.2f %8.2f %8.3f          %.2f %.2f %.2f %.2f %.2f\n",
                f["scenario"].get<std::string>().c_str(),
                static_cast<unsigned long long>(f["seed"].get<std::uint64_t>()),
                f["variant"].get<std::string>().c_str(), ds, rc, is,
                f["per_km"]["collision_static"].get<double>(),
                f["per_km"]["collision_pedestrian"].get<double>(),
                f["per_km"]["collision_vehicle"].get<double>(),
                f["per_km"]["red_light"].get<double>(),
                f["per_km"]["agent_blocked"].get<double>());
  }

  const auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (const double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const auto stddev = [&](const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (const double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
  };
  std::printf("episodes: %zu  DS %.2f±%.2f  RC %.2f±%.2f  IS %.3f±%.3f\n", files.size(),
              mean(ds_all), stddev(ds_all), mean(rc_all), stddev(rc_all), mean(is_all),
              stddev(is_all));
  return 0;
}

namespace {

WaypointPath waypoints_from_json(const json& node) {
  WaypointPath path;
  for (const json& p : node) {
    path.points.push_back(Vec2{p[0].get<double>(), p[1].get<double>()});
  }
  return path;
}

TrafficState traffic_from_json(const json& node) {
  TrafficState t;
  t.light_green = node[0].get<double>();
  t.stop_sign = node[1].get<double>();
  t.at_junction = node[2].get<double>();
  return t;
}

}  // namespace

int cmd_eval_losses(const std::string& records_path, const std::string& out_path,
                    const std::string& config_path, const std::vector<std::string>& overrides) {
  const RunSettings settings = settings_from_config(merged_config(config_path, overrides));
  const loss::LossWeights& w = settings.loss_weights;

  std::ifstream in(records_path);
  if (!in) throw std::runtime_error("cannot read records file: " + records_path);

  std::ostream* out = &std::cout;
  std::ofstream out_file;
  if (!out_path.empty()) {
    out_file.open(out_path, std::ios::binary);
    if (!out_file) throw std::runtime_error("cannot write " + out_path);
    out = &out_file;
  }
  *out << "index,waypoint,prob,meta,traffic,total\n";

  std::string line;
  std::size_t index = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error("record " + std::to_string(index) + ": " + e.what());
    }
    const json& pred = rec.at("pred");
    const json& target = rec.at("target");

    loss::LossParts parts;
    parts.pt = loss::waypoint_loss(waypoints_from_json(pred.at("waypoints")),
                                   waypoints_from_json(target.at("waypoints")));
    const grid::DensityMap pred_map =
        grid::density_map_from_record(pred.at("map").get<std::string>());
    const grid::DensityMap target_map =
        grid::density_map_from_record(target.at("map").get<std::string>());
    parts.prob = loss::density_prob_loss(pred_map, target_map);
    parts.meta = loss::density_meta_loss(pred_map, target_map);
    parts.tf = loss::traffic_loss(traffic_from_json(pred.at("traffic")),
                                  traffic_from_json(target.at("traffic")), w);

    *out << index << ',' << fmt(parts.pt) << ',' << fmt(parts.prob) << ',' << fmt(parts.meta)
         << ',' << fmt(parts.tf) << ',' << fmt(loss::total_loss(parts, w)) << '\n';
    ++index;
  }
  return 0;
}

}  // namespace safedrive::cli

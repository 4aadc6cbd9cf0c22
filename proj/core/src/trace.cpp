#include "safedrive/trace.hpp"

#include <fstream>

namespace safedrive::sim {

namespace {

ojson object_json(const grid::DetectedObject& obj) {
  ojson j;
  j["class"] = grid::to_string(obj.cls);
  j["x"] = obj.position.x;
  j["y"] = obj.position.y;
  j["heading"] = obj.heading;
  j["speed"] = obj.speed;
  j["box"] = {obj.box.half_length, obj.box.half_width};
  j["confidence"] = obj.confidence;
  return j;
}

}  // namespace

ojson tick_record(const World& world, const GroundTruth& gt,
                  const std::vector<grid::DetectedObject>& perceived,
                  const ctrl::TickDiagnostics& diag, const ctrl::VehicleCommand& cmd) {
  ojson j;
  j["t"] = world.time();
  const EgoKin& ego = world.ego();
  j["ego"] = {{"x", ego.pose.x},
              {"y", ego.pose.y},
              {"heading", ego.pose.heading},
              {"speed", ego.speed}};
  j["progress"] = world.route_progress();

  ojson agents = ojson::array();
  for (const AgentState& a : world.agents()) {
    ojson aj;
    aj["class"] = grid::to_string(a.cls);
    aj["x"] = a.pose.x;
    aj["y"] = a.pose.y;
    aj["heading"] = a.pose.heading;
    aj["speed"] = a.speed;
    aj["box"] = {a.box.half_length, a.box.half_width};
    agents.push_back(std::move(aj));
  }
  j["agents"] = std::move(agents);

  j["traffic"] = {{"light_green", gt.traffic.light_green},
                  {"stop_sign", gt.traffic.stop_sign},
                  {"at_junction", gt.traffic.at_junction}};

  ojson objects = ojson::array();
  for (const grid::DetectedObject& obj : perceived) objects.push_back(object_json(obj));
  j["objects"] = std::move(objects);

  ojson forecasts = ojson::array();
  for (const track::Forecast& fc : diag.forecasts) {
    ojson fj;
    fj["id"] = fc.track_id;
    ojson samples = ojson::array();
    for (const track::ForecastSample& s : fc.samples) {
      samples.push_back({{"dt", s.time_offset},
                         {"x", s.position.x},
                         {"y", s.position.y},
                         {"heading", s.heading}});
    }
    fj["samples"] = std::move(samples);
    forecasts.push_back(std::move(fj));
  }

  j["diag"] = {{"s1", diag.s1},
               {"s2", diag.s2},
               {"v_d1", diag.plan.v_d1},
               {"v_d2", diag.plan.v_d2},
               {"feasible", diag.plan.feasible},
               {"binding", ctrl::to_string(diag.plan.binding)},
               {"psi_d", diag.psi_d},
               {"emergency_stop", diag.emergency_stop},
               {"forecasts", std::move(forecasts)}};

  j["cmd"] = {{"steer", cmd.steer}, {"throttle", cmd.throttle}, {"brake", cmd.brake}};
  j["infractions"] = ojson::array();
  return j;
}

void append_infraction(ojson& tick, const InfractionEvent& event) {
  tick["infractions"].push_back(
      {{"type", to_string(event.type)}, {"time", event.time}, {"agent", event.agent_index}});
}

ojson final_record(const Metrics& metrics, const std::string& status,
                   const std::string& scenario_name, std::uint64_t seed,
                   const std::string& variant, double safety_factor) {
  ojson m;
  m["scenario"] = scenario_name;
  m["seed"] = seed;
  m["variant"] = variant;
  m["safety_factor"] = safety_factor;
  m["status"] = status;
  m["route_completion"] = metrics.route_completion;
  m["infraction_score"] = metrics.infraction_score;
  m["driving_score"] = metrics.driving_score;
  ojson counts;
  ojson per_km;
  for (int i = 0; i < kInfractionTypeCount; ++i) {
    const char* name = to_string(static_cast<InfractionType>(i));
    counts[name] = metrics.counts[static_cast<std::size_t>(i)];
    per_km[name] = metrics.per_km[static_cast<std::size_t>(i)];
  }
  m["counts"] = std::move(counts);
  m["per_km"] = std::move(per_km);
  m["driven_m"] = metrics.driven_m;
  m["duration_s"] = metrics.duration_s;

  ojson j;
  j["final"] = std::move(m);
  return j;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<ojson>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write trace file: " + path.string());
  for (const ojson& line : lines) {
    out << line.dump() << '\n';
  }
}

std::vector<ojson> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read trace file: " + path.string());
  std::vector<ojson> lines;
  std::string line;
  std::size_t index = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      lines.push_back(ojson::parse(line));
    } catch (const ojson::parse_error& e) {
      throw std::runtime_error("corrupt trace " + path.string() + " at tick " +
                               std::to_string(index) + ": " + e.what());
    }
    ++index;
  }
  return lines;
}

ojson final_of(const std::vector<ojson>& lines) {
  if (lines.empty() || !lines.back().contains("final")) {
    throw std::runtime_error("trace has no final record");
  }
  return lines.back()["final"];
}

}  // namespace safedrive::sim

#include "config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>

namespace safedrive::cli {

using json = nlohmann::ordered_json;

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw std::invalid_argument("--set expects key=value, got '" + assignment + "'");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;  // bare strings are fine
  }

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) throw std::invalid_argument("empty key segment in '" + key + "'");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

json merged_config(const std::string& config_path, const std::vector<std::string>& overrides) {
  json doc = json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot read config file: " + config_path);
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw std::runtime_error("config file " + config_path + ": " + e.what());
    }
    if (!doc.is_object()) throw std::runtime_error("config file must hold a JSON object");
  }
  for (const std::string& assignment : overrides) {
    apply_override(doc, assignment);
  }
  return doc;
}

namespace {

class Binder {
 public:
  void number(const std::string& key, double* target) {
    setters_[key] = [target](const json& v) { *target = v.get<double>(); };
  }
  void integer(const std::string& key, int* target) {
    setters_[key] = [target](const json& v) { *target = v.get<int>(); };
  }
  void boolean(const std::string& key, bool* target) {
    setters_[key] = [target](const json& v) { *target = v.get<bool>(); };
  }

  void apply(const json& doc) const {
    std::vector<std::pair<std::string, const json*>> leaves;
    collect(doc, "", leaves);
    for (const auto& [key, value] : leaves) {
      const auto it = setters_.find(key);
      if (it == setters_.end()) {
        throw std::invalid_argument("unknown config key: " + key);
      }
      try {
        it->second(*value);
      } catch (const json::exception&) {
        throw std::invalid_argument("config key " + key + " has the wrong type");
      }
    }
  }

 private:
  static void collect(const json& node, const std::string& prefix,
                      std::vector<std::pair<std::string, const json*>>& out) {
    for (const auto& [key, value] : node.items()) {
      const std::string path = prefix.empty() ? key : prefix + "." + key;
      if (value.is_object()) {
        collect(value, path, out);
      } else {
        out.emplace_back(path, &value);
      }
    }
  }

  std::map<std::string, std::function<void(const json&)>> setters_;
};

}  // namespace

RunSettings settings_from_config(const json& doc) {
  RunSettings s;
  auto& ep = s.episode;
  auto& ctl = ep.controller;

  Binder b;
  b.number("safety.tick_period", &ctl.safety.tick_period);
  b.number("safety.a_max", &ctl.safety.a_max);
  b.number("safety.v_max", &ctl.safety.v_max);
  b.number("safety.s_bar", &ctl.safety.s_bar);
  b.number("safety.ped_bike_scale", &ctl.safety.ped_bike_scale);
  b.number("safety.safety_factor", &ctl.safety.safety_factor);
  b.number("safety.collision_sample_step", &ctl.safety.collision_sample_step);

  b.number("controller.threshold1", &ctl.threshold1);
  b.number("controller.threshold2", &ctl.threshold2);
  b.number("controller.integral_clamp", &ctl.integral_clamp);
  b.number("controller.lateral.kp", &ctl.lateral.kp);
  b.number("controller.lateral.ki", &ctl.lateral.ki);
  b.number("controller.lateral.kd", &ctl.lateral.kd);
  b.number("controller.longitudinal.kp", &ctl.longitudinal.kp);
  b.number("controller.longitudinal.ki", &ctl.longitudinal.ki);
  b.number("controller.longitudinal.kd", &ctl.longitudinal.kd);

  b.number("tracker.gate", &ctl.tracker.gate);
  b.integer("tracker.max_misses", &ctl.tracker.max_misses);
  b.integer("tracker.window", &ctl.tracker.window);

  b.number("noise.position_sigma", &ep.noise.position_sigma);
  b.number("noise.dropout_prob", &ep.noise.dropout_prob);
  b.number("noise.false_positive_rate", &ep.noise.false_positive_rate);

  b.number("episode.physics_dt", &ep.physics_dt);
  b.number("episode.waypoint_spacing", &ep.waypoint_spacing);
  b.integer("episode.waypoint_count", &ep.waypoint_count);
  b.integer("episode.coverage_r", &ep.coverage_r);
  b.boolean("episode.use_density_map", &ep.use_density_map);
  b.number("episode.completion_margin", &ep.completion_margin);

  b.number("ego.wheelbase", &ep.ego_limits.wheelbase);
  b.number("ego.a_acc_max", &ep.ego_limits.a_acc_max);
  b.number("ego.a_brk_max", &ep.ego_limits.a_brk_max);
  b.number("ego.delta_max", &ep.ego_limits.delta_max);
  b.number("ego.v_phys_max", &ep.ego_limits.v_phys_max);
  b.number("ego.drag", &ep.ego_limits.drag);
  b.number("ego.box_half_length", &ep.ego_limits.box.half_length);
  b.number("ego.box_half_width", &ep.ego_limits.box.half_width);

  b.number("penalties.collision_pedestrian", &ep.penalties.collision_pedestrian);
  b.number("penalties.collision_vehicle", &ep.penalties.collision_vehicle);
  b.number("penalties.collision_static", &ep.penalties.collision_static);
  b.number("penalties.red_light", &ep.penalties.red_light);
  b.number("penalties.stop_sign", &ep.penalties.stop_sign);
  b.number("penalties.agent_blocked", &ep.penalties.agent_blocked);

  b.number("loss_weights.pt", &s.loss_weights.pt);
  b.number("loss_weights.map", &s.loss_weights.map);
  b.number("loss_weights.tf", &s.loss_weights.tf);
  b.number("loss_weights.light", &s.loss_weights.light);
  b.number("loss_weights.stop", &s.loss_weights.stop);
  b.number("loss_weights.junction", &s.loss_weights.junction);

  b.apply(doc);

  // Unless pinned explicitly, the association gate follows the configured
  // speed range.
  if (!(doc.contains("tracker") && doc["tracker"].contains("gate"))) {
    ctl.tracker.gate = track::association_gate(ctl.safety.v_max, ctl.safety.tick_period);
  }
  return s;
}

}  // namespace safedrive::cli

#include "safedrive/scenario.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace safedrive::sim {

using json = nlohmann::ordered_json;

TrafficState TrafficScript::state_at(double t) const {
  TrafficState state;
  for (const auto& iv : red_lights) {
    if (iv.contains(t)) state.light_green = 0.0;
  }
  for (const auto& iv : stop_signs) {
    if (iv.contains(t)) state.stop_sign = 1.0;
  }
  for (const auto& iv : junctions) {
    if (iv.contains(t)) state.at_junction = 1.0;
  }
  return state;
}

namespace {

int line_of_byte(const std::string& text, std::size_t byte) {
  int line = 1;
  const std::size_t end = std::min(byte, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

// Best-effort location of a schema problem: the first line mentioning the key.
int line_of_key(const std::string& text, const std::string& key) {
  const std::size_t pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return 0;
  return line_of_byte(text, pos);
}

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::string& message, const std::string& key) const {
    throw ScenarioError(message, line_of_key(text_, key));
  }

  const json& require(const json& node, const std::string& key) const {
    const auto it = node.find(key);
    if (it == node.end()) fail("missing required field '" + key + "'", key);
    return *it;
  }

  double number(const json& node, const std::string& key) const {
    const json& v = require(node, key);
    if (!v.is_number()) fail("field '" + key + "' must be a number", key);
    return v.get<double>();
  }

  double number_or(const json& node, const std::string& key, double fallback) const {
    const auto it = node.find(key);
    if (it == node.end()) return fallback;
    if (!it->is_number()) fail("field '" + key + "' must be a number", key);
    return it->get<double>();
  }

  Vec2 point(const json& v, const std::string& key) const {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      fail("'" + key + "' entries must be [x, y] pairs", key);
    }
    return Vec2{v[0].get<double>(), v[1].get<double>()};
  }

  std::vector<Interval> intervals(const json& node, const std::string& key) const {
    std::vector<Interval> out;
    const auto it = node.find(key);
    if (it == node.end()) return out;
    if (!it->is_array()) fail("field '" + key + "' must be a list", key);
    for (const json& iv : *it) {
      Interval interval{number(iv, "from"), number(iv, "to")};
      if (interval.to < interval.from) fail("interval 'to' precedes 'from'", key);
      out.push_back(interval);
    }
    return out;
  }

 private:
  const std::string& text_;
};

TriggerAction parse_action(const Parser& p, const json& node) {
  TriggerAction action;
  if (node.contains("accel")) action.accel = p.number(node, "accel");
  if (node.contains("speed")) action.speed = p.number(node, "speed");
  if (node.contains("heading")) action.heading = p.number(node, "heading");
  if (node.contains("stop")) {
    if (!node["stop"].is_boolean()) p.fail("'stop' must be a boolean", "stop");
    action.stop = node["stop"].get<bool>();
  }
  if (!action.accel && !action.speed && !action.heading && !action.stop) {
    p.fail("trigger action sets nothing", "do");
  }
  return action;
}

Trigger parse_trigger(const Parser& p, const json& node) {
  Trigger trig;
  const json& when = p.require(node, "when");
  if (when.contains("time")) {
    trig.kind = Trigger::Kind::kTime;
    trig.value = p.number(when, "time");
  } else if (when.contains("ego_distance")) {
    trig.kind = Trigger::Kind::kEgoDistance;
    trig.value = p.number(when, "ego_distance");
  } else {
    p.fail("trigger 'when' needs 'time' or 'ego_distance'", "when");
  }
  trig.action = parse_action(p, p.require(node, "do"));
  return trig;
}

AgentSpec parse_agent(const Parser& p, const json& node) {
  AgentSpec agent;
  const json& cls = p.require(node, "class");
  if (!cls.is_string()) p.fail("agent 'class' must be a string", "class");
  try {
    agent.cls = grid::object_class_from_string(cls.get<std::string>());
  } catch (const std::invalid_argument&) {
    p.fail("unknown agent class '" + cls.get<std::string>() + "'", "class");
  }
  agent.pose = Pose2{p.number(node, "x"), p.number(node, "y"), p.number_or(node, "heading", 0.0)};
  agent.speed = p.number_or(node, "speed", 0.0);
  agent.accel = p.number_or(node, "accel", 0.0);
  if (node.contains("box")) {
    const Vec2 b = p.point(node["box"], "box");
    agent.box = BoxExtents{b.x, b.y};
  }
  if (node.contains("triggers")) {
    if (!node["triggers"].is_array()) p.fail("'triggers' must be a list", "triggers");
    for (const json& t : node["triggers"]) agent.triggers.push_back(parse_trigger(p, t));
  }
  return agent;
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& fallback_name) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("scenario is not valid JSON: ") + e.what(),
                        line_of_byte(text, e.byte));
  }
  Parser p(text);
  if (!doc.is_object()) throw ScenarioError("scenario document must be an object", 1);

  const json& version = p.require(doc, "scenario_version");
  if (!version.is_number_integer() || version.get<int>() != 1) {
    p.fail("unsupported scenario_version (expected 1)", "scenario_version");
  }

  Scenario sc;
  sc.name = doc.contains("name") && doc["name"].is_string() ? doc["name"].get<std::string>()
                                                            : fallback_name;
  sc.duration = p.number(doc, "duration");
  if (!(sc.duration > 0.0)) p.fail("'duration' must be positive", "duration");
  sc.seed = doc.contains("seed") ? p.require(doc, "seed").get<std::uint64_t>() : 0;

  const json& route = p.require(doc, "route");
  if (!route.is_array() || route.size() < 2) {
    p.fail("'route' needs at least 2 points", "route");
  }
  for (const json& pt : route) sc.route.points.push_back(p.point(pt, "route"));

  const json& ego = p.require(doc, "ego");
  sc.ego_start = Pose2{p.number(ego, "x"), p.number(ego, "y"), p.number_or(ego, "heading", 0.0)};
  sc.ego_speed = p.number_or(ego, "speed", 0.0);

  if (doc.contains("agents")) {
    if (!doc["agents"].is_array()) p.fail("'agents' must be a list", "agents");
    for (const json& a : doc["agents"]) sc.agents.push_back(parse_agent(p, a));
  }

  if (doc.contains("traffic_rules")) {
    const json& rules = doc["traffic_rules"];
    if (!rules.is_object()) p.fail("'traffic_rules' must be an object", "traffic_rules");
    sc.rules.red_lights = p.intervals(rules, "red_lights");
    sc.rules.stop_signs = p.intervals(rules, "stop_signs");
    sc.rules.junctions = p.intervals(rules, "junctions");
    sc.rules.stop_line_s = p.number_or(rules, "stop_line_s", -1.0);
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read scenario file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.stem().string());
}

}  // namespace safedrive::sim

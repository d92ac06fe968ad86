#include "swarmguide/scenario.hpp"

#include <cmath>
#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "swarmguide/errors.hpp"

namespace swarmguide {

using nlohmann::json;

void Scenario::select_layout(const std::string& name) {
  auto it = layouts.find(name);
  if (it == layouts.end()) throw ScenarioError({"unknown obstacle layout '" + name + "'"});
  layout = name;
  obstacles = it->second;
}

std::optional<std::filesystem::path> Scenario::hand_trace_path() const {
  if (!hand_trace) return std::nullopt;
  std::filesystem::path p(*hand_trace);
  return p.is_absolute() ? p : base_dir / p;
}

namespace {

// Reads fields while accumulating violations instead of stopping at the first.
class Reader {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& what) { errors.push_back(path + ": " + what); }

  const json* object(const json& parent, const std::string& key, const std::string& path, bool required) {
    if (!parent.is_object() || !parent.contains(key)) {
      if (required) fail(path + key, "missing");
      return nullptr;
    }
    const json& v = parent.at(key);
    if (!v.is_object()) {
      fail(path + key, "must be an object");
      return nullptr;
    }
    return &v;
  }

  const json* array(const json& parent, const std::string& key, const std::string& path, bool required) {
    if (!parent.is_object() || !parent.contains(key)) {
      if (required) fail(path + key, "missing");
      return nullptr;
    }
    const json& v = parent.at(key);
    if (!v.is_array()) {
      fail(path + key, "must be an array");
      return nullptr;
    }
    return &v;
  }

  double number(const json& parent, const std::string& key, const std::string& path, std::optional<double> fallback) {
    if (!parent.is_object() || !parent.contains(key)) {
      if (!fallback) fail(path + key, "missing");
      return fallback.value_or(0.0);
    }
    const json& v = parent.at(key);
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      fail(path + key, "must be a finite number");
      return fallback.value_or(0.0);
    }
    return v.get<double>();
  }

  int integer(const json& parent, const std::string& key, const std::string& path, std::optional<int> fallback) {
    if (!parent.is_object() || !parent.contains(key)) {
      if (!fallback) fail(path + key, "missing");
      return fallback.value_or(0);
    }
    const json& v = parent.at(key);
    if (!v.is_number_integer()) {
      fail(path + key, "must be an integer");
      return fallback.value_or(0);
    }
    return v.get<int>();
  }

  bool boolean(const json& parent, const std::string& key, const std::string& path, bool fallback) {
    if (!parent.is_object() || !parent.contains(key)) return fallback;
    const json& v = parent.at(key);
    if (!v.is_boolean()) {
      fail(path + key, "must be a boolean");
      return fallback;
    }
    return v.get<bool>();
  }

  std::optional<std::string> string(const json& parent, const std::string& key, const std::string& path,
                                    bool required) {
    if (!parent.is_object() || !parent.contains(key)) {
      if (required) fail(path + key, "missing");
      return std::nullopt;
    }
    const json& v = parent.at(key);
    if (!v.is_string()) {
      fail(path + key, "must be a string");
      return std::nullopt;
    }
    return v.get<std::string>();
  }

  template <std::size_t N>
  std::array<double, N> vector(const json& parent, const std::string& key, const std::string& path,
                               std::optional<std::array<double, N>> fallback) {
    if (!parent.is_object() || !parent.contains(key)) {
      if (!fallback) fail(path + key, "missing");
      return fallback.value_or(std::array<double, N>{});
    }
    const json& v = parent.at(key);
    std::array<double, N> out{};
    if (!v.is_array() || v.size() != N) {
      fail(path + key, "must be an array of " + std::to_string(N) + " numbers");
      return fallback.value_or(out);
    }
    for (std::size_t i = 0; i < N; ++i) {
      if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
        fail(path + key, "must be an array of " + std::to_string(N) + " numbers");
        return fallback.value_or(std::array<double, N>{});
      }
      out[i] = v[i].get<double>();
    }
    return out;
  }

  Vec3 vec3(const json& parent, const std::string& key, const std::string& path, std::optional<Vec3> fallback) {
    std::optional<std::array<double, 3>> fb;
    if (fallback) fb = std::array<double, 3>{fallback->x, fallback->y, fallback->z};
    const auto a = vector<3>(parent, key, path, fb);
    return {a[0], a[1], a[2]};
  }

  Vec2 vec2(const json& parent, const std::string& key, const std::string& path) {
    const auto a = vector<2>(parent, key, path, std::nullopt);
    return {a[0], a[1]};
  }
};

constexpr double kDefaultMass = 1.9;
constexpr double kDefaultDamping = 12.6;
constexpr double kDefaultStiffness = 21.0;
constexpr double kDefaultInfluenceMargin = 0.5;

int parse_axis(Reader& r, const json& parent, const std::string& path) {
  const auto name = r.string(parent, "away_axis", path, false).value_or("x");
  if (name == "x") return 0;
  if (name == "y") return 1;
  if (name == "z") return 2;
  r.fail(path + "away_axis", "must be one of x, y, z");
  return 0;
}

const char* axis_name(int axis) { return axis == 0 ? "x" : (axis == 1 ? "y" : "z"); }

std::vector<Obstacle> parse_obstacles(Reader& r, const json& list, const std::string& path) {
  std::vector<Obstacle> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "].";
    const json& o = list[i];
    Obstacle ob;
    ob.id = r.string(o, "id", p, false).value_or("obstacle" + std::to_string(i));
    ob.center = r.vec2(o, "center", p);
    ob.radius = r.number(o, "radius", p, std::nullopt);
    ob.influence = r.number(o, "influence", p, ob.radius + kDefaultInfluenceMargin);
    if (!(ob.radius > 0.0)) r.fail(p + "radius", "must be > 0");
    if (!(ob.influence > ob.radius)) {
      r.fail(p + "influence", "d0 (" + std::to_string(ob.influence) + ") must exceed r (" +
                                  std::to_string(ob.radius) + ")");
    }
    out.push_back(std::move(ob));
  }
  return out;
}

void parse_formation(Reader& r, const json& f, Scenario& s) {
  const std::string path = "formation.";
  FormationSpec& spec = s.formation;
  spec.velocity_gain = r.number(f, "velocity_gain", path, -7.0);
  spec.away_axis = parse_axis(r, f, path);

  const json* drones = r.array(f, "drones", path, true);
  if (drones) {
    // First pass: ids, so anchors and links may reference any drone.
    for (std::size_t i = 0; i < drones->size(); ++i) {
      DroneRule rule;
      rule.id = r.integer((*drones)[i], "id", path + "drones[" + std::to_string(i) + "].", std::nullopt);
      spec.drones.push_back(rule);
    }
    for (std::size_t i = 0; i < drones->size(); ++i) {
      const std::string p = path + "drones[" + std::to_string(i) + "].";
      const json& d = (*drones)[i];
      auto& rule = spec.drones[i];
      rule.offset = r.vec3(d, "offset", p, std::nullopt);
      const json* anchor = r.object(d, "anchor", p, true);
      if (!anchor) continue;
      const auto type = r.string(*anchor, "type", p + "anchor.", true).value_or("hand");
      auto resolve = [&](int id, const std::string& where) {
        const int idx = spec.index_of(id);
        if (idx < 0) r.fail(where, "references unknown drone id " + std::to_string(id));
        return idx;
      };
      if (type == "hand") {
        rule.anchor = {AnchorKind::Hand, -1, -1};
      } else if (type == "drone") {
        const int id = r.integer(*anchor, "drone", p + "anchor.", std::nullopt);
        rule.anchor = {AnchorKind::Drone, resolve(id, p + "anchor.drone"), -1};
      } else if (type == "midpoint") {
        const json* pair = r.array(*anchor, "drones", p + "anchor.", true);
        if (pair && pair->size() == 2 && (*pair)[0].is_number_integer() && (*pair)[1].is_number_integer()) {
          rule.anchor = {AnchorKind::Midpoint, resolve((*pair)[0].get<int>(), p + "anchor.drones"),
                         resolve((*pair)[1].get<int>(), p + "anchor.drones")};
        } else if (pair) {
          r.fail(p + "anchor.drones", "must list exactly two drone ids");
        }
      } else {
        r.fail(p + "anchor.type", "must be one of hand, drone, midpoint");
      }
    }
  }

  const json* links = r.array(f, "links", path, true);
  if (links) {
    for (std::size_t i = 0; i < links->size(); ++i) {
      const std::string p = path + "links[" + std::to_string(i) + "].";
      const json& l = (*links)[i];
      LinkSpec link;
      if (l.is_object() && l.contains("source") && l.at("source").is_string() && l.at("source") == "hand") {
        link.source = kHandNode;
      } else if (l.is_object() && l.contains("source") && l.at("source").is_number_integer()) {
        link.source = spec.index_of(l.at("source").get<int>());
        if (link.source < 0) r.fail(p + "source", "references unknown drone id");
      } else {
        r.fail(p + "source", "must be \"hand\" or a drone id");
      }
      const int target = r.integer(l, "target", p, std::nullopt);
      link.target = spec.index_of(target);
      if (link.target < 0) r.fail(p + "target", "references unknown drone id " + std::to_string(target));

      double m = kDefaultMass, d = kDefaultDamping, k = kDefaultStiffness;
      if (const json* imp = r.object(l, "impedance", p, false)) {
        m = r.number(*imp, "mass", p + "impedance.", kDefaultMass);
        d = r.number(*imp, "damping", p + "impedance.", kDefaultDamping);
        k = r.number(*imp, "stiffness", p + "impedance.", kDefaultStiffness);
      }
      try {
        link.params = make_impedance_params(m, d, k);
      } catch (const ParameterError& e) {
        r.fail(p + "impedance." + e.field(), e.what());
      }
      link.limits.limit = r.vec3(l, "limits", p, Vec3{0.25, 0.25, 0.25});
      link.sign = r.vec3(l, "sign", p, Vec3{1.0, 1.0, 1.0});
      spec.links.push_back(link);
    }
  }

  if (const json* order = r.array(f, "polygon_order", path, false)) {
    for (const auto& v : *order) {
      const int idx = v.is_number_integer() ? spec.index_of(v.get<int>()) : -1;
      if (idx < 0) {
        r.fail(path + "polygon_order", "references unknown drone id");
      } else {
        spec.polygon_order.push_back(idx);
      }
    }
  }
}

}  // namespace

Scenario parse_scenario(const json& doc, const std::filesystem::path& base_dir) {
  Reader r;
  Scenario s;
  s.base_dir = base_dir;
  if (!doc.is_object()) throw ScenarioError({"scenario root must be an object"});

  s.schema_version = r.integer(doc, "schema_version", "", std::nullopt);
  if (doc.contains("schema_version") && s.schema_version != kScenarioSchemaVersion) {
    r.fail("schema_version", "unsupported version " + std::to_string(s.schema_version) + " (expected " +
                                 std::to_string(kScenarioSchemaVersion) + ")");
  }
  s.name = r.string(doc, "name", "", true).value_or("");
  s.sample_time = r.number(doc, "sample_time", "", 1.0 / 60.0);
  if (!(s.sample_time > 0.0)) r.fail("sample_time", "must be > 0");

  if (const json* f = r.object(doc, "formation", "", true)) parse_formation(r, *f, s);

  if (const json* h = r.object(doc, "hand_estimator", "", false)) {
    const int window = r.integer(*h, "window", "hand_estimator.", 6);
    if (window < 2) r.fail("hand_estimator.window", "must be >= 2");
    s.hand_estimator.window = static_cast<std::size_t>(std::max(window, 2));
    s.hand_estimator.smoothing = r.number(*h, "smoothing", "hand_estimator.", 0.5);
    if (!(s.hand_estimator.smoothing > 0.0 && s.hand_estimator.smoothing <= 1.0)) {
      r.fail("hand_estimator.smoothing", "must be in (0, 1]");
    }
  }

  if (const json* layouts = r.object(doc, "layouts", "", false)) {
    for (const auto& [name, list] : layouts->items()) {
      if (!list.is_array()) {
        r.fail("layouts." + name, "must be an array of obstacles");
        continue;
      }
      s.layouts[name] = parse_obstacles(r, list, "layouts." + name);
    }
    s.layout = r.string(doc, "layout", "", false).value_or(s.layouts.empty() ? "" : s.layouts.begin()->first);
    if (doc.contains("obstacles")) r.fail("obstacles", "use either obstacles or layouts, not both");
    auto it = s.layouts.find(s.layout);
    if (it == s.layouts.end()) {
      r.fail("layout", "unknown layout '" + s.layout + "'");
    } else {
      s.obstacles = it->second;
    }
  } else if (const json* list = r.array(doc, "obstacles", "", false)) {
    s.obstacles = parse_obstacles(r, *list, "obstacles");
  }

  if (const json* a = r.object(doc, "apf", "", false)) {
    const std::string p = "apf.";
    s.avoidance_enabled = r.boolean(*a, "enabled", p, true);
    s.apf.xi = r.number(*a, "xi", p, 1.0);
    s.apf.eta = r.number(*a, "eta", p, 0.1);
    s.apf.velocity_gain = r.number(*a, "velocity_gain", p, 1.0);
    s.apf.max_speed = r.number(*a, "max_speed", p, 1.0);
    s.apf.sum_all = r.boolean(*a, "sum_all", p, false);
    s.avoidance_relaxation_s = r.number(*a, "relaxation_s", p, 0.5);
    if (!(s.avoidance_relaxation_s > 0.0)) r.fail(p + "relaxation_s", "must be > 0");
    for (auto [key, v] : {std::pair{"xi", s.apf.xi}, std::pair{"eta", s.apf.eta},
                          std::pair{"velocity_gain", s.apf.velocity_gain}, std::pair{"max_speed", s.apf.max_speed}}) {
      if (!(v > 0.0)) r.fail(p + key, "must be > 0");
    }
  }

  if (const json* pid = r.object(doc, "pid", "", false)) {
    auto axis = [&](const char* key, PidAxisGains& g) {
      if (const json* a = r.object(*pid, key, "pid.", false)) {
        const std::string p = std::string("pid.") + key + ".";
        g.kp = r.number(*a, "kp", p, g.kp);
        g.kd = r.number(*a, "kd", p, g.kd);
        g.ki = r.number(*a, "ki", p, g.ki);
        if (g.kp < 0.0 || g.kd < 0.0 || g.ki < 0.0) r.fail(p, "gains must be >= 0");
      }
    };
    axis("xy", s.pid.xy);
    axis("z", s.pid.z);
    s.pid.max_accel = r.number(*pid, "max_accel", "pid.", 4.0);
    s.pid.integrator_limit = r.number(*pid, "integrator_limit", "pid.", 0.1);
    if (!(s.pid.max_accel > 0.0)) r.fail("pid.max_accel", "must be > 0");
    if (!(s.pid.integrator_limit > 0.0)) r.fail("pid.integrator_limit", "must be > 0");
  }
  s.max_speed = r.number(doc, "max_speed", "", 1.0);
  if (!(s.max_speed > 0.0)) r.fail("max_speed", "must be > 0");

  if (const json* t = r.object(doc, "thresholds", "", false)) {
    const std::string p = "thresholds.";
    auto& tc = s.tactile;
    tc.thresholds.threshold = r.number(*t, "formation", p, 0.10);
    tc.thresholds.hysteresis = r.number(*t, "hysteresis", p, 0.02);
    tc.selector.deadband = r.number(*t, "displacement_deadband", p, 0.05);
    tc.selector.cooldown_ms = r.integer(*t, "cooldown_ms", p, 300);
    tc.direction_epsilon = r.number(*t, "direction_epsilon", p, 0.05);
    s.safety.min_separation = r.number(*t, "min_separation", p, 0.15);
    if (!(tc.thresholds.threshold > 0.0 && tc.thresholds.threshold < 1.0)) r.fail(p + "formation", "must be in (0, 1)");
    if (!(tc.thresholds.hysteresis >= 0.0 && tc.thresholds.hysteresis < tc.thresholds.threshold)) {
      r.fail(p + "hysteresis", "must be in [0, formation)");
    }
    if (tc.selector.deadband < 0.0) r.fail(p + "displacement_deadband", "must be >= 0");
    if (tc.selector.cooldown_ms < 0) r.fail(p + "cooldown_ms", "must be >= 0");
    if (!(tc.direction_epsilon > 0.0)) r.fail(p + "direction_epsilon", "must be > 0");
    if (s.safety.min_separation < 0.0) r.fail(p + "min_separation", "must be >= 0");
  }

  if (const json* start = r.object(doc, "start", "", false)) {
    s.start_hand = r.vec3(*start, "hand", "start.", Vec3{0.0, 0.0, 1.0});
  }
  s.hand_trace = r.string(doc, "hand_trace", "", false);
  if (doc.contains("duration_s")) {
    s.duration_s = r.number(doc, "duration_s", "", std::nullopt);
    if (!(*s.duration_s >= 0.0)) r.fail("duration_s", "must be >= 0");
  }
  if (const json* fin = r.object(doc, "finish_region", "", false)) {
    FinishRegion region{r.vec2(*fin, "min", "finish_region."), r.vec2(*fin, "max", "finish_region.")};
    if (!(region.min.x <= region.max.x && region.min.y <= region.max.y)) {
      r.fail("finish_region", "min must not exceed max");
    }
    s.finish = region;
  }

  // Structural checks only make sense once the pieces parsed cleanly.
  if (r.errors.empty()) {
    try {
      validate(s.formation);
    } catch (const SpecError& e) {
      r.fail("formation", e.what());
    }
  }
  if (!r.errors.empty()) throw ScenarioError(std::move(r.errors));
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError({"cannot open scenario file '" + path.string() + "'"});
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError({std::string("invalid JSON: ") + e.what()});
  }
  return parse_scenario(doc, path.parent_path());
}

namespace {

json vec(const Vec3& v) { return json::array({v.x, v.y, v.z}); }
json vec(const Vec2& v) { return json::array({v.x, v.y}); }

json obstacles_json(const std::vector<Obstacle>& list) {
  json out = json::array();
  for (const auto& o : list) {
    out.push_back({{"id", o.id}, {"center", vec(o.center)}, {"radius", o.radius}, {"influence", o.influence}});
  }
  return out;
}

}  // namespace

json to_json(const Scenario& s) {
  const auto& f = s.formation;
  json drones = json::array();
  for (const auto& rule : f.drones) {
    json anchor;
    switch (rule.anchor.kind) {
      case AnchorKind::Hand: anchor = {{"type", "hand"}}; break;
      case AnchorKind::Drone:
        anchor = {{"type", "drone"}, {"drone", f.drones[static_cast<std::size_t>(rule.anchor.first)].id}};
        break;
      case AnchorKind::Midpoint:
        anchor = {{"type", "midpoint"},
                  {"drones", {f.drones[static_cast<std::size_t>(rule.anchor.first)].id,
                              f.drones[static_cast<std::size_t>(rule.anchor.second)].id}}};
        break;
    }
    drones.push_back({{"id", rule.id}, {"anchor", anchor}, {"offset", vec(rule.offset)}});
  }
  json links = json::array();
  for (const auto& l : f.links) {
    json source = l.source == kHandNode ? json("hand") : json(f.drones[static_cast<std::size_t>(l.source)].id);
    links.push_back({{"source", source},
                     {"target", f.drones[static_cast<std::size_t>(l.target)].id},
                     {"impedance", {{"mass", l.params.mass}, {"damping", l.params.damping}, {"stiffness", l.params.stiffness}}},
                     {"limits", vec(l.limits.limit)},
                     {"sign", vec(l.sign)}});
  }
  json order = json::array();
  for (int idx : f.polygon_order) order.push_back(f.drones[static_cast<std::size_t>(idx)].id);

  json doc = {
      {"schema_version", s.schema_version},
      {"name", s.name},
      {"sample_time", s.sample_time},
      {"formation",
       {{"velocity_gain", f.velocity_gain}, {"away_axis", axis_name(f.away_axis)}, {"drones", drones},
        {"links", links}, {"polygon_order", order}}},
      {"hand_estimator", {{"window", s.hand_estimator.window}, {"smoothing", s.hand_estimator.smoothing}}},
      {"apf",
       {{"enabled", s.avoidance_enabled}, {"xi", s.apf.xi}, {"eta", s.apf.eta},
        {"velocity_gain", s.apf.velocity_gain}, {"max_speed", s.apf.max_speed}, {"sum_all", s.apf.sum_all},
        {"relaxation_s", s.avoidance_relaxation_s}}},
      {"pid",
       {{"xy", {{"kp", s.pid.xy.kp}, {"kd", s.pid.xy.kd}, {"ki", s.pid.xy.ki}}},
        {"z", {{"kp", s.pid.z.kp}, {"kd", s.pid.z.kd}, {"ki", s.pid.z.ki}}},
        {"max_accel", s.pid.max_accel},
        {"integrator_limit", s.pid.integrator_limit}}},
      {"max_speed", s.max_speed},
      {"thresholds",
       {{"formation", s.tactile.thresholds.threshold},
        {"hysteresis", s.tactile.thresholds.hysteresis},
        {"displacement_deadband", s.tactile.selector.deadband},
        {"cooldown_ms", s.tactile.selector.cooldown_ms},
        {"direction_epsilon", s.tactile.direction_epsilon},
        {"min_separation", s.safety.min_separation}}},
      {"start", {{"hand", vec(s.start_hand)}}},
  };
  if (s.layouts.empty()) {
    doc["obstacles"] = obstacles_json(s.obstacles);
  } else {
    json layouts = json::object();
    for (const auto& [name, list] : s.layouts) layouts[name] = obstacles_json(list);
    doc["layouts"] = layouts;
    doc["layout"] = s.layout;
  }
  if (s.hand_trace) doc["hand_trace"] = *s.hand_trace;
  if (s.duration_s) doc["duration_s"] = *s.duration_s;
  if (s.finish) doc["finish_region"] = {{"min", vec(s.finish->min)}, {"max", vec(s.finish->max)}};
  return doc;
}

std::string canonical_serialization(const Scenario& scenario) { return to_json(scenario).dump(); }

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ScenarioError({"cannot write scenario file '" + path.string() + "'"});
  out << to_json(scenario).dump(2) << '\n';
}

std::string scenario_hash(const Scenario& scenario) {
  const std::string text = canonical_serialization(scenario);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr);
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

}  // namespace swarmguide

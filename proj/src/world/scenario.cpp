#include <cmath>
#include <fstream>
#include <sstream>

#include "tempofleet/world.hpp"

namespace tempofleet::world {

using nlohmann::json;

Vec2 FrictionModel::force(const Vec2& x, const Vec2& v) const {
  switch (kind) {
    case FrictionKind::None: return Vec2::Zero();
    case FrictionKind::Viscous: return gain * v;
    case FrictionKind::Sinusoidal: {
      const double s = gain * std::sin(freq * (x.x() + x.y()));
      return {s * (std::exp(-std::abs(v.x())) + 1.0) * v.x(), s * (std::exp(-std::abs(v.y())) + 1.0) * v.y()};
    }
  }
  return Vec2::Zero();
}

double FrictionModel::bound() const {
  switch (kind) {
    case FrictionKind::None: return 0.0;
    case FrictionKind::Viscous: return std::abs(gain);
    case FrictionKind::Sinusoidal: return 2.0 * std::abs(gain);
  }
  return 0.0;
}

std::string default_robot_atom(int robot, int region) {
  return std::to_string(robot + 1) + "-π" + std::to_string(region + 1);
}

std::string default_object_atom(int object, int region) {
  return "O" + std::to_string(object + 1) + "-π" + std::to_string(region + 1);
}

const Letter& Scenario::robot_services(int robot, int region) const {
  return regions.at(static_cast<std::size_t>(region)).robot_services.at(robot);
}

const Letter& Scenario::object_services(int object, int region) const {
  return regions.at(static_cast<std::size_t>(region)).object_services.at(object);
}

std::set<std::string> Scenario::atom_universe() const {
  std::set<std::string> out;
  for (const auto& r : regions) {
    for (const auto& [_, l] : r.robot_services) out.insert(l.begin(), l.end());
    for (const auto& [_, l] : r.object_services) out.insert(l.begin(), l.end());
  }
  return out;
}

int Scenario::region_index(const std::string& ref) const {
  for (std::size_t k = 0; k < regions.size(); ++k)
    if (regions[k].id == ref) return static_cast<int>(k);
  if (!ref.empty() && ref.find_first_not_of("0123456789") == std::string::npos) {
    const int k = std::stoi(ref) - 1;
    if (k >= 0 && k < num_regions()) return k;
  }
  throw ScenarioError("unknown region '" + ref + "'");
}

void Scenario::fill_default_services() {
  for (int k = 0; k < num_regions(); ++k) {
    auto& r = regions[static_cast<std::size_t>(k)];
    for (int i = 0; i < num_robots(); ++i)
      if (!r.robot_services.contains(i)) r.robot_services[i] = {default_robot_atom(i, k)};
    for (int j = 0; j < num_objects(); ++j)
      if (!r.object_services.contains(j)) r.object_services[j] = {default_object_atom(j, k)};
  }
}

namespace {

Vec2 read_vec(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ScenarioError("expected [x, y], got " + j.dump());
  return {j[0].get<double>(), j[1].get<double>()};
}

Disk read_disk(const json& j) { return {read_vec(j.at("center")), j.at("radius").get<double>()}; }

json write_disk(const Disk& d) { return {{"center", {d.center.x(), d.center.y()}}, {"radius", d.radius}}; }

FrictionModel read_friction(const json& j) {
  FrictionModel f;
  if (j.is_null()) return f;
  const auto kind = j.value("kind", std::string("none"));
  const json params = j.value("params", json::object());
  if (kind == "none") {
    f.kind = FrictionKind::None;
  } else if (kind == "viscous") {
    f.kind = FrictionKind::Viscous;
    f.gain = params.value("gain", 1.0);
  } else if (kind == "sinusoidal") {
    f.kind = FrictionKind::Sinusoidal;
    f.gain = params.value("gain", 1.25);
    f.freq = params.value("freq", 0.5);
  } else {
    throw ScenarioError("unknown friction kind '" + kind + "'");
  }
  return f;
}

json write_friction(const FrictionModel& f) {
  switch (f.kind) {
    case FrictionKind::None: return {{"kind", "none"}};
    case FrictionKind::Viscous: return {{"kind", "viscous"}, {"params", {{"gain", f.gain}}}};
    case FrictionKind::Sinusoidal:
      return {{"kind", "sinusoidal"}, {"params", {{"gain", f.gain}, {"freq", f.freq}}}};
  }
  return nullptr;
}

std::map<int, Letter> read_services(const json& j) {
  std::map<int, Letter> out;
  if (j.is_null()) return out;
  for (const auto& [key, val] : j.items()) {
    const int idx = std::stoi(key) - 1;
    if (idx < 0) throw ScenarioError("service tables are keyed by 1-based indices");
    Letter l;
    for (const auto& a : val) l.insert(a.get<std::string>());
    out[idx] = std::move(l);
  }
  return out;
}

json write_services(const std::map<int, Letter>& m) {
  json out = json::object();
  for (const auto& [k, l] : m) out[std::to_string(k + 1)] = std::vector<std::string>(l.begin(), l.end());
  return out;
}

int read_region_ref(const Scenario& s, const json& j) {
  if (j.is_number_integer()) {
    const int k = j.get<int>() - 1;
    if (k < 0 || k >= s.num_regions()) throw ScenarioError("init_region out of range: " + j.dump());
    return k;
  }
  return s.region_index(j.get<std::string>());
}

}  // namespace

Scenario scenario_from_json(const json& j) {
  try {
    Scenario s;
    s.name = j.value("name", std::string());
    s.workspace = read_disk(j.at("workspace"));
    for (const auto& o : j.value("obstacles", json::array())) s.obstacles.push_back(read_disk(o));
    int k = 0;
    for (const auto& r : j.at("regions")) {
      Region reg;
      reg.id = r.contains("id") ? r["id"].get<std::string>() : "pi" + std::to_string(k + 1);
      reg.disk = read_disk(r);
      reg.robot_services = read_services(r.value("robot_services", json()));
      reg.object_services = read_services(r.value("object_services", json()));
      s.regions.push_back(std::move(reg));
      ++k;
    }
    for (const auto& r : j.at("robots")) {
      RobotSpec spec;
      spec.radius = r.at("radius").get<double>();
      spec.power = r.at("power").get<double>();
      spec.mass = r.value("mass", 1.0);
      spec.friction = read_friction(r.value("friction", json()));
      spec.init_region = read_region_ref(s, r.at("init_region"));
      s.robots.push_back(spec);
    }
    for (const auto& o : j.value("objects", json::array())) {
      ObjectSpec spec;
      spec.radius = o.at("radius").get<double>();
      spec.required_power = o.at("required_power").get<double>();
      spec.mass = o.value("mass", 1.0);
      spec.friction = read_friction(o.value("friction", json()));
      spec.init_region = read_region_ref(s, o.at("init_region"));
      s.objects.push_back(spec);
    }
    if (s.num_robots() > kMaxRobots) throw ScenarioError("at most 32 robots are supported");
    if (j.contains("control")) s.control = j["control"];
    s.fill_default_services();
    return s;
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("malformed scenario: ") + e.what());
  }
}

json scenario_to_json(const Scenario& s) {
  json j;
  if (!s.name.empty()) j["name"] = s.name;
  j["workspace"] = write_disk(s.workspace);
  j["obstacles"] = json::array();
  for (const auto& o : s.obstacles) j["obstacles"].push_back(write_disk(o));
  j["regions"] = json::array();
  for (const auto& r : s.regions) {
    json jr = write_disk(r.disk);
    jr["id"] = r.id;
    jr["robot_services"] = write_services(r.robot_services);
    jr["object_services"] = write_services(r.object_services);
    j["regions"].push_back(jr);
  }
  j["robots"] = json::array();
  for (const auto& r : s.robots)
    j["robots"].push_back({{"radius", r.radius},
                           {"power", r.power},
                           {"mass", r.mass},
                           {"friction", write_friction(r.friction)},
                           {"init_region", r.init_region + 1}});
  j["objects"] = json::array();
  for (const auto& o : s.objects)
    j["objects"].push_back({{"radius", o.radius},
                            {"required_power", o.required_power},
                            {"mass", o.mass},
                            {"friction", write_friction(o.friction)},
                            {"init_region", o.init_region + 1}});
  if (!s.control.empty()) j["control"] = s.control;
  return j;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ScenarioError(path + ": " + e.what());
  }
  return scenario_from_json(j);
}

std::vector<std::string> validate_scenario(const Scenario& s, double k_phi) {
  auto fail = [](const std::string& m) { throw ScenarioError(m); };
  const Disk& ws = s.workspace;
  if (!(ws.radius > 0)) fail("workspace radius must be positive");
  for (std::size_t a = 0; a < s.obstacles.size(); ++a) {
    const Disk& o = s.obstacles[a];
    if (!(o.radius > 0)) fail("obstacle " + std::to_string(a + 1) + " has nonpositive radius");
    if ((o.center - ws.center).norm() + o.radius >= ws.radius)
      fail("obstacle " + std::to_string(a + 1) + " touches the workspace boundary");
    for (std::size_t b = 0; b < a; ++b)
      if ((o.center - s.obstacles[b].center).norm() <= o.radius + s.obstacles[b].radius)
        fail("obstacles " + std::to_string(b + 1) + " and " + std::to_string(a + 1) + " overlap");
  }
  if (s.regions.empty()) fail("scenario has no regions");
  for (std::size_t a = 0; a < s.regions.size(); ++a) {
    const Disk& r = s.regions[a].disk;
    const std::string name = "region " + s.regions[a].id;
    if (!(r.radius > 0)) fail(name + " has nonpositive radius");
    if ((r.center - ws.center).norm() + r.radius >= ws.radius) fail(name + " is not strictly inside the workspace");
    for (const auto& o : s.obstacles)
      if ((r.center - o.center).norm() <= r.radius + o.radius) fail(name + " intersects an obstacle");
    for (std::size_t b = 0; b < a; ++b)
      if ((r.center - s.regions[b].disk.center).norm() <= r.radius + s.regions[b].disk.radius)
        fail(name + " intersects region " + s.regions[b].id);
  }
  for (int i = 0; i < s.num_robots(); ++i) {
    const auto& r = s.robots[static_cast<std::size_t>(i)];
    if (!(r.radius > 0 && r.power > 0 && r.mass > 0))
      fail("robot " + std::to_string(i + 1) + " needs positive radius, power and mass");
  }
  for (int j = 0; j < s.num_objects(); ++j) {
    const auto& o = s.objects[static_cast<std::size_t>(j)];
    if (!(o.radius > 0 && o.required_power > 0 && o.mass > 0))
      fail("object " + std::to_string(j + 1) + " needs positive radius, required power and mass");
  }
  for (int k = 0; k < s.num_regions(); ++k) {
    std::vector<double> radii;
    for (const auto& r : s.robots)
      if (r.init_region == k) radii.push_back(r.radius);
    for (const auto& o : s.objects)
      if (o.init_region == k) radii.push_back(o.radius);
    if (!pack_spheres(s.regions[static_cast<std::size_t>(k)].disk, radii))
      fail("initial occupants of region " + s.regions[static_cast<std::size_t>(k)].id + " do not fit");
  }

  std::vector<std::string> warnings;
  auto check_gain = [&](const std::string& who, double alpha) {
    if (alpha > 0 && !(k_phi > alpha / 2)) {
      std::ostringstream os;
      os << who << ": k_phi = " << k_phi << " does not exceed alpha/2 = " << alpha / 2
         << "; convergence is not guaranteed";
      warnings.push_back(os.str());
    }
  };
  for (int i = 0; i < s.num_robots(); ++i)
    check_gain("robot " + std::to_string(i + 1), s.robots[static_cast<std::size_t>(i)].friction.bound());
  for (int j = 0; j < s.num_objects(); ++j)
    check_gain("object " + std::to_string(j + 1), s.objects[static_cast<std::size_t>(j)].friction.bound());
  return warnings;
}

Letter label_regions(const Scenario& s, const std::vector<int>& robot_regions, const std::vector<int>& object_regions) {
  Letter out;
  auto check = [&](int k) {
    if (k < 0 || k >= s.num_regions()) throw ScenarioError("region index out of range: " + std::to_string(k));
  };
  for (std::size_t i = 0; i < robot_regions.size(); ++i) {
    check(robot_regions[i]);
    const auto& l = s.robot_services(static_cast<int>(i), robot_regions[i]);
    out.insert(l.begin(), l.end());
  }
  for (std::size_t j = 0; j < object_regions.size(); ++j) {
    check(object_regions[j]);
    const auto& l = s.object_services(static_cast<int>(j), object_regions[j]);
    out.insert(l.begin(), l.end());
  }
  return out;
}

}  // namespace tempofleet::world

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace tempofleet::world {

using Vec2 = Eigen::Vector2d;
using RobotSet = std::uint32_t;  // bit i = robot i (0-based)
using Letter = std::set<std::string>;

constexpr int kMaxRobots = 32;

inline int set_size(RobotSet s) { return __builtin_popcount(s); }
inline bool has_robot(RobotSet s, int i) { return (s >> i) & 1u; }
inline RobotSet robot_bit(int i) { return RobotSet{1} << i; }

struct Disk {
  Vec2 center = Vec2::Zero();
  double radius = 0.0;
};

enum class FrictionKind { None, Viscous, Sinusoidal };

/// Friction-like term f(x, v) of m*xdd + f = u.
struct FrictionModel {
  FrictionKind kind = FrictionKind::None;
  double gain = 0.0;
  double freq = 0.5;

  Vec2 force(const Vec2& x, const Vec2& v) const;
  /// alpha with |f(x, v)| <= alpha |v|.
  double bound() const;
};

struct RobotSpec {
  double radius = 0.0;
  double power = 0.0;
  double mass = 1.0;
  FrictionModel friction;
  int init_region = 0;  // 0-based
};

struct ObjectSpec {
  double radius = 0.0;
  double required_power = 0.0;
  double mass = 1.0;
  FrictionModel friction;
  int init_region = 0;
};

struct Region {
  std::string id;
  Disk disk;
  // Missing entries fall back to the presence atoms "i-πk" / "Oj-πk".
  std::map<int, Letter> robot_services;
  std::map<int, Letter> object_services;
};

struct Scenario {
  std::string name;
  Disk workspace;
  std::vector<Disk> obstacles;
  std::vector<Region> regions;
  std::vector<RobotSpec> robots;
  std::vector<ObjectSpec> objects;
  nlohmann::json control = nlohmann::json::object();  // passed through to the control layer

  int num_robots() const { return static_cast<int>(robots.size()); }
  int num_objects() const { return static_cast<int>(objects.size()); }
  int num_regions() const { return static_cast<int>(regions.size()); }

  const Letter& robot_services(int robot, int region) const;
  const Letter& object_services(int object, int region) const;
  /// Union of every service atom mentioned by the labeling tables.
  std::set<std::string> atom_universe() const;
  /// Resolves "3" (1-based index) or a region id.
  int region_index(const std::string& ref) const;

 private:
  friend Scenario scenario_from_json(const nlohmann::json& j);
  void fill_default_services();
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string default_robot_atom(int robot, int region);
std::string default_object_atom(int object, int region);

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);
Scenario load_scenario(const std::string& path);

/// Throws ScenarioError on broken invariants; returns soft warnings.
std::vector<std::string> validate_scenario(const Scenario& s, double k_phi = 1.0);

/// AG_j per object; empty set means not grasped.
using GraspConfig = std::vector<RobotSet>;

enum class EntityKind { Robot, Object, Coupled };

struct Entity {
  EntityKind kind;
  RobotSet robots = 0;  // the robot itself, or the coalition
  int robot = -1;
  int object = -1;
  double radius = 0.0;
};

/// Free robots, then free objects, then coupled systems (by object index).
std::vector<Entity> entities(const Scenario& s, const GraspConfig& ag);

double coupled_radius(const Scenario& s, int object, RobotSet coalition);
bool lambda_check(const Scenario& s, int object, RobotSet coalition);

/// Greedy deterministic packing: largest ball at the center, the rest on
/// concentric rings. nullopt when the greedy scheme fails.
std::optional<std::vector<Vec2>> pack_spheres(const Disk& region, const std::vector<double>& radii);

/// Position for a ball of radius r inside `region` that maximizes the
/// smallest clearance to `fixed` and to the region edge. nullopt if that
/// clearance would be below `margin`.
std::optional<Vec2> place_in_region(const Disk& region, const std::vector<Disk>& fixed, double r, double margin);

Letter label_regions(const Scenario& s, const std::vector<int>& robot_regions, const std::vector<int>& object_regions);

}  // namespace tempofleet::world

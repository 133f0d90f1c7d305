#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tempofleet/control.hpp"
#include "tempofleet/ltl.hpp"
#include "tempofleet/product.hpp"

namespace tempofleet::executor {

using world::Disk;
using world::Vec2;

/// Continuous configuration at rest plus the discrete state it realizes.
struct Config {
  std::vector<Vec2> robots;
  std::vector<Vec2> objects;
  ts::TsState state;
};

/// Outermost position in `region` for a ball of radius r with clearance at
/// least `margin` from every disk of `fixed`.
std::optional<Vec2> rim_placement(const Disk& region, const std::vector<Disk>& fixed, double r, double margin);

/// Initial placement: each region's occupants on its rim, or packed by P_s
/// when they do not fit with clearance.
Config initial_config(const world::Scenario& s);

/// Entity balls of `c` (free robots, free objects, coupled systems).
std::vector<std::pair<world::Entity, Disk>> entity_balls(const world::Scenario& s, const Config& c);

/// Region whose disk contains the whole ball, or -1.
int containing_region(const world::Scenario& s, const Disk& ball);

enum class EventKind { Release, Motion, Grasp };

struct Event {
  EventKind kind = EventKind::Motion;
  int robot = -1;   // Release, Grasp, robot Motion
  int object = -1;  // Release, Grasp, transport Motion
  world::RobotSet coalition = 0;
  int from = -1;
  int to = -1;
  Vec2 goal = Vec2::Zero();  // predicted placement for motions
};

std::string event_text(const Event& e);

class ExecutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExecOptions {
  control::ControlParams control;
  int suffix_reps = 2;
  double dwell = 1.0;     // time added after each step so timestamps increase
  double margin = 0.05;   // clearance for goal placements, relative to the entity radius
  bool keep_logs = true;  // keep per-motion control logs
};

/// Goal for a moving entity inside region `to`: the spot with the largest
/// clearance from the motion's obstacles as the controller sees them (merged).
std::optional<Vec2> goal_placement(const world::Scenario& s, const Config& c, const world::Entity& e, int from, int to,
                                   const ExecOptions& opt);

/// Releases, then one motion at a time, then grasps. Motion order starts
/// ascending by entity and is backtracked when a goal placement fails.
std::vector<Event> serialize_transition(const world::Scenario& s, const Config& c, const ts::ActionSet& actions,
                                        const ExecOptions& opt);

struct TracePoint {
  double t = 0.0;
  Vec2 x;
  int region = -1;
  world::Letter services;
};

struct MotionRecord {
  std::size_t step = 0;  // index into the executed step sequence
  Event event;
  double t_start = 0.0;
  control::MotionResult result;
};

struct ExecutionReport {
  bool ok = false;
  std::string error;
  std::size_t prefix_steps = 0;
  std::size_t suffix_steps = 0;
  int suffix_reps = 0;
  std::vector<std::string> step_text;
  std::vector<MotionRecord> motions;
  std::vector<std::vector<TracePoint>> robot_trace;   // per robot, one point per recorded instant
  std::vector<std::vector<TracePoint>> object_trace;  // per object
  std::size_t relocations = 0;
  double total_time = 0.0;
  Config final_config;

  double min_clearance() const;
  bool alpha_monotone() const;
  double max_m_hat() const;
  double max_alpha_hat() const;
};


ExecutionReport execute_plan(const product::Plan& plan, const world::Scenario& s, const ExecOptions& opt);

/// Per-robot, per-object and global task formulas.
struct Tasks {
  std::optional<ltl::Formula> global;
  std::map<int, ltl::Formula> robots;   // 0-based
  std::map<int, ltl::Formula> objects;  // 0-based

  /// (global) & (AND phi_i) & (AND phi^o_j); `true` when empty.
  ltl::Formula combined() const;
};

/// Each spec is "<formula>", "r<i>:<formula>" or "o<j>:<formula>" (1-based).
Tasks parse_tasks(const std::vector<std::string>& specs, const world::Scenario& s);

/// Service words of the recorded behavior as lassos: positions before the
/// first suffix lap form the prefix, the first lap the cycle.
ltl::LassoWord robot_word(const ExecutionReport& r, int robot);
ltl::LassoWord object_word(const ExecutionReport& r, int object);
ltl::LassoWord joint_word(const ExecutionReport& r);

/// Checks every per-entity formula on its own word and the combined formula
/// on the joint word. Later laps must repeat the first lap's letters.
bool verify_behavior(const ExecutionReport& r, const Tasks& tasks, std::string* why = nullptr);

nlohmann::json report_to_json(const ExecutionReport& r);
/// Restores what verification needs: status, step counts and traces.
ExecutionReport report_from_json(const nlohmann::json& j);

}  // namespace tempofleet::executor

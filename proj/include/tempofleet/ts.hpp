#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "tempofleet/world.hpp"

namespace tempofleet::ts {

using world::GraspConfig;
using world::RobotSet;
using world::Scenario;

struct TsState {
  std::vector<int> robot_region;
  std::vector<int> object_region;
  GraspConfig ag;

  friend bool operator==(const TsState&, const TsState&) = default;
  /// Index of the object robot i grasps, or -1.
  int grasped_by(int robot) const;
};

struct TsStateHash {
  std::size_t operator()(const TsState& s) const;
};

enum class ActionKind { Stay, Navigate, Transport, Grasp, Release };

struct Action {
  ActionKind kind = ActionKind::Stay;
  int robot = -1;         // unused for Transport
  int object = -1;        // Transport, Grasp, Release
  RobotSet coalition = 0;  // Transport
  int from = -1;
  int to = -1;

  friend bool operator==(const Action&, const Action&) = default;
};

/// Per-robot atoms in robot order, with one shared atom per transport
/// placed at its lowest coalition member.
using ActionSet = std::vector<Action>;

struct Transition {
  TsState source;
  TsState target;
  ActionSet actions;
  double cost = 0.0;
};

constexpr double kGraspEpsilon = 1e-6;

TsState initial_state(const Scenario& s);

bool state_valid(const TsState& st, const Scenario& s);

/// Applies `actions` to `source` without any validity checks.
TsState apply_actions(const TsState& source, const ActionSet& actions);

double transition_cost(const ActionSet& actions, const Scenario& s);

std::vector<Transition> successors(const TsState& st, const Scenario& s);

std::string action_text(const Action& a);
std::string action_set_text(const ActionSet& actions);
std::string state_text(const TsState& st);

world::Letter label(const TsState& st, const Scenario& s);

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TsEdge {
  int target;
  double cost;
  ActionSet actions;
};

/// Lazily explored TS. State ids follow discovery order; successors and
/// packing verdicts are cached. Not thread safe.
class TransitionSystem {
 public:
  explicit TransitionSystem(const Scenario& s);

  const Scenario& scenario() const { return *scenario_; }
  int initial() const { return 0; }
  std::size_t num_states() const { return states_.size(); }
  const TsState& state(int id) const { return states_[static_cast<std::size_t>(id)]; }
  int intern(const TsState& st);
  /// -1 if never seen.
  int find(const TsState& st) const;

  const std::vector<TsEdge>& successors(int id);
  const world::Letter& label(int id);

  bool valid(const TsState& st);

 private:
  bool region_fits(int region, std::vector<double> radii);

  const Scenario* scenario_;
  std::vector<TsState> states_;
  std::unordered_map<TsState, int, TsStateHash> ids_;
  std::vector<std::vector<TsEdge>> succ_;
  std::vector<char> expanded_;
  std::vector<world::Letter> labels_;
  std::vector<char> labelled_;
  std::map<std::pair<int, std::vector<double>>, bool> fit_cache_;
};

struct BuiltTs {
  std::vector<TsState> states;
  std::vector<std::vector<TsEdge>> edges;
  std::size_t num_transitions = 0;
};

/// Breadth-first closure from the initial state.
BuiltTs build_ts(const Scenario& s, std::size_t max_states);

/// "src -> dst : cost : actions" lines after a state table.
std::string export_ts(const BuiltTs& ts);

}  // namespace tempofleet::ts

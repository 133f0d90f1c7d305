#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>

#include "tempofleet/ts.hpp"

namespace tempofleet::ts {

using world::has_robot;
using world::robot_bit;

int TsState::grasped_by(int robot) const {
  for (std::size_t j = 0; j < ag.size(); ++j)
    if (has_robot(ag[j], robot)) return static_cast<int>(j);
  return -1;
}

std::size_t TsStateHash::operator()(const TsState& s) const {
  std::size_t h = 0x9e3779b97f4a7c15ull;
  auto mix = [&](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2); };
  for (int k : s.robot_region) mix(static_cast<std::size_t>(k));
  for (int k : s.object_region) mix(static_cast<std::size_t>(k) + 1000);
  for (RobotSet a : s.ag) mix(static_cast<std::size_t>(a) + 1000000);
  return h;
}

TsState initial_state(const Scenario& s) {
  TsState st;
  for (const auto& r : s.robots) st.robot_region.push_back(r.init_region);
  for (const auto& o : s.objects) st.object_region.push_back(o.init_region);
  st.ag.assign(s.objects.size(), 0);
  return st;
}

namespace {

// Validity with a pluggable per-region packing test.
template <class Fits>
bool valid_with(const TsState& st, const Scenario& s, Fits&& fits) {
  const int n = s.num_robots();
  const int m = s.num_objects();
  if (static_cast<int>(st.robot_region.size()) != n || static_cast<int>(st.object_region.size()) != m ||
      static_cast<int>(st.ag.size()) != m)
    return false;
  RobotSet seen = 0;
  for (int j = 0; j < m; ++j) {
    const RobotSet a = st.ag[static_cast<std::size_t>(j)];
    if (a >> n) return false;
    if (seen & a) return false;  // a robot grasps at most one object
    seen |= a;
    for (int i = 0; i < n; ++i)
      if (has_robot(a, i) && st.robot_region[static_cast<std::size_t>(i)] != st.object_region[static_cast<std::size_t>(j)])
        return false;
  }
  std::vector<std::vector<double>> per_region(static_cast<std::size_t>(s.num_regions()));
  for (const auto& e : world::entities(s, st.ag)) {
    int k = 0;
    if (e.kind == world::EntityKind::Robot)
      k = st.robot_region[static_cast<std::size_t>(e.robot)];
    else
      k = st.object_region[static_cast<std::size_t>(e.object)];
    if (k < 0 || k >= s.num_regions()) return false;
    per_region[static_cast<std::size_t>(k)].push_back(e.radius);
  }
  for (int k = 0; k < s.num_regions(); ++k) {
    auto& radii = per_region[static_cast<std::size_t>(k)];
    if (radii.empty()) continue;
    std::sort(radii.begin(), radii.end());
    if (!fits(k, radii)) return false;
  }
  return true;
}

template <class Valid, class Emit>
void enumerate(const TsState& st, const Scenario& s, Valid&& valid, Emit&& emit) {
  const int n = s.num_robots();
  const int m = s.num_objects();
  const int K = s.num_regions();

  // Transport choice per object: -1 = not moved, else target region.
  std::vector<std::vector<int>> moves(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    auto& opts = moves[static_cast<std::size_t>(j)];
    opts.push_back(-1);
    const RobotSet a = st.ag[static_cast<std::size_t>(j)];
    if (a == 0 || !world::lambda_check(s, j, a)) continue;
    for (int k = 0; k < K; ++k)
      if (k != st.object_region[static_cast<std::size_t>(j)]) opts.push_back(k);
  }
  std::vector<int> move(static_cast<std::size_t>(m), -1);
  std::vector<Action> per_robot(static_cast<std::size_t>(n));
  std::vector<char> transported_robot(static_cast<std::size_t>(n), 0);

  std::function<void(int)> robots_from;
  robots_from = [&](int i) {
    if (i == n) {
      ActionSet acts;
      for (int r = 0; r < n; ++r) {
        const Action& a = per_robot[static_cast<std::size_t>(r)];
        if (a.kind == ActionKind::Transport && a.robot != r) continue;
        acts.push_back(a);
      }
      for (auto& a : acts)
        if (a.kind == ActionKind::Transport) a.robot = -1;
      TsState target = apply_actions(st, acts);
      if (!valid(target)) return;
      Transition t;
      t.cost = transition_cost(acts, s);
      t.actions = std::move(acts);
      t.source = st;
      t.target = std::move(target);
      emit(std::move(t));
      return;
    }
    auto& slot = per_robot[static_cast<std::size_t>(i)];
    if (transported_robot[static_cast<std::size_t>(i)]) {
      robots_from(i + 1);
      return;
    }
    const int here = st.robot_region[static_cast<std::size_t>(i)];
    const int holding = st.grasped_by(i);
    slot = Action{ActionKind::Stay, i, -1, 0, here, here};
    robots_from(i + 1);
    if (holding < 0) {
      for (int k = 0; k < K; ++k) {
        if (k == here) continue;
        slot = Action{ActionKind::Navigate, i, -1, 0, here, k};
        robots_from(i + 1);
      }
      for (int j = 0; j < m; ++j) {
        if (move[static_cast<std::size_t>(j)] >= 0) continue;
        if (st.object_region[static_cast<std::size_t>(j)] != here) continue;
        slot = Action{ActionKind::Grasp, i, j, 0, here, here};
        robots_from(i + 1);
      }
    } else if (move[static_cast<std::size_t>(holding)] < 0) {
      slot = Action{ActionKind::Release, i, holding, 0, here, here};
      robots_from(i + 1);
    }
  };

  std::function<void(int)> objects_from;
  objects_from = [&](int j) {
    if (j == m) {
      std::fill(transported_robot.begin(), transported_robot.end(), 0);
      for (int o = 0; o < m; ++o) {
        if (move[static_cast<std::size_t>(o)] < 0) continue;
        const RobotSet a = st.ag[static_cast<std::size_t>(o)];
        const int lowest = __builtin_ctz(a);
        for (int r = 0; r < n; ++r)
          if (has_robot(a, r)) {
            transported_robot[static_cast<std::size_t>(r)] = 1;
            per_robot[static_cast<std::size_t>(r)] = Action{ActionKind::Transport, lowest, o, a,
                                                            st.object_region[static_cast<std::size_t>(o)],
                                                            move[static_cast<std::size_t>(o)]};
          }
      }
      robots_from(0);
      return;
    }
    for (int k : moves[static_cast<std::size_t>(j)]) {
      move[static_cast<std::size_t>(j)] = k;
      objects_from(j + 1);
    }
    move[static_cast<std::size_t>(j)] = -1;
  };
  objects_from(0);
}

}  // namespace

bool state_valid(const TsState& st, const Scenario& s) {
  return valid_with(st, s, [&](int k, const std::vector<double>& radii) {
    return world::pack_spheres(s.regions[static_cast<std::size_t>(k)].disk, radii).has_value();
  });
}

TsState apply_actions(const TsState& source, const ActionSet& actions) {
  TsState t = source;
  for (const auto& a : actions) {
    switch (a.kind) {
      case ActionKind::Stay: break;
      case ActionKind::Navigate: t.robot_region.at(static_cast<std::size_t>(a.robot)) = a.to; break;
      case ActionKind::Transport:
        t.object_region.at(static_cast<std::size_t>(a.object)) = a.to;
        for (std::size_t r = 0; r < t.robot_region.size(); ++r)
          if (has_robot(a.coalition, static_cast<int>(r))) t.robot_region[r] = a.to;
        break;
      case ActionKind::Grasp: t.ag.at(static_cast<std::size_t>(a.object)) |= robot_bit(a.robot); break;
      case ActionKind::Release: t.ag.at(static_cast<std::size_t>(a.object)) &= ~robot_bit(a.robot); break;
    }
  }
  return t;
}

double transition_cost(const ActionSet& actions, const Scenario& s) {
  double c = 0.0;
  auto dist = [&](int a, int b) {
    return (s.regions.at(static_cast<std::size_t>(a)).disk.center - s.regions.at(static_cast<std::size_t>(b)).disk.center)
        .norm();
  };
  for (const auto& a : actions) {
    switch (a.kind) {
      case ActionKind::Stay: break;
      case ActionKind::Navigate:
      case ActionKind::Transport: c += dist(a.from, a.to); break;
      case ActionKind::Grasp:
      case ActionKind::Release: c += kGraspEpsilon; break;
    }
  }
  return c;
}

std::vector<Transition> successors(const TsState& st, const Scenario& s) {
  std::vector<Transition> out;
  enumerate(st, s, [&](const TsState& t) { return state_valid(t, s); }, [&](Transition t) { out.push_back(std::move(t)); });
  return out;
}

std::string action_text(const Action& a) {
  std::ostringstream os;
  switch (a.kind) {
    case ActionKind::Stay: os << "-"; break;
    case ActionKind::Navigate: os << "π" << a.from + 1 << " ->" << a.robot + 1 << " π" << a.to + 1; break;
    case ActionKind::Transport: {
      os << "π" << a.from + 1 << " ->T{";
      bool first = true;
      for (int r = 0; r < world::kMaxRobots; ++r)
        if (has_robot(a.coalition, r)) {
          os << (first ? "" : ",") << r + 1;
          first = false;
        }
      os << "}," << a.object + 1 << " π" << a.to + 1;
      break;
    }
    case ActionKind::Grasp: os << a.robot + 1 << " ->g " << a.object + 1; break;
    case ActionKind::Release: os << a.robot + 1 << " ->r " << a.object + 1; break;
  }
  return os.str();
}

std::string action_set_text(const ActionSet& actions) {
  std::string out;
  for (const auto& a : actions) {
    if (a.kind == ActionKind::Stay) continue;
    if (!out.empty()) out += ", ";
    out += action_text(a);
  }
  return out.empty() ? "-" : out;
}

std::string state_text(const TsState& st) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < st.robot_region.size(); ++i) os << (i ? "," : "") << "π" << st.robot_region[i] + 1;
  os << " | ";
  for (std::size_t j = 0; j < st.object_region.size(); ++j) os << (j ? "," : "") << "π" << st.object_region[j] + 1;
  os << " | ";
  for (std::size_t j = 0; j < st.ag.size(); ++j) {
    os << (j ? "," : "") << "{";
    bool first = true;
    for (int r = 0; r < world::kMaxRobots; ++r)
      if (has_robot(st.ag[j], r)) {
        os << (first ? "" : " ") << r + 1;
        first = false;
      }
    os << "}";
  }
  os << ")";
  return os.str();
}

world::Letter label(const TsState& st, const Scenario& s) {
  return world::label_regions(s, st.robot_region, st.object_region);
}

TransitionSystem::TransitionSystem(const Scenario& s) : scenario_(&s) { intern(initial_state(s)); }

int TransitionSystem::intern(const TsState& st) {
  auto it = ids_.find(st);
  if (it != ids_.end()) return it->second;
  const int id = static_cast<int>(states_.size());
  states_.push_back(st);
  ids_.emplace(st, id);
  succ_.emplace_back();
  expanded_.push_back(0);
  labels_.emplace_back();
  labelled_.push_back(0);
  return id;
}

int TransitionSystem::find(const TsState& st) const {
  auto it = ids_.find(st);
  return it == ids_.end() ? -1 : it->second;
}

bool TransitionSystem::region_fits(int region, std::vector<double> radii) {
  auto key = std::make_pair(region, std::move(radii));
  auto it = fit_cache_.find(key);
  if (it != fit_cache_.end()) return it->second;
  const bool ok = world::pack_spheres(scenario_->regions[static_cast<std::size_t>(region)].disk, key.second).has_value();
  fit_cache_.emplace(std::move(key), ok);
  return ok;
}

bool TransitionSystem::valid(const TsState& st) {
  return valid_with(st, *scenario_, [&](int k, const std::vector<double>& radii) { return region_fits(k, radii); });
}

const std::vector<TsEdge>& TransitionSystem::successors(int id) {
  const auto u = static_cast<std::size_t>(id);
  if (!expanded_[u]) {
    const TsState src = states_[u];  // copy: interning may reallocate
    std::vector<TsEdge> out;
    enumerate(
        src, *scenario_, [&](const TsState& t) { return valid(t); },
        [&](Transition t) { out.push_back({intern(t.target), t.cost, std::move(t.actions)}); });
    succ_[u] = std::move(out);
    expanded_[u] = 1;
  }
  return succ_[u];
}

const world::Letter& TransitionSystem::label(int id) {
  const auto u = static_cast<std::size_t>(id);
  if (!labelled_[u]) {
    labels_[u] = ts::label(states_[u], *scenario_);
    labelled_[u] = 1;
  }
  return labels_[u];
}

BuiltTs build_ts(const Scenario& s, std::size_t max_states) {
  TransitionSystem tsys(s);
  if (!tsys.valid(tsys.state(0))) throw std::invalid_argument("initial TS state is not valid");
  BuiltTs out;
  for (std::size_t u = 0; u < tsys.num_states(); ++u) {
    if (tsys.num_states() > max_states)
      throw BudgetExceeded("transition system exceeds " + std::to_string(max_states) + " states");
    const auto& e = tsys.successors(static_cast<int>(u));
    out.num_transitions += e.size();
  }
  if (tsys.num_states() > max_states)
    throw BudgetExceeded("transition system exceeds " + std::to_string(max_states) + " states");
  for (std::size_t u = 0; u < tsys.num_states(); ++u) {
    out.states.push_back(tsys.state(static_cast<int>(u)));
    out.edges.push_back(tsys.successors(static_cast<int>(u)));
  }
  return out;
}

std::string export_ts(const BuiltTs& ts) {
  std::ostringstream os;
  os << "# states " << ts.states.size() << "\n";
  for (std::size_t u = 0; u < ts.states.size(); ++u) os << u << " " << state_text(ts.states[u]) << "\n";
  os << "# transitions " << ts.num_transitions << "\n";
  for (std::size_t u = 0; u < ts.edges.size(); ++u)
    for (const auto& e : ts.edges[u]) os << u << " -> " << e.target << " : " << e.cost << " : " << action_set_text(e.actions) << "\n";
  return os.str();
}

}  // namespace tempofleet::ts

#include "tempofleet/executor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <regex>
#include <sstream>

namespace tempofleet::executor {

// Outermost spot of the region (polar grid) whose clearance from `fixed` is
// at least `margin`; the best-cleared angle wins within a ring. Occupants on
// the rim keep the middle free for large coupled systems.
std::optional<Vec2> rim_placement(const Disk& region, const std::vector<Disk>& fixed, double r, double margin) {
  const double reach = region.radius - r - margin;
  if (reach < 0.0) return std::nullopt;
  constexpr int kRings = 40, kAngles = 720;
  for (int ring = 0; ring <= kRings; ++ring) {
    const double rho = reach * (1.0 - static_cast<double>(ring) / kRings);
    const int n = ring == kRings ? 1 : kAngles;
    double best = -std::numeric_limits<double>::infinity();
    std::optional<Vec2> spot;
    for (int a = 0; a < n; ++a) {
      const double ang = 2.0 * M_PI * a / n;
      const Vec2 p = region.center + rho * Vec2(std::cos(ang), std::sin(ang));
      double clr = std::numeric_limits<double>::infinity();
      for (const auto& f : fixed) clr = std::min(clr, (p - f.center).norm() - f.radius - r);
      if (clr >= margin && clr > best) {
        best = clr;
        spot = p;
      }
    }
    if (spot) return spot;
  }
  return std::nullopt;
}

using world::Entity;
using world::EntityKind;
using world::RobotSet;

Config initial_config(const world::Scenario& s) {
  Config c;
  c.state = ts::initial_state(s);
  c.robots.assign(static_cast<std::size_t>(s.num_robots()), Vec2::Zero());
  c.objects.assign(static_cast<std::size_t>(s.num_objects()), Vec2::Zero());
  for (int k = 0; k < s.num_regions(); ++k) {
    std::vector<double> radii;
    std::vector<Vec2*> slots;
    for (int i = 0; i < s.num_robots(); ++i)
      if (c.state.robot_region[static_cast<std::size_t>(i)] == k) {
        radii.push_back(s.robots[static_cast<std::size_t>(i)].radius);
        slots.push_back(&c.robots[static_cast<std::size_t>(i)]);
      }
    for (int j = 0; j < s.num_objects(); ++j)
      if (c.state.object_region[static_cast<std::size_t>(j)] == k) {
        radii.push_back(s.objects[static_cast<std::size_t>(j)].radius);
        slots.push_back(&c.objects[static_cast<std::size_t>(j)]);
      }
    if (radii.empty()) continue;
    const Disk& region = s.regions[static_cast<std::size_t>(k)].disk;
    const auto pos = world::pack_spheres(region, radii);
    if (!pos) throw ExecutionError("initial occupants do not fit in region " + s.regions[static_cast<std::size_t>(k)].id);
    // Touching balls would be merged into one obstacle for later motions, so
    // separate the occupants when there is room and keep the packing otherwise.
    std::vector<Disk> placed;
    for (std::size_t n = 0; n < slots.size(); ++n) {
      const auto spot = rim_placement(region, placed, radii[n], 0.05 * radii[n]);
      if (!spot) {
        placed.clear();
        break;
      }
      placed.push_back({*spot, radii[n]});
    }
    for (std::size_t n = 0; n < slots.size(); ++n) *slots[n] = placed.empty() ? (*pos)[n] : placed[n].center;
  }
  return c;
}

namespace {

Disk ball_of(const world::Scenario& s, const Config& c, const Entity& e) {
  switch (e.kind) {
    case EntityKind::Robot: return {c.robots[static_cast<std::size_t>(e.robot)], e.radius};
    case EntityKind::Object:
    case EntityKind::Coupled: return {c.objects[static_cast<std::size_t>(e.object)], e.radius};
  }
  (void)s;
  return {};
}

bool same_entity(const Entity& a, const Entity& b) {
  return a.kind == b.kind && a.robot == b.robot && a.object == b.object;
}

bool inside(const Disk& outer, const Disk& ball) {
  return (ball.center - outer.center).norm() + ball.radius <= outer.radius * (1 + 1e-12);
}

// The entity an event moves, in the configuration after the step's releases.
Entity moving_entity(const world::Scenario& s, const Event& e) {
  if (e.robot >= 0)
    return {EntityKind::Robot, world::robot_bit(e.robot), e.robot, -1, s.robots[static_cast<std::size_t>(e.robot)].radius};
  return {EntityKind::Coupled, e.coalition, -1, e.object, world::coupled_radius(s, e.object, e.coalition)};
}

std::vector<Disk> other_balls(const world::Scenario& s, const Config& c, const Entity& self) {
  std::vector<Disk> out;
  for (const auto& e : world::entities(s, c.state.ag))
    if (!same_entity(e, self)) out.push_back(ball_of(s, c, e));
  return out;
}

// Physical bodies of the other entities: a coupled system is its object
// and member robots rather than its bounding ball.
std::vector<Disk> other_bodies(const world::Scenario& s, const Config& c, const Entity& self) {
  std::vector<Disk> out;
  for (const auto& e : world::entities(s, c.state.ag)) {
    if (same_entity(e, self)) continue;
    if (e.kind != EntityKind::Coupled) {
      out.push_back(ball_of(s, c, e));
      continue;
    }
    out.push_back({c.objects[static_cast<std::size_t>(e.object)], s.objects[static_cast<std::size_t>(e.object)].radius});
    for (int i = 0; i < s.num_robots(); ++i)
      if (world::has_robot(e.robots, i))
        out.push_back({c.robots[static_cast<std::size_t>(i)], s.robots[static_cast<std::size_t>(i)].radius});
  }
  return out;
}

Vec2& position_of(Config& c, const Entity& e) {
  return e.kind == EntityKind::Robot ? c.robots[static_cast<std::size_t>(e.robot)]
                                     : c.objects[static_cast<std::size_t>(e.object)];
}

// Moves an entity's reference point; coalition robots follow rigidly.
void move_entity(const world::Scenario& s, Config& c, const Entity& e, const Vec2& to) {
  Vec2& p = position_of(c, e);
  const Vec2 delta = to - p;
  p = to;
  if (e.kind == EntityKind::Coupled)
    for (int i = 0; i < s.num_robots(); ++i)
      if (world::has_robot(e.robots, i)) c.robots[static_cast<std::size_t>(i)] += delta;
}

void set_regions(Config& c, const Entity& e, int region) {
  if (e.kind == EntityKind::Robot) {
    c.state.robot_region[static_cast<std::size_t>(e.robot)] = region;
    return;
  }
  c.state.object_region[static_cast<std::size_t>(e.object)] = region;
  for (std::size_t i = 0; i < c.robots.size(); ++i)
    if (world::has_robot(e.robots, static_cast<int>(i))) c.state.robot_region[i] = region;
}

// Attaches the coalition around the object, touching it.
void seat_coalition(const world::Scenario& s, Config& c, int object) {
  const RobotSet a = c.state.ag[static_cast<std::size_t>(object)];
  const int n = world::set_size(a);
  const Vec2 xo = c.objects[static_cast<std::size_t>(object)];
  const double ro = s.objects[static_cast<std::size_t>(object)].radius;
  int k = 0;
  for (int i = 0; i < s.num_robots(); ++i) {
    if (!world::has_robot(a, i)) continue;
    const double ang = 2.0 * M_PI * k++ / n;
    c.robots[static_cast<std::size_t>(i)] = xo + (ro + s.robots[static_cast<std::size_t>(i)].radius) * Vec2(std::cos(ang), std::sin(ang));
  }
}

ts::Action as_action(const Event& e) {
  ts::Action a;
  switch (e.kind) {
    case EventKind::Release: a.kind = ts::ActionKind::Release; break;
    case EventKind::Grasp: a.kind = ts::ActionKind::Grasp; break;
    case EventKind::Motion: a.kind = e.robot >= 0 ? ts::ActionKind::Navigate : ts::ActionKind::Transport; break;
  }
  a.robot = e.robot;
  a.object = e.object;
  a.coalition = e.coalition;
  a.from = e.from;
  a.to = e.to;
  return a;
}

}  // namespace

std::vector<std::pair<world::Entity, Disk>> entity_balls(const world::Scenario& s, const Config& c) {
  std::vector<std::pair<world::Entity, Disk>> out;
  for (const auto& e : world::entities(s, c.state.ag)) out.emplace_back(e, ball_of(s, c, e));
  return out;
}

int containing_region(const world::Scenario& s, const Disk& ball) {
  for (int k = 0; k < s.num_regions(); ++k)
    if (inside(s.regions[static_cast<std::size_t>(k)].disk, ball)) return k;
  return -1;
}

std::string event_text(const Event& e) { return ts::action_text(as_action(e)); }

std::optional<Vec2> goal_placement(const world::Scenario& s, const Config& c, const world::Entity& e, int from, int to,
                                   const ExecOptions& opt) {
  const auto obstacles = control::motion_obstacles(s, from, to, other_bodies(s, c, e));
  // Goals stay clear of whole entity balls so every entity can still move off later.
  std::vector<Disk> fixed = other_balls(s, c, e);
  try {
    const control::FreeSpace fs(s.workspace, obstacles, e.radius, opt.control.rbar, opt.control.merge_gap);
    // Merged obstacles enclose pockets the navigation function cannot reach.
    for (const auto& m : fs.obstacles()) fixed.push_back({m.center, m.radius - e.radius});
  } catch (const control::ControlError&) {
    return std::nullopt;
  }
  return rim_placement(s.regions[static_cast<std::size_t>(to)].disk, fixed, e.radius, opt.margin * e.radius);
}

std::vector<Event> serialize_transition(const world::Scenario& s, const Config& c, const ts::ActionSet& actions,
                                        const ExecOptions& opt) {
  std::vector<Event> releases, motions, grasps;
  for (const auto& a : actions) {
    switch (a.kind) {
      case ts::ActionKind::Stay: break;
      case ts::ActionKind::Release: releases.push_back({EventKind::Release, a.robot, a.object, 0, a.from, a.to, {}}); break;
      case ts::ActionKind::Grasp: grasps.push_back({EventKind::Grasp, a.robot, a.object, 0, a.from, a.to, {}}); break;
      case ts::ActionKind::Navigate: motions.push_back({EventKind::Motion, a.robot, -1, 0, a.from, a.to, {}}); break;
      case ts::ActionKind::Transport:
        motions.push_back({EventKind::Motion, -1, a.object, a.coalition, a.from, a.to, {}});
        break;
    }
  }
  Config base = c;
  for (const auto& r : releases) base.state.ag[static_cast<std::size_t>(r.object)] &= ~world::robot_bit(r.robot);

  // Free robots before coupled systems, each by index: the entity order.
  auto key = [](const Event& e) { return e.robot >= 0 ? std::pair{0, e.robot} : std::pair{1, e.object}; };
  std::vector<std::size_t> order(motions.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(motions[a]) < key(motions[b]); });

  std::string failure;
  do {
    Config pred = base;
    std::vector<Event> seq;
    bool ok = true;
    for (std::size_t m : order) {
      Event ev = motions[m];
      const Entity e = moving_entity(s, ev);
      const auto goal = goal_placement(s, pred, e, ev.from, ev.to, opt);
      if (!goal) {
        ok = false;
        failure = "no room for " + event_text(ev) + " in region " + s.regions[static_cast<std::size_t>(ev.to)].id;
        break;
      }
      ev.goal = *goal;
      move_entity(s, pred, e, *goal);
      set_regions(pred, e, ev.to);
      seq.push_back(ev);
    }
    if (ok) {
      std::vector<Event> out = releases;
      out.insert(out.end(), seq.begin(), seq.end());
      out.insert(out.end(), grasps.begin(), grasps.end());
      return out;
    }
  } while (std::next_permutation(order.begin(), order.end(),
                                 [&](std::size_t a, std::size_t b) { return key(motions[a]) < key(motions[b]); }));
  throw ExecutionError("no feasible motion order: " + failure);
}

double ExecutionReport::min_clearance() const {
  double c = std::numeric_limits<double>::infinity();
  for (const auto& m : motions) c = std::min(c, m.result.min_clearance);
  return c;
}

bool ExecutionReport::alpha_monotone() const {
  return std::all_of(motions.begin(), motions.end(), [](const MotionRecord& m) { return m.result.alpha_monotone; });
}

double ExecutionReport::max_m_hat() const {
  double v = 0.0;
  for (const auto& m : motions) v = std::max(v, m.result.max_m_hat);
  return v;
}

double ExecutionReport::max_alpha_hat() const {
  double v = 0.0;
  for (const auto& m : motions) v = std::max(v, m.result.max_alpha_hat);
  return v;
}

namespace {

void record(const world::Scenario& s, const Config& c, double t, ExecutionReport& rep) {
  for (int i = 0; i < s.num_robots(); ++i) {
    const Disk b{c.robots[static_cast<std::size_t>(i)], s.robots[static_cast<std::size_t>(i)].radius};
    const int k = containing_region(s, b);
    rep.robot_trace[static_cast<std::size_t>(i)].push_back(
        {t, b.center, k, k >= 0 ? s.robot_services(i, k) : world::Letter{}});
  }
  for (int j = 0; j < s.num_objects(); ++j) {
    const Disk b{c.objects[static_cast<std::size_t>(j)], s.objects[static_cast<std::size_t>(j)].radius};
    const int k = containing_region(s, b);
    rep.object_trace[static_cast<std::size_t>(j)].push_back(
        {t, b.center, k, k >= 0 ? s.object_services(j, k) : world::Letter{}});
  }
}

control::Plant plant_for(const world::Scenario& s, const Config& c, const Entity& e) {
  control::Plant p;
  if (e.kind == EntityKind::Robot) {
    const auto& r = s.robots[static_cast<std::size_t>(e.robot)];
    p.mass = r.mass;
    p.parts = {{r.friction, Vec2::Zero()}};
    return p;
  }
  const auto& o = s.objects[static_cast<std::size_t>(e.object)];
  const Vec2 xo = c.objects[static_cast<std::size_t>(e.object)];
  p.mass = o.mass;
  p.parts = {{o.friction, Vec2::Zero()}};
  for (int i = 0; i < s.num_robots(); ++i) {
    if (!world::has_robot(e.robots, i)) continue;
    const auto& r = s.robots[static_cast<std::size_t>(i)];
    p.mass += r.mass;
    p.parts.push_back({r.friction, xo - c.robots[static_cast<std::size_t>(i)]});
  }
  return p;
}

// Makes the coupled ball of `object` fit its region and clear the others.
void settle_coupled(const world::Scenario& s, Config& c, int object, ExecutionReport& rep) {
  seat_coalition(s, c, object);
  const RobotSet a = c.state.ag[static_cast<std::size_t>(object)];
  const Entity e{EntityKind::Coupled, a, -1, object, world::coupled_radius(s, object, a)};
  const Disk region = s.regions[static_cast<std::size_t>(c.state.object_region[static_cast<std::size_t>(object)])].disk;
  const auto others = other_balls(s, c, e);
  const Disk ball{c.objects[static_cast<std::size_t>(object)], e.radius};
  bool fits = inside(region, ball);
  for (const auto& o : others) fits = fits && (o.center - ball.center).norm() >= o.radius + ball.radius;
  if (fits) return;
  const auto spot = rim_placement(region, others, e.radius, 0.0);
  if (!spot) throw ExecutionError("coupled system of object " + std::to_string(object + 1) + " does not fit its region");
  c.objects[static_cast<std::size_t>(object)] = *spot;
  seat_coalition(s, c, object);
  ++rep.relocations;
}

// Releasing is instantaneous: the robot leaves its attachment point for the
// clearest spot of its region, which also takes it out of the ball of any
// coupled system that remains.
void undock(const world::Scenario& s, Config& c, int robot, double margin) {
  const double r = s.robots[static_cast<std::size_t>(robot)].radius;
  const Entity self{EntityKind::Robot, world::robot_bit(robot), robot, -1, r};
  const Disk& region = s.regions[static_cast<std::size_t>(c.state.robot_region[static_cast<std::size_t>(robot)])].disk;
  const auto spot = rim_placement(region, other_balls(s, c, self), r, margin * r);
  if (!spot) throw ExecutionError("no room to release robot " + std::to_string(robot + 1));
  c.robots[static_cast<std::size_t>(robot)] = *spot;
}

void check_placements(const world::Scenario& s, const Config& c) {
  for (const auto& [e, ball] : entity_balls(s, c)) {
    const int k = e.kind == EntityKind::Robot ? c.state.robot_region[static_cast<std::size_t>(e.robot)]
                                              : c.state.object_region[static_cast<std::size_t>(e.object)];
    if (!inside(s.regions[static_cast<std::size_t>(k)].disk, ball))
      throw ExecutionError("entity ball left its designated region " + s.regions[static_cast<std::size_t>(k)].id);
  }
}

}  // namespace

ExecutionReport execute_plan(const product::Plan& plan, const world::Scenario& s, const ExecOptions& opt) {
  auto run_motion = [&](const Event& ev, std::size_t idx, double& t, Config& c, ExecutionReport& rep) {
    const Entity e = moving_entity(s, ev);
    const auto goal = goal_placement(s, c, e, ev.from, ev.to, opt);
    if (!goal) throw ExecutionError("no goal placement for " + event_text(ev));
    control::MotionSpec spec;
    spec.workspace = s.workspace;
    spec.obstacles = control::motion_obstacles(s, ev.from, ev.to, other_bodies(s, c, e));
    spec.radius = e.radius;
    spec.plant = plant_for(s, c, e);
    if (e.kind == EntityKind::Coupled)
      spec.cf.assign(static_cast<std::size_t>(world::set_size(e.robots)), 1.0 / world::set_size(e.robots));
    spec.start = position_of(c, e);
    spec.goal = *goal;
    spec.target = s.regions[static_cast<std::size_t>(ev.to)].disk;
    MotionRecord mr{idx, ev, t, {}};
    mr.event.goal = *goal;
    try {
      mr.result = control::simulate(spec, opt.control);
    } catch (const control::ControlError& err) {
      throw ExecutionError(event_text(ev) + ": " + err.what());
    }
    const bool ok = mr.result.ok();
    const std::string msg = control::outcome_name(mr.result.outcome) + " (" + mr.result.message + ")";
    t += mr.result.duration;
    move_entity(s, c, e, mr.result.final.x);
    set_regions(c, e, ev.to);
    if (!opt.keep_logs) mr.result.log.clear();
    rep.motions.push_back(std::move(mr));
    if (!ok) throw ExecutionError(event_text(ev) + ": " + msg);
  };

  if (opt.suffix_reps < 1) throw std::invalid_argument("suffix_reps must be at least 1");
  if (plan.suffix.empty()) throw std::invalid_argument("plan has no suffix");
  ExecutionReport rep;
  rep.prefix_steps = plan.prefix.size();
  rep.suffix_steps = plan.suffix.size();
  rep.suffix_reps = opt.suffix_reps;
  rep.robot_trace.resize(static_cast<std::size_t>(s.num_robots()));
  rep.object_trace.resize(static_cast<std::size_t>(s.num_objects()));

  std::vector<const product::PlanStep*> steps;
  for (const auto& st : plan.prefix) steps.push_back(&st);
  for (int lap = 0; lap < opt.suffix_reps; ++lap)
    for (const auto& st : plan.suffix) steps.push_back(&st);

  Config c = initial_config(s);
  double t = 0.0;
  record(s, c, t, rep);
  std::size_t idx = 0;
  try {
    for (; idx < steps.size(); ++idx) {
      const auto& step = *steps[idx];
      rep.step_text.push_back(ts::action_set_text(step.actions));
      if (!(c.state == step.source)) throw ExecutionError("configuration does not match the step's source state");
      const auto events = serialize_transition(s, c, step.actions, opt);
      std::vector<int> grasped;
      for (const auto& ev : events) {
        switch (ev.kind) {
          case EventKind::Release:
            c.state.ag[static_cast<std::size_t>(ev.object)] &= ~world::robot_bit(ev.robot);
            undock(s, c, ev.robot, opt.margin);
            break;
          case EventKind::Grasp:
            c.state.ag[static_cast<std::size_t>(ev.object)] |= world::robot_bit(ev.robot);
            grasped.push_back(ev.object);
            break;
          case EventKind::Motion:
            run_motion(ev, idx, t, c, rep);
            break;
        }
      }
      std::sort(grasped.begin(), grasped.end());
      grasped.erase(std::unique(grasped.begin(), grasped.end()), grasped.end());
      for (int j : grasped) settle_coupled(s, c, j, rep);
      if (!(c.state == step.target)) throw ExecutionError("configuration does not match the step's target state");
      check_placements(s, c);
      t += opt.dwell;
      record(s, c, t, rep);
    }
    rep.ok = true;
  } catch (const ExecutionError& err) {
    std::ostringstream m;
    m << "step " << idx + 1 << " [" << (idx < rep.step_text.size() ? rep.step_text[idx] : "?") << "]: " << err.what();
    rep.error = m.str();
  }
  rep.total_time = t;
  rep.final_config = c;
  return rep;
}

ltl::Formula Tasks::combined() const {
  std::vector<ltl::Formula> parts;
  if (global) parts.push_back(*global);
  for (const auto& [i, f] : robots) parts.push_back(f);
  for (const auto& [j, f] : objects) parts.push_back(f);
  if (parts.empty()) return ltl::Formula::tt();
  ltl::Formula out = parts[0];
  for (std::size_t k = 1; k < parts.size(); ++k) out = ltl::Formula::conj(out, parts[k]);
  return out;
}

Tasks parse_tasks(const std::vector<std::string>& specs, const world::Scenario& s) {
  static const std::regex owner(R"(^\s*([ro])(\d+)\s*:(.*)$)");
  const auto universe = s.atom_universe();
  Tasks t;
  auto add = [](std::optional<ltl::Formula>& slot, ltl::Formula f) {
    slot = slot ? ltl::Formula::conj(*slot, std::move(f)) : std::move(f);
  };
  for (const auto& spec : specs) {
    std::smatch m;
    if (!std::regex_match(spec, m, owner)) {
      add(t.global, ltl::parse_ltl(spec, universe));
      continue;
    }
    const int idx = std::stoi(m[2]) - 1;
    const bool robot = m[1] == "r";
    if (idx < 0 || idx >= (robot ? s.num_robots() : s.num_objects()))
      throw std::invalid_argument("task owner '" + m[1].str() + m[2].str() + "' does not exist");
    auto& table = robot ? t.robots : t.objects;
    std::optional<ltl::Formula> slot;
    if (auto it = table.find(idx); it != table.end()) slot = it->second;
    add(slot, ltl::parse_ltl(m[3].str(), universe));
    table.insert_or_assign(idx, *slot);
  }
  return t;
}

namespace {

std::optional<ltl::LassoWord> lasso_of(const ExecutionReport& r, const std::vector<world::Letter>& letters,
                                       std::string* why) {
  const std::size_t p = r.prefix_steps, q = r.suffix_steps;
  if (!r.ok || letters.size() != 1 + p + q * static_cast<std::size_t>(r.suffix_reps)) {
    if (why) *why = "behavior is incomplete";
    return std::nullopt;
  }
  ltl::LassoWord w;
  w.prefix.assign(letters.begin(), letters.begin() + static_cast<std::ptrdiff_t>(p));
  w.cycle.assign(letters.begin() + static_cast<std::ptrdiff_t>(p), letters.begin() + static_cast<std::ptrdiff_t>(p + q));
  for (std::size_t k = p + q; k < letters.size(); ++k)
    if (letters[k] != letters[p + (k - p) % q]) {
      if (why) *why = "suffix laps disagree at position " + std::to_string(k);
      return std::nullopt;
    }
  return w;
}

std::vector<world::Letter> letters_of(const std::vector<TracePoint>& trace) {
  std::vector<world::Letter> out;
  for (const auto& tp : trace) out.push_back(tp.services);
  return out;
}

ltl::LassoWord must(std::optional<ltl::LassoWord> w, const std::string& why) {
  if (!w) throw ExecutionError(why);
  return *w;
}

}  // namespace

ltl::LassoWord robot_word(const ExecutionReport& r, int robot) {
  std::string why;
  return must(lasso_of(r, letters_of(r.robot_trace.at(static_cast<std::size_t>(robot))), &why), why);
}

ltl::LassoWord object_word(const ExecutionReport& r, int object) {
  std::string why;
  return must(lasso_of(r, letters_of(r.object_trace.at(static_cast<std::size_t>(object))), &why), why);
}

namespace {
std::vector<world::Letter> joint_letters(const ExecutionReport& r) {
  std::size_t n = r.robot_trace.empty() ? 0 : r.robot_trace[0].size();
  if (!r.object_trace.empty()) n = std::max(n, r.object_trace[0].size());
  std::vector<world::Letter> out(n);
  for (const auto& trace : r.robot_trace)
    for (std::size_t k = 0; k < trace.size(); ++k) out[k].insert(trace[k].services.begin(), trace[k].services.end());
  for (const auto& trace : r.object_trace)
    for (std::size_t k = 0; k < trace.size(); ++k) out[k].insert(trace[k].services.begin(), trace[k].services.end());
  return out;
}
}  // namespace

ltl::LassoWord joint_word(const ExecutionReport& r) {
  std::string why;
  return must(lasso_of(r, joint_letters(r), &why), why);
}

bool verify_behavior(const ExecutionReport& r, const Tasks& tasks, std::string* why) {
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  if (!r.ok) return fail("execution failed: " + r.error);
  std::string reason;
  const auto joint = lasso_of(r, joint_letters(r), &reason);
  if (!joint) return fail(reason);
  for (const auto& [i, f] : tasks.robots) {
    const auto w = lasso_of(r, letters_of(r.robot_trace.at(static_cast<std::size_t>(i))), &reason);
    if (!w) return fail(reason);
    if (!ltl::eval_lasso(f, *w)) return fail("robot " + std::to_string(i + 1) + " violates " + f.str());
  }
  for (const auto& [j, f] : tasks.objects) {
    const auto w = lasso_of(r, letters_of(r.object_trace.at(static_cast<std::size_t>(j))), &reason);
    if (!w) return fail(reason);
    if (!ltl::eval_lasso(f, *w)) return fail("object " + std::to_string(j + 1) + " violates " + f.str());
  }
  const auto all = tasks.combined();
  if (!ltl::eval_lasso(all, *joint)) return fail("joint behavior violates " + all.str());
  return true;
}

nlohmann::json report_to_json(const ExecutionReport& r) {
  using nlohmann::json;
  auto vec = [](const Vec2& v) { return json::array({v.x(), v.y()}); };
  auto trace_json = [&](const std::vector<std::vector<TracePoint>>& traces) {
    json out = json::array();
    for (const auto& tr : traces) {
      json a = json::array();
      for (const auto& tp : tr)
        a.push_back({{"t", tp.t}, {"x", vec(tp.x)}, {"region", tp.region + 1}, {"services", tp.services}});
      out.push_back(a);
    }
    return out;
  };
  json motions = json::array();
  for (const auto& m : r.motions) {
    motions.push_back({{"step", m.step + 1},
                       {"event", event_text(m.event)},
                       {"t_start", m.t_start},
                       {"duration", m.result.duration},
                       {"outcome", control::outcome_name(m.result.outcome)},
                       {"message", m.result.message},
                       {"goal", vec(m.event.goal)},
                       {"final", vec(m.result.final.x)},
                       {"final_speed", m.result.final.v.norm()},
                       {"final_ev", m.result.final_ev},
                       {"min_clearance", m.result.min_clearance},
                       {"max_m_hat", m.result.max_m_hat},
                       {"max_alpha_hat", m.result.max_alpha_hat},
                       {"alpha_monotone", m.result.alpha_monotone},
                       {"rbar", m.result.rbar},
                       {"tau", m.result.tau}});
  }
  return {{"ok", r.ok},
          {"error", r.error},
          {"prefix_steps", r.prefix_steps},
          {"suffix_steps", r.suffix_steps},
          {"suffix_reps", r.suffix_reps},
          {"steps", r.step_text},
          {"motions", motions},
          {"relocations", r.relocations},
          {"total_time", r.total_time},
          {"robots", trace_json(r.robot_trace)},
          {"objects", trace_json(r.object_trace)}};
}

ExecutionReport report_from_json(const nlohmann::json& j) {
  ExecutionReport r;
  r.ok = j.at("ok").get<bool>();
  r.error = j.value("error", "");
  r.prefix_steps = j.at("prefix_steps").get<std::size_t>();
  r.suffix_steps = j.at("suffix_steps").get<std::size_t>();
  r.suffix_reps = j.at("suffix_reps").get<int>();
  r.step_text = j.value("steps", std::vector<std::string>{});
  r.relocations = j.value("relocations", std::size_t{0});
  r.total_time = j.value("total_time", 0.0);
  auto traces = [](const nlohmann::json& a) {
    std::vector<std::vector<TracePoint>> out;
    for (const auto& tr : a) {
      auto& v = out.emplace_back();
      for (const auto& tp : tr)
        v.push_back({tp.at("t").get<double>(), Vec2(tp.at("x")[0].get<double>(), tp.at("x")[1].get<double>()),
                     tp.at("region").get<int>() - 1, tp.at("services").get<world::Letter>()});
    }
    return out;
  };
  r.robot_trace = traces(j.at("robots"));
  r.object_trace = traces(j.at("objects"));
  return r;
}

}  // namespace tempofleet::executor

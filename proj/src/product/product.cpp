#include <algorithm>
#include <iomanip>
#include <queue>
#include <sstream>
#include <unordered_map>

#include "tempofleet/product.hpp"

namespace tempofleet::product {

ProductSpace::ProductSpace(ts::TransitionSystem& tsys, const ltl::Nba& nba) : ts_(&tsys), nba_(&nba) {}

std::vector<ProductState> ProductSpace::initial() const {
  std::vector<ProductState> out;
  for (int q : nba_->initial()) out.push_back({ts_->initial(), q});
  return out;
}

ProductState ProductSpace::from_key(std::int64_t k) const {
  const auto n = static_cast<std::int64_t>(nba_->num_states());
  return {static_cast<int>(k / n), static_cast<int>(k % n)};
}

std::uint64_t ProductSpace::letter_bits(int s) {
  const auto u = static_cast<std::size_t>(s);
  if (u >= bits_.size()) {
    bits_.resize(ts_->num_states() + 1, 0);
    have_bits_.resize(ts_->num_states() + 1, 0);
  }
  if (!have_bits_[u]) {
    bits_[u] = nba_->encode(ts_->label(s));
    have_bits_[u] = 1;
  }
  return bits_[u];
}

void ProductSpace::successors(const ProductState& p, std::vector<ProductEdge>& out) {
  out.clear();
  const std::uint64_t letter = letter_bits(p.ts);
  const auto& nba_edges = nba_->edges(p.nba);
  bool any = false;
  for (const auto& e : nba_edges) any = any || e.label.matches(letter);
  if (!any) return;
  const auto& ts_edges = ts_->successors(p.ts);
  for (std::size_t k = 0; k < ts_edges.size(); ++k)
    for (const auto& e : nba_edges)
      if (e.label.matches(letter)) out.push_back({{ts_edges[k].target, e.target}, ts_edges[k].cost, static_cast<int>(k)});
}

namespace {

struct Visit {
  double dist;
  std::int64_t parent;  // -1 for sources
  int ts_edge;
};

using Queue = std::priority_queue<std::pair<double, std::int64_t>, std::vector<std::pair<double, std::int64_t>>,
                                  std::greater<>>;

std::vector<std::pair<ProductState, int>> walk_back(const ProductSpace& space,
                                                    const std::unordered_map<std::int64_t, Visit>& seen,
                                                    std::int64_t key, std::int64_t stop) {
  std::vector<std::pair<ProductState, int>> path;
  while (true) {
    const Visit& v = seen.at(key);
    if (v.parent < 0) break;
    path.emplace_back(space.from_key(v.parent), v.ts_edge);
    key = v.parent;
    if (key == stop) break;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

Plan plan_from_path(ProductSpace& space, const std::vector<std::pair<ProductState, int>>& prefix,
                    const std::vector<std::pair<ProductState, int>>& suffix) {
  auto& tsys = space.tsys();
  auto to_steps = [&](const std::vector<std::pair<ProductState, int>>& path, double& total) {
    std::vector<PlanStep> steps;
    total = 0.0;
    for (const auto& [p, k] : path) {
      const ts::TsEdge e = tsys.successors(p.ts)[static_cast<std::size_t>(k)];
      PlanStep st;
      st.source = tsys.state(p.ts);
      st.target = tsys.state(e.target);
      st.actions = e.actions;
      st.cost = e.cost;
      total += e.cost;
      steps.push_back(std::move(st));
    }
    return steps;
  };
  Plan plan;
  plan.prefix = to_steps(prefix, plan.prefix_cost);
  plan.suffix = to_steps(suffix, plan.suffix_cost);
  return plan;
}

std::optional<Plan> exact_plan(ts::TransitionSystem& tsys, const ltl::Nba& nba, const ExactOptions& opt) {
  if (!tsys.valid(tsys.state(tsys.initial()))) throw std::invalid_argument("initial TS state is not valid");
  ProductSpace space(tsys, nba);
  std::vector<ProductEdge> buf;
  auto budget = [&](std::size_t n) {
    if (n > opt.max_states)
      throw ts::BudgetExceeded("product search exceeds " + std::to_string(opt.max_states) + " states");
  };

  std::unordered_map<std::int64_t, Visit> seen;
  Queue pq;
  for (const auto& p : space.initial()) {
    const auto k = space.key(p);
    if (seen.emplace(k, Visit{0.0, -1, -1}).second) pq.emplace(0.0, k);
  }
  std::vector<std::pair<double, std::int64_t>> finals;
  std::unordered_map<std::int64_t, char> done;
  while (!pq.empty()) {
    const auto [d, k] = pq.top();
    pq.pop();
    if (done.contains(k)) continue;
    done.emplace(k, 1);
    const ProductState p = space.from_key(k);
    if (space.accepting(p)) finals.emplace_back(d, k);
    space.successors(p, buf);
    for (const auto& e : buf) {
      const auto tk = space.key(e.target);
      const double nd = d + e.cost;
      auto it = seen.find(tk);
      if (it == seen.end()) {
        seen.emplace(tk, Visit{nd, k, e.ts_edge});
        budget(seen.size());
        pq.emplace(nd, tk);
      } else if (nd < it->second.dist) {
        it->second = Visit{nd, k, e.ts_edge};
        pq.emplace(nd, tk);
      }
    }
  }
  std::sort(finals.begin(), finals.end());

  double best = std::numeric_limits<double>::infinity();
  std::optional<Plan> result;
  for (const auto& [d0, a] : finals) {
    if (d0 >= best) break;
    const double bound = best - d0;
    std::unordered_map<std::int64_t, Visit> cyc;
    std::unordered_map<std::int64_t, char> closed;
    Queue q;
    space.successors(space.from_key(a), buf);
    for (const auto& e : buf) {
      const auto tk = space.key(e.target);
      auto it = cyc.find(tk);
      if (it == cyc.end() || e.cost < it->second.dist) {
        cyc[tk] = Visit{e.cost, a, e.ts_edge};
        q.emplace(e.cost, tk);
      }
    }
    bool closed_cycle = false;
    double cycle_cost = 0.0;
    while (!q.empty()) {
      const auto [d, k] = q.top();
      q.pop();
      if (d >= bound) break;
      if (closed.contains(k)) continue;
      closed.emplace(k, 1);
      if (k == a) {
        closed_cycle = true;
        cycle_cost = d;
        break;
      }
      space.successors(space.from_key(k), buf);
      for (const auto& e : buf) {
        const auto tk = space.key(e.target);
        const double nd = d + e.cost;
        auto it = cyc.find(tk);
        if (it == cyc.end()) {
          cyc.emplace(tk, Visit{nd, k, e.ts_edge});
          budget(cyc.size());
          q.emplace(nd, tk);
        } else if (nd < it->second.dist) {
          it->second = Visit{nd, k, e.ts_edge};
          q.emplace(nd, tk);
        }
      }
    }
    if (!closed_cycle) continue;
    best = d0 + cycle_cost;
    // The cycle's parent chain ends at `a` itself.
    std::vector<std::pair<ProductState, int>> suffix;
    std::int64_t cur = a;
    do {
      const Visit& v = cyc.at(cur);
      suffix.emplace_back(space.from_key(v.parent), v.ts_edge);
      cur = v.parent;
    } while (cur != a);
    std::reverse(suffix.begin(), suffix.end());
    result = plan_from_path(space, walk_back(space, seen, a, -2), suffix);
  }
  return result;
}

std::optional<Plan> exact_plan(const world::Scenario& s, const ltl::Nba& nba, const ExactOptions& opt) {
  ts::TransitionSystem tsys(s);
  return exact_plan(tsys, nba, opt);
}

ltl::LassoWord plan_word(const Plan& plan, const world::Scenario& s) {
  ltl::LassoWord w;
  for (const auto& st : plan.prefix) w.prefix.push_back(ts::label(st.source, s));
  for (const auto& st : plan.suffix) w.cycle.push_back(ts::label(st.source, s));
  return w;
}

bool verify_plan(const Plan& plan, const ltl::Nba& nba, const world::Scenario& s, std::string* why) {
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  if (plan.suffix.empty()) return fail("suffix is empty");
  ts::TsState cur = ts::initial_state(s);
  if (!ts::state_valid(cur, s)) return fail("initial state is not valid");
  auto check_steps = [&](const std::vector<PlanStep>& steps, const char* part) -> std::optional<std::string> {
    for (std::size_t i = 0; i < steps.size(); ++i) {
      const auto& st = steps[i];
      const std::string where = std::string(part) + " step " + std::to_string(i + 1);
      if (!(st.source == cur)) return where + " does not continue the previous state";
      const auto succ = ts::successors(st.source, s);
      const bool found = std::any_of(succ.begin(), succ.end(), [&](const ts::Transition& t) {
        return t.target == st.target && t.actions == st.actions;
      });
      if (!found) return where + " is not a transition of the TS";
      cur = st.target;
    }
    return std::nullopt;
  };
  if (auto e = check_steps(plan.prefix, "prefix")) return fail(*e);
  const ts::TsState loop = cur;
  if (auto e = check_steps(plan.suffix, "suffix")) return fail(*e);
  if (!(cur == loop)) return fail("suffix does not return to its first state");
  if (!ltl::nba_accepts_lasso(nba, plan_word(plan, s))) return fail("trace is not accepted by the automaton");
  return true;
}

namespace {

using nlohmann::json;

json set_to_json(world::RobotSet a) {
  json out = json::array();
  for (int r = 0; r < world::kMaxRobots; ++r)
    if (world::has_robot(a, r)) out.push_back(r + 1);
  return out;
}

world::RobotSet set_from_json(const json& j) {
  world::RobotSet a = 0;
  for (const auto& r : j) a |= world::robot_bit(r.get<int>() - 1);
  return a;
}

const char* kind_name(ts::ActionKind k) {
  switch (k) {
    case ts::ActionKind::Stay: return "stay";
    case ts::ActionKind::Navigate: return "navigate";
    case ts::ActionKind::Transport: return "transport";
    case ts::ActionKind::Grasp: return "grasp";
    case ts::ActionKind::Release: return "release";
  }
  return "?";
}

ts::ActionKind kind_from(const std::string& s) {
  if (s == "stay") return ts::ActionKind::Stay;
  if (s == "navigate") return ts::ActionKind::Navigate;
  if (s == "transport") return ts::ActionKind::Transport;
  if (s == "grasp") return ts::ActionKind::Grasp;
  if (s == "release") return ts::ActionKind::Release;
  throw std::invalid_argument("unknown action kind '" + s + "'");
}

json action_to_json(const ts::Action& a) {
  json j{{"kind", kind_name(a.kind)}, {"from", a.from + 1}, {"to", a.to + 1}};
  if (a.robot >= 0) j["robot"] = a.robot + 1;
  if (a.object >= 0) j["object"] = a.object + 1;
  if (a.kind == ts::ActionKind::Transport) j["coalition"] = set_to_json(a.coalition);
  return j;
}

ts::Action action_from_json(const json& j) {
  ts::Action a;
  a.kind = kind_from(j.at("kind").get<std::string>());
  a.robot = j.value("robot", 0) - 1;
  a.object = j.value("object", 0) - 1;
  a.from = j.at("from").get<int>() - 1;
  a.to = j.at("to").get<int>() - 1;
  if (j.contains("coalition")) a.coalition = set_from_json(j["coalition"]);
  return a;
}

json steps_to_json(const std::vector<PlanStep>& steps) {
  json out = json::array();
  for (const auto& st : steps) {
    json acts = json::array();
    for (const auto& a : st.actions) acts.push_back(action_to_json(a));
    out.push_back({{"source", state_to_json(st.source)},
                   {"target", state_to_json(st.target)},
                   {"actions", acts},
                   {"text", ts::action_set_text(st.actions)},
                   {"cost", st.cost}});
  }
  return out;
}

std::vector<PlanStep> steps_from_json(const json& j) {
  std::vector<PlanStep> out;
  for (const auto& js : j) {
    PlanStep st;
    st.source = state_from_json(js.at("source"));
    st.target = state_from_json(js.at("target"));
    for (const auto& ja : js.at("actions")) st.actions.push_back(action_from_json(ja));
    st.cost = js.at("cost").get<double>();
    out.push_back(std::move(st));
  }
  return out;
}

}  // namespace

json state_to_json(const ts::TsState& st) {
  json robots = json::array(), objects = json::array(), ag = json::array();
  for (int k : st.robot_region) robots.push_back(k + 1);
  for (int k : st.object_region) objects.push_back(k + 1);
  for (auto a : st.ag) ag.push_back(set_to_json(a));
  return {{"robots", robots}, {"objects", objects}, {"ag", ag}};
}

ts::TsState state_from_json(const json& j) {
  ts::TsState st;
  for (const auto& k : j.at("robots")) st.robot_region.push_back(k.get<int>() - 1);
  for (const auto& k : j.at("objects")) st.object_region.push_back(k.get<int>() - 1);
  for (const auto& a : j.at("ag")) st.ag.push_back(set_from_json(a));
  return st;
}

json plan_to_json(const Plan& plan) {
  return {{"prefix", steps_to_json(plan.prefix)},
          {"suffix", steps_to_json(plan.suffix)},
          {"prefix_cost", plan.prefix_cost},
          {"suffix_cost", plan.suffix_cost},
          {"total_cost", plan.total_cost()}};
}

Plan plan_from_json(const json& j) {
  Plan p;
  p.prefix = steps_from_json(j.at("prefix"));
  p.suffix = steps_from_json(j.at("suffix"));
  for (const auto& s : p.prefix) p.prefix_cost += s.cost;
  for (const auto& s : p.suffix) p.suffix_cost += s.cost;
  return p;
}

std::string plan_table(const Plan& plan) {
  std::ostringstream os;
  auto row = [&](int n, bool star, const std::string& text) {
    std::string id = std::to_string(n) + (star ? "*" : "");
    os << std::left << std::setw(6) << id << text << "\n";
  };
  os << "step  actions\n";
  int n = 1;
  row(n, false, "-");
  for (const auto& st : plan.prefix) row(++n, false, ts::action_set_text(st.actions));
  for (const auto& st : plan.suffix) row(++n, true, ts::action_set_text(st.actions));
  os << "prefix cost " << plan.prefix_cost << ", suffix cost " << plan.suffix_cost << ", total " << plan.total_cost()
     << "\n";
  return os.str();
}

}  // namespace tempofleet::product

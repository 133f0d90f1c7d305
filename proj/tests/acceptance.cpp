// Acceptance run: one PASS/FAIL line per criterion.
//   acceptance            all criteria
//   acceptance 3 5        only AC3 and AC5 (AC8 uses whatever of AC5-AC7 ran)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "ltl_gen.hpp"
#include "plan_oracle.hpp"
#include "tempofleet/control.hpp"
#include "tempofleet/executor.hpp"
#include "tempofleet/planner.hpp"
#include "tempofleet/product.hpp"
#include "tempofleet/ts.hpp"
#include "ts_oracle.hpp"

using namespace tempofleet;
using control::Disk;
using control::Mat2;
using control::Vec2;
using Clock = std::chrono::steady_clock;

namespace {

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = false;
  std::string detail;
};

void report(int id, const Verdict& v, double secs) {
  std::printf("AC%d %s  %s  (%.1f s)\n", id, v.pass ? "PASS" : "FAIL", v.detail.c_str(), secs);
  std::fflush(stdout);
}

template <class... A>
std::string strf(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

ltl::Nba nba_for(const world::Scenario& s, const std::string& f) {
  return ltl::translate(ltl::parse_ltl(f, s.atom_universe()));
}

// ---------------------------------------------------------------- AC1

Verdict ac1() {
  const std::vector<std::string> two{"a", "b"};
  const auto words = tfgen::all_lassos(two, 2, 2);
  const auto forms = tfgen::nnf_formulas(two, 3);
  std::size_t checks = 0, bad = 0;
  std::string first_bad;
  for (const auto& f : forms) {
    const auto n = ltl::translate(f);
    for (const auto& w : words) {
      ++checks;
      if (ltl::nba_accepts_lasso(n, w) != ltl::eval_lasso(f, w)) {
        if (!bad++) first_bad = f.str();
      }
    }
  }
  std::mt19937_64 rng(2024);
  const std::vector<std::string> three{"a", "b", "c"};
  std::size_t rbad = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto f = tfgen::random_formula(rng, three, 4);
    const auto w = tfgen::random_lasso(rng, three, 3, 3);
    if (ltl::nba_accepts_lasso(ltl::translate(f), w) != ltl::eval_lasso(f, w)) {
      if (!bad && !rbad) first_bad = f.str();
      ++rbad;
    }
  }
  Verdict v;
  v.pass = bad == 0 && rbad == 0;
  v.detail = strf("exhaustive %zu formulas x %zu words: %zu disagreements; random 10000 pairs: %zu", forms.size(),
                 words.size(), bad, rbad);
  if (!v.pass) v.detail += " first: " + first_bad;
  return v;
}

// ---------------------------------------------------------------- AC2

Verdict ac2() {
  Verdict v{true, ""};
  for (const char* name : {"micro1", "micro2", "micro3"}) {
    const auto s = fixture(name);
    const auto built = ts::build_ts(s, 100000);
    const auto mine = tforacle::from_built(built);
    const auto ref = tforacle::oracle_ts(s);
    const bool same = mine.states == ref.states && mine.edges == ref.edges;
    v.pass = v.pass && same;
    v.detail += strf("%s %zu/%zu %s; ", name, mine.states.size(), mine.edges.size(), same ? "equal" : "DIFFER");
  }
  const auto c1 = fixture("case1");
  const auto a = ts::build_ts(c1, 1'000'000);
  const auto b = ts::build_ts(c1, 1'000'000);
  const bool det = ts::export_ts(a) == ts::export_ts(b);
  v.pass = v.pass && det;
  v.detail += strf("case1 %zu states / %zu transitions (reference 3112 / 154960), deterministic %s", a.states.size(),
                  a.num_transitions, det ? "yes" : "NO");
  return v;
}

// ---------------------------------------------------------------- AC3

Verdict ac3() {
  const std::vector<std::pair<std::string, std::string>> cases{
      {"micro1", "G F \"1-π2\""},
      {"micro1", "G F \"1-π2\" & G F \"1-π1\""},
      {"micro1", "X \"1-π2\" & X X \"1-π1\""},
      {"micro2", "F \"O1-π2\""},
      {"micro2", "G F \"O1-π2\" & G F \"O1-π1\""},
      {"micro2", "!\"O1-π2\" U (\"1-π2\" & X \"1-π1\")"},
      {"micro3", "F \"O1-π3\""},
      {"micro3", "G F \"2-π1\" & G F \"1-π3\""},
      {"micro3", "F (\"O1-π2\" & \"1-π3\") & G !\"2-π3\""},
      {"micro3", "G F (\"O1-π3\" & \"2-π1\") & G F (\"O1-π1\" & \"1-π2\")"},
  };
  Verdict v{true, ""};
  int n = 0;
  std::size_t largest = 0;
  for (const auto& [name, f] : cases) {
    const auto s = fixture(name);
    const auto nba = nba_for(s, f);
    ts::TransitionSystem tsys(s);
    product::ProductSpace sp(tsys, nba);
    const auto ex = tforacle::explicit_product(sp, 100000);
    largest = std::max(largest, ex.states.size());
    const auto ref = tforacle::floyd_optimum(ex);
    const auto exact = product::exact_plan(s, nba);
    if (exact.has_value() != ref.has_value() ||
        (exact && std::abs(exact->total_cost() - *ref) > 1e-9 * std::max(1.0, *ref))) {
      v.pass = false;
      v.detail += "exact mismatch on " + f + "; ";
      continue;
    }
    if (!exact) continue;
    std::vector<double> costs;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      planner::PlannerParams p;
      p.n_max = 100000;
      p.seed = seed;
      const auto plan = planner::plan_sampling(s, nba, p);
      if (plan && product::verify_plan(*plan, nba, s)) costs.push_back(plan->total_cost());
    }
    bool ok = costs.size() >= 19;
    double med = 0.0;
    if (!costs.empty()) {
      std::sort(costs.begin(), costs.end());
      med = costs[costs.size() / 2];
      if (costs.size() % 2 == 0) med = 0.5 * (med + costs[costs.size() / 2 - 1]);
      ok = ok && med <= exact->total_cost() * 1.01 + 1e-9;
    }
    if (!ok) {
      v.pass = false;
      v.detail += strf("sampling %zu/20 median %.3f vs exact %.3f on ", costs.size(), med, exact->total_cost()) + f + "; ";
    }
    ++n;
  }
  v.detail += strf("%d feasible cases, %zu total, largest product %zu states; exact = Floyd-Warshall, sampling 20 seeds "
                  "at n_max 1e5",
                  n, cases.size(), largest);
  return v;
}

// ---------------------------------------------------------------- AC4

struct RandomWorld {
  Disk workspace;
  std::vector<Disk> obstacles;
  double radius;
};

RandomWorld random_world(std::mt19937_64& rng, int n_obstacles) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RandomWorld w;
  w.workspace = {Vec2(100 * u(rng) - 50, 100 * u(rng) - 50), 3 + 30 * u(rng)};
  w.radius = (0.01 + 0.05 * u(rng)) * w.workspace.radius;
  const double R = w.workspace.radius;
  for (int tries = 0; static_cast<int>(w.obstacles.size()) < n_obstacles && tries < 10000; ++tries) {
    const double rad = (0.03 + 0.15 * u(rng)) * R;
    const double a = 2 * M_PI * u(rng), d = (R - rad - 2.5 * w.radius) * std::sqrt(u(rng));
    const Disk o{w.workspace.center + d * Vec2(std::cos(a), std::sin(a)), rad};
    bool ok = d > 0;
    for (const auto& q : w.obstacles) ok = ok && (o.center - q.center).norm() > o.radius + q.radius + 3 * w.radius;
    if (ok) w.obstacles.push_back(o);
  }
  return w;
}

Verdict ac4() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst_rt = 0, worst_j = 0;
  int points = 0;
  for (int w = 0; points < 1000; ++w) {
    const auto world = random_world(rng, w % 5);
    const control::FreeSpace fs(world.workspace, world.obstacles, world.radius, 0.1);
    for (int i = 0; i < 10; ++i, ++points) {
      Vec2 x;
      do x = fs.workspace().center + fs.workspace().radius * Vec2(u(rng), u(rng));
      while (!fs.contains(x));
      Mat2 J;
      const Vec2 chi = fs.transform(x, &J);
      worst_rt = std::max(worst_rt, (fs.inverse(chi) - x).norm());
      const double h = 1e-7 * fs.scale();
      Mat2 fd;
      for (int k = 0; k < 2; ++k) {
        Vec2 e = Vec2::Zero();
        e(k) = h;
        fd.col(k) = (fs.transform(x + e) - fs.transform(x - e)) / (2 * h);
      }
      worst_j = std::max(worst_j, (J - fd).norm() / J.norm());
    }
  }
  return {worst_rt < 1e-6 && worst_j < 1e-4,
          strf("%d points: max round trip %.2e m, max Jacobian rel. error %.2e", points, worst_rt, worst_j)};
}

// ---------------------------------------------------------------- AC5-AC8

struct Adaptation {
  std::size_t runs = 0;
  bool monotone = true;
  double m_hat = 0.0;
  double alpha_hat = 0.0;

  void add(const control::MotionResult& r) {
    ++runs;
    monotone = monotone && r.alpha_monotone;
    m_hat = std::max(m_hat, r.max_m_hat);
    alpha_hat = std::max(alpha_hat, r.max_alpha_hat);
  }
};

control::MotionSpec nav_spec(const world::Scenario& s) {
  control::MotionSpec m;
  m.workspace = s.workspace;
  m.obstacles = control::motion_obstacles(s, -1, 0, {});
  m.radius = s.robots[0].radius;
  m.plant.mass = s.robots[0].mass;
  m.plant.parts = {{s.robots[0].friction, Vec2::Zero()}};
  m.target = s.regions[0].disk;
  m.goal = m.target.center;
  return m;
}

Verdict ac5(Adaptation& ad) {
  const auto s = fixture("nav");
  const auto p = control::control_params_from_json(s.control);
  auto spec = nav_spec(s);
  const control::FreeSpace fs(spec.workspace, spec.obstacles, spec.radius, p.rbar, p.merge_gap);
  const auto pw = control::point_world(fs, spec.goal);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int arrived = 0, violations = 0, slow = 0;
  double worst_ev = 0.0, min_clear = 1e300;
  for (int k = 0; k < 50; ++k) {
    Vec2 x;
    for (;;) {
      x = s.workspace.center + s.workspace.radius * Vec2(u(rng), u(rng));
      if ((x - spec.target.center).norm() < spec.target.radius + spec.radius) continue;
      if (!fs.contains(x)) continue;
      if (control::point_clearance(pw, fs.transform(x)) > p.tau) break;
    }
    spec.start = x;
    auto r = control::simulate(spec, p);
    r.log.clear();
    ad.add(r);
    min_clear = std::min(min_clear, r.min_clearance);
    if (r.outcome == control::Outcome::Collision || r.outcome == control::Outcome::Diverged || r.min_clearance <= 0.0)
      ++violations;
    if (r.ok()) {
      ++arrived;
      worst_ev = std::max(worst_ev, r.final_ev);
      if (r.final_ev >= 1e-2) ++slow;
    }
  }
  return {arrived >= 49 && violations == 0 && slow == 0,
          strf("%d/50 arrived, %d safety violations, min clearance %.3f m, max final |e_v| %.4e m/s (tau %.3g)", arrived,
              violations, min_clear, worst_ev, p.tau)};
}

Verdict ac6(Adaptation& ad) {
  const auto s = fixture("nav");
  auto p = control::control_params_from_json(s.control);
  p.log_stride = 1;
  auto spec = nav_spec(s);
  spec.start = Vec2(-1.5, 1.0);
  // object 0.25 kg plus two 1 kg robots, robots held at +-0.3 m
  spec.plant.mass = 2.25;
  spec.plant.parts = {{s.robots[0].friction, Vec2(0.3, 0)}, {s.robots[0].friction, Vec2(-0.3, 0)}};
  const auto single = control::simulate(spec, p);
  spec.cf = {0.5, 0.5};
  const auto coupled = control::simulate(spec, p);
  ad.add(single);
  ad.add(coupled);
  bool same_shares = single.log.size() == coupled.log.size();
  double worst = 0.0;
  for (std::size_t i = 0; same_shares && i < single.log.size(); ++i) {
    worst = std::max(worst, (single.log[i].x - coupled.log[i].x).norm());
    const auto& sh = coupled.log[i].shares;
    same_shares = sh.size() == 2 && sh[0] == sh[1];
  }
  return {single.ok() && coupled.ok() && same_shares && worst < 1e-8,
          strf("%zu steps, both %s, max position difference %.2e m, robot forces identical: %s", coupled.log.size(),
              coupled.ok() ? "arrived" : "did not arrive", worst, same_shares ? "yes" : "NO")};
}

Verdict ac7(Adaptation& ad) {
  const auto s = fixture("case1");
  std::ifstream in(std::string(TF_SCENARIO_DIR) + "/case1.ltl");
  std::stringstream formula;
  formula << in.rdbuf();
  const auto tasks = executor::parse_tasks({formula.str()}, s);
  const auto nba = ltl::translate(tasks.combined());
  const auto t0 = Clock::now();
  const auto plan = product::exact_plan(s, nba);
  if (!plan) return {false, "no plan"};
  const double t_plan = since(t0);
  std::string why;
  if (!product::verify_plan(*plan, nba, s, &why)) return {false, "plan does not verify: " + why};

  executor::ExecOptions eo;
  eo.control = control::control_params_from_json(s.control);
  eo.suffix_reps = 2;
  eo.keep_logs = false;
  const auto rep = executor::execute_plan(*plan, s, eo);
  for (const auto& m : rep.motions) ad.add(m.result);
  if (!rep.ok) return {false, "execution failed: " + rep.error};
  const bool verified = executor::verify_behavior(rep, tasks, &why);
  const bool safe = rep.min_clearance() > 0.0;
  return {verified && safe,
          strf("plan cost %.1f (%zu+%zu steps, %.1f s), %zu motions over 2 laps, %.0f s simulated, min clearance %.3f m, "
              "behavior verified: %s",
              plan->total_cost(), plan->prefix.size(), plan->suffix.size(), t_plan, rep.motions.size(), rep.total_time,
              rep.min_clearance(), verified ? "yes" : ("NO (" + why + ")").c_str())};
}

Verdict ac8(const Adaptation& ad) {
  const control::ControlParams p;
  if (ad.runs == 0) return {false, "no runs from AC5-AC7"};
  return {ad.monotone && ad.m_hat < p.m_cap && ad.alpha_hat < p.alpha_cap,
          strf("%zu runs: alpha_hat non-decreasing %s, max m_hat %.3f, max alpha_hat %.3f (caps %.0f / %.0f)", ad.runs,
              ad.monotone ? "yes" : "NO", ad.m_hat, ad.alpha_hat, p.m_cap, p.alpha_cap)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  auto want = [&](int k) { return only.empty() || only.count(k); };

  int failed = 0;
  Adaptation ad;
  auto run = [&](int id, auto&& f) {
    if (!want(id)) return;
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = f();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    report(id, v, since(t0));
    if (!v.pass) ++failed;
  };
  run(1, ac1);
  run(2, ac2);
  run(3, ac3);
  run(4, ac4);
  run(5, [&] { return ac5(ad); });
  run(6, [&] { return ac6(ad); });
  run(7, [&] { return ac7(ad); });
  run(8, [&] { return ac8(ad); });
  return failed == 0 ? 0 : 1;
}

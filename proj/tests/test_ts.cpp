#include <chrono>

#include "doctest.h"
#include "fixtures.hpp"
#include "tempofleet/ts.hpp"
#include "ts_oracle.hpp"

using namespace tempofleet;
using ts::ActionKind;

TEST_CASE("state validity") {
  const auto c1 = fixture("case1");
  CHECK(ts::state_valid(ts::initial_state(c1), c1));
  auto m2 = fixture("micro2");
  ts::TsState s{{0}, {1}, {0b1}};
  CHECK_FALSE(ts::state_valid(s, m2));
  world::Scenario crowded = m2;
  crowded.regions[0].disk.radius = 4;
  crowded.robots.assign(30, crowded.robots[0]);
  for (auto& r : crowded.robots) r.radius = 2;
  ts::TsState c;
  c.robot_region.assign(30, 0);
  c.object_region = {1};
  c.ag = {0};
  CHECK_FALSE(ts::state_valid(c, crowded));
}

TEST_CASE("successor examples") {
  const auto m1 = fixture("micro1");
  const auto succ = ts::successors(ts::initial_state(m1), m1);
  CHECK(succ.size() == 2);

  const auto m2 = fixture("micro2");
  const auto s2 = ts::successors(ts::initial_state(m2), m2);
  bool grasp = false, transport = false;
  for (const auto& t : s2)
    for (const auto& a : t.actions) {
      grasp = grasp || a.kind == ActionKind::Grasp;
      transport = transport || a.kind == ActionKind::Transport;
    }
  CHECK(grasp);
  CHECK_FALSE(transport);

  // Case-I: robots 1 and 3 holding object 2 in region 1 may carry it to region 4.
  const auto c1 = fixture("case1");
  ts::TsState s{{0, 2, 0}, {1, 0}, {0, 0b101}};
  REQUIRE(ts::state_valid(s, c1));
  bool found = false;
  for (const auto& t : ts::successors(s, c1))
    for (const auto& a : t.actions)
      found = found || (a.kind == ActionKind::Transport && a.object == 1 && a.coalition == 0b101 && a.to == 3);
  CHECK(found);
  // Robot 1 alone lacks the power for object 1.
  ts::TsState weak{{1, 2, 3}, {1, 0}, {0b001, 0}};
  REQUIRE(ts::state_valid(weak, c1));
  for (const auto& t : ts::successors(weak, c1))
    for (const auto& a : t.actions) CHECK(a.kind != ActionKind::Transport);
}

TEST_CASE("transition cost") {
  const auto c1 = fixture("case1");
  CHECK(ts::transition_cost({}, c1) == 0.0);
  const ts::Action nav1{ActionKind::Navigate, 0, -1, 0, 0, 1};
  const ts::Action nav2{ActionKind::Navigate, 1, -1, 0, 0, 1};
  const double d = std::sqrt(12.0 * 12.0 + 120.0 * 120.0);
  CHECK(ts::transition_cost({nav1}, c1) == doctest::Approx(d).epsilon(1e-12));
  CHECK(ts::transition_cost({nav1, nav2}, c1) == doctest::Approx(2 * d).epsilon(1e-12));
  CHECK(d == doctest::Approx(120.598).epsilon(1e-5));
  const ts::Action g{ActionKind::Grasp, 0, 0, 0, 0, 0};
  CHECK(ts::transition_cost({g}, c1) == doctest::Approx(1e-6));
}

TEST_CASE("closure: generated transitions apply and land on valid states") {
  for (const char* name : {"micro1", "micro2", "micro3"}) {
    const auto s = fixture(name);
    const auto b = ts::build_ts(s, 100000);
    for (std::size_t u = 0; u < b.states.size(); ++u) {
      CHECK(ts::state_valid(b.states[u], s));
      for (const auto& e : b.edges[u]) {
        CHECK(ts::apply_actions(b.states[u], e.actions) == b.states[e.target]);
        CHECK(e.cost == doctest::Approx(ts::transition_cost(e.actions, s)));
      }
    }
  }
}

TEST_CASE("micro counts") {
  auto b1 = ts::build_ts(fixture("micro1"), 1000);
  CHECK(b1.states.size() == 2);
  CHECK(b1.num_transitions == 4);
  auto b2 = ts::build_ts(fixture("micro2"), 1000);
  // hand count: ungrasped (robot, object) in 2x2 regions is 4 states, but the object never
  // moves unless grasped; with it in region 1: robot anywhere (2) + grasped pairs (2) + object in 2 with robot anywhere (2)
  CHECK(b2.states.size() == 6);
  CHECK_THROWS_AS(ts::build_ts(fixture("micro3"), 10), ts::BudgetExceeded);
}

TEST_CASE("brute-force oracle equivalence") {
  for (const char* name : {"micro1", "micro2", "micro3"}) {
    CAPTURE(name);
    const auto s = fixture(name);
    const auto built = ts::build_ts(s, 100000);
    const auto mine = tforacle::from_built(built);
    const auto ref = tforacle::oracle_ts(s);
    CHECK(ref.edges.size() == built.num_transitions);
    CHECK(mine.states == ref.states);
    CHECK(mine.edges == ref.edges);
  }
}

TEST_CASE("determinism") {
  const auto s = fixture("micro3");
  const auto a = ts::build_ts(s, 100000);
  const auto b = ts::build_ts(s, 100000);
  CHECK(ts::export_ts(a) == ts::export_ts(b));
}

TEST_CASE("swapping identical robots gives an isomorphic TS") {
  auto s = fixture("micro3");
  s.robots[1] = s.robots[0];
  s.robots[1].init_region = 1;
  world::Scenario swapped = s;
  std::swap(swapped.robots[0], swapped.robots[1]);
  auto perm = [](const ts::TsState& st) {
    ts::TsState out = st;
    std::swap(out.robot_region[0], out.robot_region[1]);
    for (auto& a : out.ag) a = ((a & 1u) << 1) | ((a >> 1) & 1u);
    return out;
  };
  const auto a = ts::build_ts(s, 100000);
  const auto b = ts::build_ts(swapped, 100000);
  REQUIRE(a.states.size() == b.states.size());
  REQUIRE(a.num_transitions == b.num_transitions);
  std::multiset<std::string> ca, cb;
  for (std::size_t u = 0; u < a.states.size(); ++u)
    for (const auto& e : a.edges[u])
      ca.insert(ts::state_text(perm(a.states[u])) + ">" + ts::state_text(perm(a.states[e.target])));
  for (std::size_t u = 0; u < b.states.size(); ++u)
    for (const auto& e : b.edges[u]) cb.insert(ts::state_text(b.states[u]) + ">" + ts::state_text(b.states[e.target]));
  CHECK(ca == cb);
}

TEST_CASE("lazy system agrees with eager successors") {
  const auto s = fixture("micro3");
  ts::TransitionSystem tsys(s);
  for (std::size_t u = 0; u < tsys.num_states() && u < 50; ++u) {
    const auto eager = ts::successors(tsys.state(static_cast<int>(u)), s);
    const auto& lazy = tsys.successors(static_cast<int>(u));
    REQUIRE(eager.size() == lazy.size());
    for (std::size_t k = 0; k < eager.size(); ++k) CHECK(eager[k].target == tsys.state(lazy[k].target));
  }
}
